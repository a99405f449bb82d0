#include "rebartie/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <tuple>

#include "rebartie/error.hpp"

namespace rebartie {

namespace {

void check_shapes(const PoseSets& predicted, const PoseSets& truth) {
  if (predicted.size() != truth.size()) {
    throw Error(ErrorCode::kShapeMismatch, "demonstration counts differ");
  }
  if (truth.empty()) throw Error(ErrorCode::kEmptyReference, "no demonstrations");
  for (std::size_t d = 0; d < truth.size(); ++d) {
    if (predicted[d].size() != truth[d].size()) {
      throw Error(ErrorCode::kShapeMismatch,
                  "pose counts differ in demonstration " + std::to_string(d));
    }
    if (truth[d].empty()) {
      throw Error(ErrorCode::kEmptyReference, "demonstration " + std::to_string(d) + " has no poses");
    }
  }
}

}  // namespace

void EvalConfig::validate() const {
  if (gamma < 0.0) throw Error(ErrorCode::kNegativeGamma, "gamma must be >= 0");
  if (!(t_g > 0.0) || !(match_radius > 0.0)) {
    throw Error(ErrorCode::kInvalidParams, "t_g and match_radius must be > 0");
  }
}

double success_rate(const PoseSets& predicted, const PoseSets& truth,
                    const EvalConfig& config) {
  config.validate();
  check_shapes(predicted, truth);
  double sum = 0.0;
  for (std::size_t d = 0; d < truth.size(); ++d) {
    std::size_t ok = 0;
    for (std::size_t j = 0; j < truth[d].size(); ++j) {
      ok += pose_distance(predicted[d][j], truth[d][j], config.gamma, config.metric) < config.t_g;
    }
    sum += static_cast<double>(ok) / static_cast<double>(truth[d].size());
  }
  return sum / static_cast<double>(truth.size());
}

double prediction_error(const PoseSets& predicted, const PoseSets& truth,
                        double gamma, TranslationMetric metric) {
  check_shapes(predicted, truth);
  double sum = 0.0;
  for (std::size_t d = 0; d < truth.size(); ++d) {
    double demo = 0.0;
    for (std::size_t j = 0; j < truth[d].size(); ++j) {
      demo += pose_distance(predicted[d][j], truth[d][j], gamma, metric);
    }
    sum += demo / static_cast<double>(truth[d].size());
  }
  return sum / static_cast<double>(truth.size());
}

NodeMatch match_nodes(std::span<const Vec3> detected,
                      std::span<const Vec3> truth, double radius) {
  if (!(radius > 0.0)) throw Error(ErrorCode::kInvalidParams, "radius must be > 0");
  NodeMatch out;
  out.truth_to_detected.assign(truth.size(), std::nullopt);
  if (truth.empty() || detected.empty()) {
    out.empty_input = true;
    return out;
  }
  std::vector<std::tuple<double, std::size_t, std::size_t>> pairs;
  for (std::size_t t = 0; t < truth.size(); ++t) {
    for (std::size_t d = 0; d < detected.size(); ++d) {
      const double dist = (truth[t] - detected[d]).norm();
      if (dist <= radius) pairs.emplace_back(dist, t, d);
    }
  }
  std::sort(pairs.begin(), pairs.end());
  std::vector<std::uint8_t> used(detected.size(), 0);
  for (const auto& [dist, t, d] : pairs) {
    if (out.truth_to_detected[t] || used[d]) continue;
    out.truth_to_detected[t] = d;
    used[d] = 1;
    ++out.matched;
  }
  out.rate = static_cast<double>(out.matched) / static_cast<double>(truth.size());
  return out;
}

double node_detection_rate(std::span<const Vec3> detected,
                           std::span<const Vec3> truth, double radius) {
  return match_nodes(detected, truth, radius).rate;
}

std::vector<std::pair<double, double>> sweep_thresholds(
    const PoseSets& predicted, const PoseSets& truth, double gamma,
    std::span<const double> thresholds, TranslationMetric metric) {
  check_shapes(predicted, truth);
  if (thresholds.empty()) throw Error(ErrorCode::kInvalidParams, "no thresholds given");
  std::vector<double> sorted(thresholds.begin(), thresholds.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<std::pair<double, double>> out;
  for (double t : sorted) {
    EvalConfig c;
    c.gamma = gamma;
    c.t_g = t;
    c.metric = metric;
    out.emplace_back(t, success_rate(predicted, truth, c));
  }
  return out;
}

EvalReport evaluate(const std::vector<std::vector<std::optional<Pose>>>& predicted,
                    const PoseSets& truth, const EvalConfig& config) {
  config.validate();
  if (predicted.size() != truth.size()) {
    throw Error(ErrorCode::kShapeMismatch, "demonstration counts differ");
  }
  if (truth.empty()) throw Error(ErrorCode::kEmptyReference, "no demonstrations");
  EvalReport r;
  double rs_sum = 0.0, er_sum = 0.0;
  std::size_t er_demos = 0;
  for (std::size_t d = 0; d < truth.size(); ++d) {
    if (predicted[d].size() != truth[d].size()) {
      throw Error(ErrorCode::kShapeMismatch,
                  "pose counts differ in demonstration " + std::to_string(d));
    }
    if (truth[d].empty()) {
      throw Error(ErrorCode::kEmptyReference, "demonstration " + std::to_string(d) + " has no poses");
    }
    DemoEval demo;
    demo.n_poses = truth[d].size();
    double demo_sum = 0.0;
    for (std::size_t j = 0; j < truth[d].size(); ++j) {
      if (!predicted[d][j]) {
        ++demo.n_missing;
        demo.distances.push_back(std::numeric_limits<double>::quiet_NaN());
        continue;
      }
      const double dg = pose_distance(*predicted[d][j], truth[d][j], config.gamma, config.metric);
      demo.distances.push_back(dg);
      demo.n_success += dg < config.t_g;
      demo_sum += dg;
    }
    const std::size_t available = demo.n_poses - demo.n_missing;
    rs_sum += static_cast<double>(demo.n_success) / static_cast<double>(demo.n_poses);
    if (available > 0) {
      er_sum += demo_sum / static_cast<double>(available);
      ++er_demos;
    }
    r.n_poses += demo.n_poses;
    r.demos.push_back(std::move(demo));
  }
  r.success_rate = rs_sum / static_cast<double>(truth.size());
  r.prediction_error = er_demos > 0 ? er_sum / static_cast<double>(er_demos)
                                    : std::numeric_limits<double>::quiet_NaN();
  return r;
}

}  // namespace rebartie
