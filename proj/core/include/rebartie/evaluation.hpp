#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "rebartie/se3.hpp"

namespace rebartie {

struct EvalConfig {
  double gamma = 1.0;
  double t_g = 0.05;          // success threshold on D_g
  double match_radius = 0.05;  // node detection radius, meters
  TranslationMetric metric = TranslationMetric::kEuclidean;

  void validate() const;
};

using PoseSets = std::vector<std::vector<Pose>>;

/// R_s: per-demonstration fraction of poses with D_g < t_g, averaged over
/// demonstrations. Predictions and truths must have identical shapes
/// (ShapeMismatch otherwise).
double success_rate(const PoseSets& predicted, const PoseSets& truth,
                    const EvalConfig& config);

/// E_r: per-demonstration mean D_g, averaged over demonstrations.
double prediction_error(const PoseSets& predicted, const PoseSets& truth,
                        double gamma,
                        TranslationMetric metric = TranslationMetric::kEuclidean);

struct NodeMatch {
  // truth_to_detected[i] is the detection matched to truth node i, if any.
  std::vector<std::optional<std::size_t>> truth_to_detected;
  std::size_t matched = 0;
  double rate = 0.0;
  bool empty_input = false;  // either list empty; rate is 0
};

/// Greedy one-to-one matching in ascending distance (ties: lower truth then
/// lower detection index); pairs farther than `radius` are never matched.
NodeMatch match_nodes(std::span<const Vec3> detected,
                      std::span<const Vec3> truth, double radius);

double node_detection_rate(std::span<const Vec3> detected,
                           std::span<const Vec3> truth, double radius);

/// (t_g, R_s) for each threshold, sorted by t_g.
std::vector<std::pair<double, double>> sweep_thresholds(
    const PoseSets& predicted, const PoseSets& truth, double gamma,
    std::span<const double> thresholds,
    TranslationMetric metric = TranslationMetric::kEuclidean);

struct DemoEval {
  std::size_t n_poses = 0;
  std::size_t n_success = 0;
  std::size_t n_missing = 0;     // truth poses with no prediction
  std::vector<double> distances;  // D_g per truth pose; NaN when missing
};

struct EvalReport {
  double success_rate = 0.0;      // missing poses count as failures
  double prediction_error = 0.0;  // over available poses; NaN if none
  std::size_t n_poses = 0;
  std::vector<DemoEval> demos;
};

/// Like success_rate/prediction_error but tolerates missing predictions.
EvalReport evaluate(const std::vector<std::vector<std::optional<Pose>>>& predicted,
                    const PoseSets& truth, const EvalConfig& config);

}  // namespace rebartie
