#include "rebartie/pose_sampling.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <thread>

#include "rebartie/error.hpp"

namespace rebartie {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw Error(ErrorCode::kInvalidParams, what);
}

}  // namespace

void AnnealSchedule::validate() const {
  require(steps >= 1, "steps must be >= 1");
  if (!(dt > 0.0)) throw Error(ErrorCode::kNonPositiveDt, "dt must be > 0");
  require(t_start >= t_end && t_end >= 0.0, "schedule requires t_start >= t_end >= 0");
  require(sigma_rot >= 0.0 && sigma_trans >= 0.0, "sigmas must be >= 0");
  require(decay != NoiseDecay::kGeometric || t_end > 0.0,
          "geometric decay requires t_end > 0");
}

double AnnealSchedule::time_at(std::size_t k) const {
  if (steps <= 1) return t_start;
  const double f = static_cast<double>(k) / static_cast<double>(steps - 1);
  if (decay == NoiseDecay::kGeometric) return t_start * std::pow(t_end / t_start, f);
  return t_start + (t_end - t_start) * f;
}

double AnnealSchedule::noise_scale(std::size_t k) const {
  return t_start > 0.0 ? time_at(k) / t_start : 0.0;
}

void SamplerConfig::validate() const {
  schedule.validate();
  require(n_chains >= 1, "n_chains must be >= 1");
}

Pose diffuse_forward(const Pose& g0, double t, double sigma_rot,
                     double sigma_trans, std::size_t n_substeps, Rng& rng) {
  require(t >= 0.0, "t must be >= 0");
  require(n_substeps >= 1, "n_substeps must be >= 1");
  if (t == 0.0) return g0;
  const double dt = t / static_cast<double>(n_substeps);
  Pose g = g0;
  for (std::size_t i = 0; i < n_substeps; ++i) {
    g = compose(g, exp_se3(sample_wiener(dt, sigma_rot, sigma_trans, rng)));
  }
  return g;
}

Pose langevin_step(const Pose& g, const ScoreField& field, double t, double dt,
                   double sigma_rot, double sigma_trans, double noise_scale,
                   Rng& rng, const PointCloud& scene, const PointCloud& tool) {
  const Twist s = field.score(g, t, scene, tool);
  if (!s.is_finite()) throw Error(ErrorCode::kNonFiniteScore, "score returned a non-finite value");
  const Twist dw = sample_wiener(dt, sigma_rot, sigma_trans, rng);
  return compose(g, exp_se3(s * (0.5 * dt) + dw * noise_scale));
}

SampleResult anneal_sample(const Pose& init, const ScoreField& field,
                           const SamplerConfig& config, const PointCloud& scene,
                           const PointCloud& tool, unsigned jobs) {
  config.validate();
  if (!field.score) throw Error(ErrorCode::kInvalidParams, "score field has no score function");
  const AnnealSchedule& sch = config.schedule;
  const std::size_t n = config.n_chains;
  std::vector<std::vector<Pose>> paths(n);
  std::vector<std::exception_ptr> errors(n);

  auto run_chain = [&](std::size_t c) {
    try {
      Rng rng(derive_seed(config.seed, c));
      std::vector<Pose>& path = paths[c];
      path.reserve(sch.steps + 1);
      path.push_back(init);
      Pose g = init;
      for (std::size_t k = 0; k < sch.steps; ++k) {
        g = langevin_step(g, field, sch.time_at(k), sch.dt, sch.sigma_rot,
                          sch.sigma_trans, sch.noise_scale(k), rng, scene, tool);
        path.push_back(g);
      }
    } catch (...) {
      errors[c] = std::current_exception();
    }
  };
  const std::size_t workers = std::clamp<std::size_t>(jobs, 1, n);
  if (workers == 1) {
    for (std::size_t c = 0; c < n; ++c) run_chain(c);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t c = w; c < n; c += workers) run_chain(c);
      });
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  SampleResult out;
  for (const auto& p : paths) out.finals.push_back(p.back());
  if (field.energy) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < n; ++c) {
      const double e = field.energy(out.finals[c]);
      out.energies.push_back(e);
      if (e < best) {
        best = e;
        out.best_chain = c;
      }
    }
  }
  out.best = out.finals[out.best_chain];
  out.trajectory = std::move(paths[out.best_chain]);
  return out;
}

ScoreField analytic_gaussian_score(const Pose& target, double sigma_rot,
                                   double sigma_trans, double gamma) {
  require(sigma_rot > 0.0 && sigma_trans > 0.0, "score sigmas must be > 0");
  if (gamma < 0.0) throw Error(ErrorCode::kNegativeGamma, "gamma must be >= 0");
  const double wr = 1.0 / (sigma_rot * sigma_rot);
  const double wt = 1.0 / (sigma_trans * sigma_trans);
  ScoreField f;
  f.score = [=](const Pose& g, double, const PointCloud&, const PointCloud&) {
    const Twist xi = log_se3(compose(g.inverse(), target));
    return Twist{xi.omega * wr, xi.v * wt};
  };
  f.energy = [=](const Pose& g) { return pose_distance(g, target, gamma); };
  return f;
}

ScoreField analytic_mixture_score(std::span<const Pose> targets,
                                  double sigma_rot, double sigma_trans) {
  require(!targets.empty(), "mixture needs at least one component");
  require(sigma_rot > 0.0 && sigma_trans > 0.0, "score sigmas must be > 0");
  const double wr = 1.0 / (sigma_rot * sigma_rot);
  const double wt = 1.0 / (sigma_trans * sigma_trans);
  const std::vector<Pose> ts(targets.begin(), targets.end());

  // Per-component log tangent vectors and energies.
  auto components = [=](const Pose& g, std::vector<Twist>& xis, std::vector<double>& es) {
    xis.clear();
    es.clear();
    const Pose inv = g.inverse();
    for (const Pose& t : ts) {
      const Twist xi = log_se3(compose(inv, t));
      xis.push_back(xi);
      es.push_back(0.5 * (wr * xi.omega.squaredNorm() + wt * xi.v.squaredNorm()));
    }
  };
  ScoreField f;
  f.score = [=](const Pose& g, double, const PointCloud&, const PointCloud&) {
    std::vector<Twist> xis;
    std::vector<double> es;
    components(g, xis, es);
    const double emin = *std::min_element(es.begin(), es.end());
    Twist s;
    double z = 0.0;
    for (std::size_t k = 0; k < xis.size(); ++k) {
      const double w = std::exp(emin - es[k]);
      z += w;
      s = s + Twist{xis[k].omega * wr, xis[k].v * wt} * w;
    }
    return s * (1.0 / z);
  };
  f.energy = [=](const Pose& g) {
    std::vector<Twist> xis;
    std::vector<double> es;
    components(g, xis, es);
    const double emin = *std::min_element(es.begin(), es.end());
    double z = 0.0;
    for (double e : es) z += std::exp(emin - e);
    return emin - std::log(z);
  };
  return f;
}

Pose predict_tying_pose(const PointCloud& crop, const Frame& frame,
                        double standoff) {
  if (crop.empty()) throw Error(ErrorCode::kEmptyCrop, "crop is empty");
  const Vec3 c = centroid(crop.points);
  return {UnitQuaternion::from_matrix(frame.rotation()), c - standoff * frame.y};
}

}  // namespace rebartie
