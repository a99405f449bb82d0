#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "rebartie/node_ordering.hpp"
#include "rebartie/point_cloud.hpp"
#include "rebartie/se3.hpp"

namespace rebartie {

using ScoreFn = std::function<Twist(const Pose& g, double t,
                                    const PointCloud& scene,
                                    const PointCloud& tool)>;
using EnergyFn = std::function<double(const Pose& g)>;

/// Score field in body coordinates with an optional energy used to rank
/// chains (lower is better).
struct ScoreField {
  ScoreFn score;
  EnergyFn energy;
};

enum class NoiseDecay { kLinear, kGeometric };

struct AnnealSchedule {
  std::size_t steps = 200;
  double t_start = 1.0;
  double t_end = 0.01;
  double dt = 0.05;
  double sigma_rot = 0.2;
  double sigma_trans = 0.1;
  NoiseDecay decay = NoiseDecay::kLinear;

  void validate() const;
  double time_at(std::size_t k) const;
  /// Multiplier on the Wiener increment at step k, t_k / t_start.
  double noise_scale(std::size_t k) const;
};

struct SamplerConfig {
  AnnealSchedule schedule;
  std::size_t n_chains = 8;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Forward diffusion: n_substeps Wiener increments with total time t,
/// applied on the right. t == 0 returns g0 unchanged.
Pose diffuse_forward(const Pose& g0, double t, double sigma_rot,
                     double sigma_trans, std::size_t n_substeps, Rng& rng);

/// g * exp(0.5 * score * dt + noise_scale * dW). Throws NonFiniteScore.
Pose langevin_step(const Pose& g, const ScoreField& field, double t, double dt,
                   double sigma_rot, double sigma_trans, double noise_scale,
                   Rng& rng, const PointCloud& scene, const PointCloud& tool);

struct SampleResult {
  Pose best;
  std::size_t best_chain = 0;
  std::vector<Pose> finals;      // one per chain
  std::vector<double> energies;  // per chain; empty without an energy
  std::vector<Pose> trajectory;  // best chain, init first
};

/// Runs n_chains annealed Langevin chains from `init`; chain c uses
/// derive_seed(seed, c). The best chain minimizes the energy when one is
/// given, else chain 0 is reported.
SampleResult anneal_sample(const Pose& init, const ScoreField& field,
                           const SamplerConfig& config, const PointCloud& scene,
                           const PointCloud& tool, unsigned jobs = 1);

/// Score of an isotropic Gaussian on SE(3) around `target`:
/// log(g^-1 target) with rotation scaled by 1/sigma_rot^2 and translation by
/// 1/sigma_trans^2. Energy is D_g(g, target) with the given gamma.
ScoreField analytic_gaussian_score(const Pose& target, double sigma_rot,
                                   double sigma_trans, double gamma = 1.0);

/// Equal-weight mixture of such Gaussians; energy is the negative log density
/// up to a constant.
ScoreField analytic_mixture_score(std::span<const Pose> targets,
                                  double sigma_rot, double sigma_trans);

/// Tool pose standing `standoff` back from the crop centroid along frame.y,
/// oriented as the frame. Throws EmptyCrop.
Pose predict_tying_pose(const PointCloud& crop, const Frame& frame,
                        double standoff);

}  // namespace rebartie
