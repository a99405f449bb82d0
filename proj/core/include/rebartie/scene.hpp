#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "rebartie/point_cloud.hpp"
#include "rebartie/se3.hpp"

namespace rebartie {

/// Orthogonal rebar mesh in its local frame: horizontal bars run along +x,
/// vertical bars along +z, and layers are stacked along +y, the approach
/// direction of the tying tool. `scene_pose` places the local frame in the
/// world.
struct RebarGridSpec {
  std::size_t rows = 2;    // horizontal bars per layer
  std::size_t cols = 2;    // vertical bars per layer
  std::size_t layers = 1;
  double spacing = 0.2;
  double bar_radius = 0.006;
  // 0 selects each bar's grid extent plus one spacing.
  double bar_length = 0.0;
  double points_per_meter = 1500.0;
  Pose scene_pose{UnitQuaternion::identity(), Vec3(0.0, 1.0, 0.0)};

  std::size_t node_count() const { return rows * cols * layers; }
  void validate() const;
};

struct SceneSpec {
  RebarGridSpec grid;
  // Per-scene noise std is drawn uniformly from [noise_sigma_min, noise_sigma_max].
  double noise_sigma_min = 0.0;
  double noise_sigma_max = 0.0;
  std::size_t n_obstacles = 0;
  // Box edge lengths / sphere diameters.
  double obstacle_size_min = 0.05;
  double obstacle_size_max = 0.15;
  double obstacle_points_per_m2 = 15000.0;
  double standoff = 0.15;
  std::uint64_t seed = 0;

  void validate() const;
};

struct GroundTruth {
  std::vector<Vec3> node_positions;
  std::vector<Pose> tying_poses;
  // canonical_order[k] is the index of the k-th node to tie.
  std::vector<std::size_t> canonical_order;
  Vec3 up_axis = Vec3::UnitZ();
  double noise_sigma = 0.0;
};

inline constexpr std::int32_t kObstacleSource = -1;

struct Scene {
  PointCloud scene;
  PointCloud tool;
  GroundTruth truth;
  // Per scene point: bar index (>= 0) or kObstacleSource.
  std::vector<std::int32_t> point_source;
};

/// Cylinder surface samples around the segment
/// [axis_origin, axis_origin + length * axis_dir]; round(density * length)
/// points.
PointCloud generate_bar(const Vec3& axis_origin, const Vec3& axis_dir,
                        double length, double radius, double density, Rng& rng);

PointCloud add_gaussian_noise(const PointCloud& cloud, double sigma, Rng& rng);

/// Fixed template of the tying-gun tip in the tool frame (forward = +y).
PointCloud tool_template();

Scene generate_scene(const SceneSpec& spec);

}  // namespace rebartie
