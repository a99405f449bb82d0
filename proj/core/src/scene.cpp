#include "rebartie/scene.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <limits>
#include <numeric>
#include <string>

#include "rebartie/error.hpp"

namespace rebartie {

namespace {

constexpr Rgb kBarColor{150, 85, 55};
constexpr Rgb kObstacleColor{90, 110, 160};
constexpr Rgb kToolColor{230, 200, 40};

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::kSpecInvalid, what);
}

double extent(std::size_t n, double spacing) {
  return static_cast<double>(n - 1) * spacing;
}

PointCloud sample_box(const Vec3& center, const Vec3& size, double density,
                      Rng& rng) {
  const double ax = size.y() * size.z(), ay = size.x() * size.z(),
               az = size.x() * size.y();
  const double area = 2.0 * (ax + ay + az);
  const auto n = static_cast<std::size_t>(std::llround(density * area));
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  std::uniform_real_distribution<double> pick(0.0, area / 2.0);
  std::bernoulli_distribution side(0.5);
  PointCloud out;
  out.points.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Vec3 p(u(rng), u(rng), u(rng));
    const double f = pick(rng);
    const int axis = f < ax ? 0 : (f < ax + ay ? 1 : 2);
    p[axis] = side(rng) ? 0.5 : -0.5;
    out.points.push_back(center + p.cwiseProduct(size));
  }
  return out;
}

PointCloud sample_sphere(const Vec3& center, double radius, double density,
                         Rng& rng) {
  const double area = 4.0 * std::numbers::pi * radius * radius;
  const auto n = static_cast<std::size_t>(std::llround(density * area));
  std::normal_distribution<double> normal(0.0, 1.0);
  PointCloud out;
  out.points.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Vec3 d(normal(rng), normal(rng), normal(rng));
    const double len = d.norm();
    if (len == 0.0) d = Vec3::UnitZ(); else d /= len;
    out.points.push_back(center + radius * d);
  }
  return out;
}

void paint(PointCloud& cloud, const Rgb& color) {
  cloud.colors = std::vector<Rgb>(cloud.size(), color);
}

}  // namespace

void RebarGridSpec::validate() const {
  require(rows >= 1 && cols >= 1 && layers >= 1, "rows, cols, layers must be >= 1");
  require(std::isfinite(spacing) && std::isfinite(bar_radius) &&
              std::isfinite(bar_length) && std::isfinite(points_per_meter),
          "grid parameters must be finite");
  require(bar_radius > 0.0, "bar_radius must be > 0");
  require(spacing > 2.0 * bar_radius, "spacing must exceed 2 * bar_radius");
  require(points_per_meter > 0.0, "points_per_meter must be > 0");
  require(bar_length >= 0.0, "bar_length must be >= 0");
  if (bar_length > 0.0) {
    const double needed =
        std::max(extent(rows, spacing), extent(cols, spacing)) + 2.0 * bar_radius;
    require(bar_length >= needed, "bar_length shorter than the grid extent");
  }
  require(scene_pose.translation.allFinite(), "scene_pose must be finite");
}

void SceneSpec::validate() const {
  grid.validate();
  require(noise_sigma_min >= 0.0 && noise_sigma_max >= noise_sigma_min,
          "noise range must satisfy 0 <= min <= max");
  require(obstacle_size_min > 0.0 && obstacle_size_max >= obstacle_size_min,
          "obstacle size range must satisfy 0 < min <= max");
  require(obstacle_points_per_m2 > 0.0, "obstacle density must be > 0");
  require(standoff >= 0.0 && std::isfinite(standoff), "standoff must be >= 0");
}

PointCloud generate_bar(const Vec3& axis_origin, const Vec3& axis_dir,
                        double length, double radius, double density, Rng& rng) {
  if (std::abs(axis_dir.norm() - 1.0) > 1e-6) {
    throw Error(ErrorCode::kDegenerateAxis, "axis_dir must be a unit vector");
  }
  if (!(length > 0.0) || !(radius > 0.0) || !(density > 0.0)) {
    throw Error(ErrorCode::kInvalidParams, "length, radius, density must be > 0");
  }
  const Vec3 d = axis_dir.normalized();
  const Vec3 helper = std::abs(d.z()) < 0.9 ? Vec3::UnitZ() : Vec3::UnitX();
  const Vec3 a = d.cross(helper).normalized();
  const Vec3 b = d.cross(a);
  const auto n = static_cast<std::size_t>(std::llround(density * length));
  std::uniform_real_distribution<double> along(0.0, length);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  PointCloud out;
  out.points.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = along(rng);
    const double th = angle(rng);
    out.points.push_back(axis_origin + t * d +
                         radius * (std::cos(th) * a + std::sin(th) * b));
  }
  return out;
}

PointCloud add_gaussian_noise(const PointCloud& cloud, double sigma, Rng& rng) {
  if (!(sigma >= 0.0)) throw Error(ErrorCode::kInvalidParams, "sigma must be >= 0");
  if (sigma == 0.0) return cloud;
  PointCloud out = cloud;
  std::normal_distribution<double> normal(0.0, sigma);
  for (Vec3& p : out.points) {
    p += Vec3(normal(rng), normal(rng), normal(rng));
  }
  return out;
}

PointCloud tool_template() {
  PointCloud tool;
  // Nozzle: cylinder of radius 1 cm along +y ending at the tool origin.
  constexpr int kRings = 16, kSegments = 12;
  for (int i = 0; i < kRings; ++i) {
    const double y = -0.08 + 0.08 * i / (kRings - 1);
    for (int j = 0; j < kSegments; ++j) {
      const double th = 2.0 * std::numbers::pi * j / kSegments;
      tool.points.emplace_back(0.01 * std::cos(th), y, 0.01 * std::sin(th));
    }
  }
  // Body: box behind the nozzle, sampled on a regular lattice of its faces.
  const Vec3 lo(-0.03, -0.2, -0.05), hi(0.03, -0.08, 0.05);
  constexpr int kGrid = 6;
  for (int axis = 0; axis < 3; ++axis) {
    const int u = (axis + 1) % 3, v = (axis + 2) % 3;
    for (double face : {lo[axis], hi[axis]}) {
      for (int a = 0; a < kGrid; ++a) {
        for (int b = 0; b < kGrid; ++b) {
          Vec3 p;
          p[axis] = face;
          p[u] = lo[u] + (hi[u] - lo[u]) * a / (kGrid - 1);
          p[v] = lo[v] + (hi[v] - lo[v]) * b / (kGrid - 1);
          tool.points.push_back(p);
        }
      }
    }
  }
  paint(tool, kToolColor);
  return tool;
}

Scene generate_scene(const SceneSpec& spec) {
  spec.validate();
  const RebarGridSpec& g = spec.grid;
  Rng rng(spec.seed);

  std::uniform_real_distribution<double> sigma_dist(spec.noise_sigma_min,
                                                    spec.noise_sigma_max);
  const double sigma = spec.noise_sigma_max > spec.noise_sigma_min
                           ? sigma_dist(rng)
                           : spec.noise_sigma_min;

  const double s = g.spacing, r = g.bar_radius;
  auto centered = [s](std::size_t i, std::size_t n) {
    return (static_cast<double>(i) - 0.5 * static_cast<double>(n - 1)) * s;
  };
  const double len_x = g.bar_length > 0.0 ? g.bar_length : extent(g.cols, s) + s;
  const double len_z = g.bar_length > 0.0 ? g.bar_length : extent(g.rows, s) + s;

  Scene out;
  PointCloud local;
  std::vector<Vec3> nodes_local;
  std::int32_t bar_id = 0;
  for (std::size_t l = 0; l < g.layers; ++l) {
    const double y = centered(l, g.layers);
    // Horizontal bars sit in front (toward the tool), vertical bars behind;
    // the bars touch at each node.
    for (std::size_t i = 0; i < g.rows; ++i) {
      const Vec3 start(-0.5 * len_x, y - r, centered(i, g.rows));
      PointCloud bar = generate_bar(start, Vec3::UnitX(), len_x, r, g.points_per_meter, rng);
      out.point_source.insert(out.point_source.end(), bar.size(), bar_id++);
      local.append(bar);
    }
    for (std::size_t j = 0; j < g.cols; ++j) {
      const Vec3 start(centered(j, g.cols), y + r, -0.5 * len_z);
      PointCloud bar = generate_bar(start, Vec3::UnitZ(), len_z, r, g.points_per_meter, rng);
      out.point_source.insert(out.point_source.end(), bar.size(), bar_id++);
      local.append(bar);
    }
    for (std::size_t i = 0; i < g.rows; ++i) {
      for (std::size_t j = 0; j < g.cols; ++j) {
        nodes_local.emplace_back(centered(j, g.cols), y, centered(i, g.rows));
      }
    }
  }
  paint(local, kBarColor);

  if (spec.n_obstacles > 0) {
    Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
    Vec3 hi = -lo;
    for (const Vec3& n : nodes_local) {
      lo = lo.cwiseMin(n);
      hi = hi.cwiseMax(n);
    }
    const Vec3 margin(3.0 * s, s, 3.0 * s);
    std::uniform_real_distribution<double> ux(lo.x() - margin.x(), hi.x() + margin.x());
    std::uniform_real_distribution<double> uy(lo.y() - margin.y(), hi.y() + margin.y());
    std::uniform_real_distribution<double> uz(lo.z() - margin.z(), hi.z() + margin.z());
    std::uniform_real_distribution<double> size(spec.obstacle_size_min, spec.obstacle_size_max);
    std::bernoulli_distribution is_box(0.5);
    const double min_sep = 2.0 * s;
    constexpr int kMaxAttempts = 1000;
    for (std::size_t k = 0; k < spec.n_obstacles; ++k) {
      bool placed = false;
      for (int attempt = 0; attempt < kMaxAttempts && !placed; ++attempt) {
        const Vec3 c(ux(rng), uy(rng), uz(rng));
        PointCloud obstacle;
        if (is_box(rng)) {
          const Vec3 dims(size(rng), size(rng), size(rng));
          obstacle = sample_box(c, dims, spec.obstacle_points_per_m2, rng);
        } else {
          obstacle = sample_sphere(c, 0.5 * size(rng), spec.obstacle_points_per_m2, rng);
        }
        const bool clear = std::all_of(
            obstacle.points.begin(), obstacle.points.end(), [&](const Vec3& p) {
              return std::all_of(nodes_local.begin(), nodes_local.end(),
                                 [&](const Vec3& n) { return (p - n).norm() >= min_sep; });
            });
        if (!clear || obstacle.empty()) continue;
        paint(obstacle, kObstacleColor);
        out.point_source.insert(out.point_source.end(), obstacle.size(), kObstacleSource);
        local.append(obstacle);
        placed = true;
      }
      require(placed, "could not place obstacle " + std::to_string(k) +
                          " at least 2*spacing away from every node");
    }
  }

  local = add_gaussian_noise(local, sigma, rng);
  out.scene = apply_rigid_transform(local, g.scene_pose);
  out.tool = tool_template();

  GroundTruth& truth = out.truth;
  truth.noise_sigma = sigma;
  const Vec3 approach = g.scene_pose.rotation.rotate(Vec3::UnitY());
  truth.up_axis = g.scene_pose.rotation.rotate(Vec3::UnitZ());
  for (const Vec3& n : nodes_local) {
    const Vec3 world = g.scene_pose.apply(n);
    truth.node_positions.push_back(world);
    truth.tying_poses.push_back({g.scene_pose.rotation, world - spec.standoff * approach});
  }
  // Node index = (layer * rows + row) * cols + col. Tying order: far layer
  // first (-y), then bottom row first (+z), then left to right (+x).
  truth.canonical_order.resize(nodes_local.size());
  std::iota(truth.canonical_order.begin(), truth.canonical_order.end(), std::size_t{0});
  std::stable_sort(truth.canonical_order.begin(), truth.canonical_order.end(),
                   [&](std::size_t a, std::size_t b) {
                     const std::size_t per_layer = g.rows * g.cols;
                     const std::size_t la = a / per_layer, lb = b / per_layer;
                     if (la != lb) return la > lb;
                     return (a % per_layer) < (b % per_layer);
                   });
  return out;
}

}  // namespace rebartie
