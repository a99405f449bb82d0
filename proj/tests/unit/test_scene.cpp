#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rebartie/error.hpp"
#include "rebartie/scene.hpp"

namespace rebartie {
namespace {

double distance_to_line(const Vec3& p, const Vec3& origin, const Vec3& dir) {
  const Vec3 d = p - origin;
  return (d - d.dot(dir) * dir).norm();
}

// Distance from a local-frame point to the nearest bar surface, rebuilt from
// the grid description alone.
double distance_to_nearest_bar_surface(const Vec3& p, const RebarGridSpec& g) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t l = 0; l < g.layers; ++l) {
    const double y = (l - 0.5 * (g.layers - 1.0)) * g.spacing;
    for (std::size_t i = 0; i < g.rows; ++i) {
      const double z = (i - 0.5 * (g.rows - 1.0)) * g.spacing;
      best = std::min(best, std::abs(distance_to_line(p, Vec3(0, y - g.bar_radius, z),
                                                      Vec3::UnitX()) - g.bar_radius));
    }
    for (std::size_t j = 0; j < g.cols; ++j) {
      const double x = (j - 0.5 * (g.cols - 1.0)) * g.spacing;
      best = std::min(best, std::abs(distance_to_line(p, Vec3(x, y + g.bar_radius, 0),
                                                      Vec3::UnitZ()) - g.bar_radius));
    }
  }
  return best;
}

TEST(GenerateBar, PointsLieOnSurface) {
  Rng rng(1);
  const Vec3 origin(0.3, -1.0, 2.0), dir = Vec3(1, 2, -2).normalized();
  const PointCloud bar = generate_bar(origin, dir, 0.8, 0.01, 1000, rng);
  for (const Vec3& p : bar.points) {
    EXPECT_NEAR(distance_to_line(p, origin, dir), 0.01, 1e-9);
    const double t = (p - origin).dot(dir);
    EXPECT_GE(t, -1e-12);
    EXPECT_LE(t, 0.8 + 1e-12);
  }
}

TEST(GenerateBar, CountMatchesDensity) {
  Rng rng(2);
  const auto n = generate_bar(Vec3::Zero(), Vec3::UnitX(), 1.0, 0.006, 1000, rng).size();
  EXPECT_GE(n, 999u);
  EXPECT_LE(n, 1001u);
}

TEST(GenerateBar, SameSeedSameCloud) {
  Rng a(3), b(3);
  const PointCloud ca = generate_bar(Vec3::Zero(), Vec3::UnitZ(), 0.5, 0.006, 500, a);
  const PointCloud cb = generate_bar(Vec3::Zero(), Vec3::UnitZ(), 0.5, 0.006, 500, b);
  EXPECT_EQ(ca.points, cb.points);
}

TEST(GenerateBar, RejectsNonUnitAxis) {
  Rng rng(4);
  try {
    generate_bar(Vec3::Zero(), Vec3(1.0, 0.0, 1e-2), 1.0, 0.01, 100, rng);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDegenerateAxis);
  }
}

TEST(AddGaussianNoise, ZeroSigmaIsIdentity) {
  Rng rng(5);
  PointCloud c;
  c.points = {Vec3(1, 2, 3), Vec3(4, 5, 6)};
  EXPECT_EQ(add_gaussian_noise(c, 0.0, rng).points, c.points);
  EXPECT_THROW(add_gaussian_noise(c, -1.0, rng), Error);
}

TEST(AddGaussianNoise, SampleStdMatches) {
  PointCloud c;
  c.points.assign(100000, Vec3(1.0, -2.0, 0.5));
  Rng rng(6);
  const PointCloud n = add_gaussian_noise(c, 0.5, rng);
  for (int axis = 0; axis < 3; ++axis) {
    double sum = 0, sq = 0;
    for (std::size_t i = 0; i < n.size(); ++i) {
      const double d = n.points[i][axis] - c.points[i][axis];
      sum += d;
      sq += d * d;
    }
    const double mean = sum / n.size();
    const double sd = std::sqrt(sq / n.size() - mean * mean);
    EXPECT_NEAR(sd / 0.5, 1.0, 0.02);
  }
  Rng r1(7), r2(7);
  EXPECT_EQ(add_gaussian_noise(c, 0.1, r1).points, add_gaussian_noise(c, 0.1, r2).points);
}

TEST(GenerateScene, NodeCounts) {
  for (auto [rows, cols, layers] : {std::tuple{2, 2, 1}, {6, 6, 1}, {2, 4, 1}, {3, 2, 2}}) {
    SceneSpec s;
    s.grid.rows = rows;
    s.grid.cols = cols;
    s.grid.layers = layers;
    const Scene sc = generate_scene(s);
    EXPECT_EQ(sc.truth.node_positions.size(), static_cast<std::size_t>(rows * cols * layers));
    EXPECT_EQ(sc.truth.tying_poses.size(), sc.truth.node_positions.size());
    std::vector<std::size_t> sorted = sc.truth.canonical_order;
    std::sort(sorted.begin(), sorted.end());
    std::vector<std::size_t> iota(sorted.size());
    std::iota(iota.begin(), iota.end(), std::size_t{0});
    EXPECT_EQ(sorted, iota);
  }
}

TEST(GenerateScene, CleanBarPointsLieOnBarSurfaces) {
  SceneSpec s;
  s.grid.rows = 3;
  s.grid.cols = 2;
  s.grid.layers = 2;
  s.grid.scene_pose = {UnitQuaternion(0.9, 0.1, -0.2, 0.3), Vec3(0.5, 1.2, -0.3)};
  s.n_obstacles = 2;
  s.seed = 11;
  const Scene sc = generate_scene(s);
  ASSERT_EQ(sc.point_source.size(), sc.scene.size());
  const Pose inv = s.grid.scene_pose.inverse();
  std::size_t bar_points = 0;
  for (std::size_t i = 0; i < sc.scene.size(); ++i) {
    if (sc.point_source[i] == kObstacleSource) continue;
    ++bar_points;
    EXPECT_LT(distance_to_nearest_bar_surface(inv.apply(sc.scene.points[i]), s.grid), 1e-9);
  }
  EXPECT_GT(bar_points, 0u);
}

TEST(GenerateScene, NodesAreNearCleanPoints) {
  SceneSpec s;
  s.grid.rows = 4;
  s.grid.cols = 4;
  const Scene sc = generate_scene(s);
  const double limit = s.grid.bar_radius * std::sqrt(2.0);
  for (const Vec3& n : sc.truth.node_positions) {
    double best = std::numeric_limits<double>::infinity();
    for (const Vec3& p : sc.scene.points) best = std::min(best, (p - n).norm());
    EXPECT_LE(best, limit);
  }
}

TEST(GenerateScene, ObstaclesKeepTheirDistance) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    SceneSpec s;
    s.grid.rows = 2;
    s.grid.cols = 4;
    s.n_obstacles = 4;
    s.seed = seed;
    const Scene sc = generate_scene(s);
    std::size_t obstacle_points = 0;
    for (std::size_t i = 0; i < sc.scene.size(); ++i) {
      if (sc.point_source[i] != kObstacleSource) continue;
      ++obstacle_points;
      for (const Vec3& n : sc.truth.node_positions) {
        EXPECT_GE((sc.scene.points[i] - n).norm(), 2.0 * s.grid.spacing);
      }
    }
    EXPECT_GT(obstacle_points, 0u);
  }
}

TEST(GenerateScene, Deterministic) {
  SceneSpec s;
  s.n_obstacles = 3;
  s.noise_sigma_max = 0.005;
  s.seed = 77;
  const Scene a = generate_scene(s), b = generate_scene(s);
  EXPECT_EQ(a.scene.points, b.scene.points);
  EXPECT_EQ(a.truth.node_positions, b.truth.node_positions);
  EXPECT_EQ(a.truth.noise_sigma, b.truth.noise_sigma);
  s.seed = 78;
  EXPECT_NE(generate_scene(s).scene.points, a.scene.points);
}

TEST(GenerateScene, TruthPosesStandOffAlongApproach) {
  SceneSpec s;
  s.grid.scene_pose = {UnitQuaternion::from_axis_angle(Vec3::UnitZ(), 0.4), Vec3(0, 1, 0)};
  const Scene sc = generate_scene(s);
  const Vec3 approach = s.grid.scene_pose.rotation.rotate(Vec3::UnitY());
  for (std::size_t i = 0; i < sc.truth.tying_poses.size(); ++i) {
    const Pose& p = sc.truth.tying_poses[i];
    EXPECT_LT((p.translation + s.standoff * approach - sc.truth.node_positions[i]).norm(), 1e-12);
    EXPECT_LT((p.rotation.rotate(Vec3::UnitY()) - approach).norm(), 1e-12);
  }
}

TEST(GenerateScene, CanonicalOrderFollowsLocalAxes) {
  SceneSpec s;
  s.grid.rows = 3;
  s.grid.cols = 3;
  s.grid.layers = 2;
  const Scene sc = generate_scene(s);
  const Pose inv = s.grid.scene_pose.inverse();
  for (std::size_t k = 1; k < sc.truth.canonical_order.size(); ++k) {
    const Vec3 a = inv.apply(sc.truth.node_positions[sc.truth.canonical_order[k - 1]]);
    const Vec3 b = inv.apply(sc.truth.node_positions[sc.truth.canonical_order[k]]);
    const auto key = [](const Vec3& v) {
      return std::tuple(std::lround(-v.y() * 1e6), std::lround(v.z() * 1e6), std::lround(v.x() * 1e6));
    };
    EXPECT_LT(key(a), key(b));
  }
}

TEST(GenerateScene, RejectsInvalidSpecs) {
  SceneSpec s;
  s.grid.spacing = 0.01;  // < 2 * bar_radius
  EXPECT_THROW(generate_scene(s), Error);
  s = SceneSpec{};
  s.grid.rows = 0;
  EXPECT_THROW(generate_scene(s), Error);
  s = SceneSpec{};
  s.noise_sigma_min = 0.2;
  s.noise_sigma_max = 0.1;
  EXPECT_THROW(generate_scene(s), Error);
}

TEST(ToolTemplate, FixedAndBehindTheOrigin) {
  const PointCloud a = tool_template(), b = tool_template();
  EXPECT_EQ(a.points, b.points);
  EXPECT_GT(a.size(), 100u);
  for (const Vec3& p : a.points) EXPECT_LE(p.y(), 1e-12);
}

}  // namespace
}  // namespace rebartie
