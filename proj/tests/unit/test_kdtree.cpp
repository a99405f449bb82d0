#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "rebartie/kdtree.hpp"

namespace rebartie {
namespace {

std::vector<Vec3> random_points(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Vec3> pts;
  for (std::size_t i = 0; i < n; ++i) pts.emplace_back(u(rng), u(rng), u(rng));
  return pts;
}

TEST(KdTree, RadiusSearchMatchesBruteForce) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto pts = random_points(2000, seed);
    const KdTree tree(pts, 8);
    Rng rng(seed + 100);
    std::uniform_real_distribution<double> u(-1.2, 1.2), r(0.01, 0.4);
    for (int q = 0; q < 50; ++q) {
      const Vec3 query(u(rng), u(rng), u(rng));
      const double radius = r(rng);
      std::vector<std::size_t> expected;
      for (std::size_t i = 0; i < pts.size(); ++i) {
        if ((pts[i] - query).norm() <= radius) expected.push_back(i);
      }
      EXPECT_EQ(tree.radius_search(query, radius), expected);
      EXPECT_EQ(tree.radius_count(query, radius), expected.size());
      EXPECT_EQ(tree.any_within(query, radius), !expected.empty());
    }
  }
}

TEST(KdTree, NearestMatchesBruteForce) {
  const auto pts = random_points(1500, 42);
  const KdTree tree(pts);
  Rng rng(7);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  for (int q = 0; q < 200; ++q) {
    const Vec3 query(u(rng), u(rng), u(rng));
    std::size_t best = 0;
    for (std::size_t i = 1; i < pts.size(); ++i) {
      if ((pts[i] - query).norm() < (pts[best] - query).norm()) best = i;
    }
    const auto [idx, dist] = tree.nearest(query);
    EXPECT_EQ(idx, best);
    EXPECT_DOUBLE_EQ(dist, (pts[best] - query).norm());
  }
}

TEST(KdTree, HandlesDuplicatesAndEmpty) {
  std::vector<Vec3> pts(100, Vec3(0.5, 0.5, 0.5));
  const KdTree tree(pts);
  EXPECT_EQ(tree.radius_search(Vec3(0.5, 0.5, 0.5), 0.0).size(), 100u);
  const KdTree empty(std::vector<Vec3>{});
  EXPECT_TRUE(empty.radius_search(Vec3::Zero(), 1.0).empty());
  EXPECT_FALSE(empty.any_within(Vec3::Zero(), 1.0));
}

}  // namespace
}  // namespace rebartie
