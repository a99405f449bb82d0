#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include "rebartie/clustering.hpp"
#include "rebartie/error.hpp"
#include "rebartie/scene.hpp"

namespace rebartie {
namespace {

// Quadratic DBSCAN written independently: full distance matrix, union-find
// over core-core links, border points to the nearest core neighbor.
struct Oracle {
  std::vector<bool> core;
  std::vector<int> component;  // -1 for noise
};

Oracle oracle_dbscan(const std::vector<Vec3>& pts, double eps, std::size_t min_pts) {
  const std::size_t n = pts.size();
  std::vector<std::vector<double>> d(n, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) d[i][j] = (pts[i] - pts[j]).norm();
  Oracle o;
  o.core.assign(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t c = 0;
    for (std::size_t j = 0; j < n; ++j) c += d[i][j] <= eps;
    o.core[i] = c >= min_pts;
  }
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (o.core[i] && o.core[j] && d[i][j] <= eps) parent[find(i)] = find(j);
  o.component.assign(n, -1);
  for (std::size_t i = 0; i < n; ++i) {
    if (o.core[i]) {
      o.component[i] = static_cast<int>(find(i));
      continue;
    }
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
      if (o.core[j] && d[i][j] <= eps && d[i][j] < best) {
        best = d[i][j];
        o.component[i] = static_cast<int>(find(j));
      }
    }
  }
  return o;
}

// True when the two labelings induce the same partition (noise must match).
bool same_partition(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size()) return false;
  std::map<int, int> ab, ba;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if ((a[i] < 0) != (b[i] < 0)) return false;
    if (a[i] < 0) continue;
    auto [it1, new1] = ab.emplace(a[i], b[i]);
    auto [it2, new2] = ba.emplace(b[i], a[i]);
    if (it1->second != b[i] || it2->second != a[i]) return false;
  }
  return true;
}

PointCloud blob(const Vec3& center, std::size_t n, double spread, Rng& rng) {
  std::normal_distribution<double> g(0.0, spread);
  PointCloud c;
  for (std::size_t i = 0; i < n; ++i) c.points.push_back(center + Vec3(g(rng), g(rng), g(rng)));
  return c;
}

PointCloud uniform_cloud(std::size_t n, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  PointCloud c;
  for (std::size_t i = 0; i < n; ++i) c.points.emplace_back(u(rng), u(rng), u(rng));
  return c;
}

TEST(Dbscan, TwoSeparatedBlobs) {
  Rng rng(1);
  PointCloud c = blob(Vec3::Zero(), 50, 0.003, rng);
  c.append(blob(Vec3(0.2, 0, 0), 50, 0.003, rng));
  const ClusterLabeling l = dbscan(c, {0.02, 5});
  EXPECT_EQ(l.n_clusters, 2);
  EXPECT_EQ(l.noise_count(), 0u);
  EXPECT_NE(l.labels[0], l.labels[50]);
}

TEST(Dbscan, IsolatedPointIsNoise) {
  PointCloud c;
  c.points = {Vec3::Zero()};
  const ClusterLabeling l = dbscan(c, {0.1, 2});
  EXPECT_EQ(l.labels[0], kNoise);
  EXPECT_EQ(l.n_clusters, 0);
}

TEST(Dbscan, EmptyAndInvalid) {
  EXPECT_THROW(dbscan(PointCloud{}, {0.1, 2}), Error);
  PointCloud c;
  c.points = {Vec3::Zero()};
  EXPECT_THROW(dbscan(c, {0.0, 2}), Error);
  EXPECT_THROW(dbscan(c, {0.1, 0}), Error);
}

TEST(Dbscan, MatchesBruteForceOracle) {
  Rng rng(2);
  std::uniform_int_distribution<std::size_t> size(20, 500), mp(2, 12);
  std::uniform_real_distribution<double> eps(0.03, 0.2);
  for (int inst = 0; inst < 100; ++inst) {
    const PointCloud c = uniform_cloud(size(rng), rng);
    const DbscanParams p{eps(rng), mp(rng)};
    const ClusterLabeling l = dbscan(c, p);
    const Oracle o = oracle_dbscan(c.points, p.eps, p.min_pts);
    for (std::size_t i = 0; i < c.size(); ++i) ASSERT_EQ(static_cast<bool>(l.core[i]), o.core[i]);
    ASSERT_TRUE(same_partition(l.labels, o.component)) << "instance " << inst;
    const ClusterLabeling brute = dbscan(c, p, NeighborSearch::kBruteForce);
    ASSERT_EQ(brute.labels, l.labels);
  }
}

TEST(Dbscan, ClusterIdsFollowLowestCoreIndex) {
  Rng rng(3);
  const PointCloud c = uniform_cloud(300, rng);
  const ClusterLabeling l = dbscan(c, {0.1, 4});
  int next = 0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (!l.core[i]) continue;
    ASSERT_LE(l.labels[i], next);
    if (l.labels[i] == next) ++next;
  }
  EXPECT_EQ(next, l.n_clusters);
}

TEST(Dbscan, IndependentOfInputOrder) {
  Rng rng(4);
  for (int inst = 0; inst < 20; ++inst) {
    const PointCloud c = uniform_cloud(400, rng);
    std::vector<std::size_t> perm(c.size());
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    const PointCloud shuffled = c.subset(perm);
    const ClusterLabeling a = dbscan(c, {0.09, 5}), b = dbscan(shuffled, {0.09, 5});
    std::vector<int> b_in_a_order(c.size());
    for (std::size_t k = 0; k < perm.size(); ++k) {
      b_in_a_order[perm[k]] = b.labels[k];
      EXPECT_EQ(a.core[perm[k]], b.core[k]);
    }
    EXPECT_TRUE(same_partition(a.labels, b_in_a_order));
  }
}

TEST(Dbscan, GrowingEpsKeepsCorePoints) {
  Rng rng(5);
  const PointCloud c = uniform_cloud(300, rng);
  const ClusterLabeling small = dbscan(c, {0.06, 5}), large = dbscan(c, {0.1, 5});
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (small.core[i]) EXPECT_TRUE(large.core[i]);
  }
}

TEST(Dbscan, MembersAreReachableFromCores) {
  Rng rng(6);
  const PointCloud c = uniform_cloud(300, rng);
  const DbscanParams p{0.1, 6};
  const ClusterLabeling l = dbscan(c, p);
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (l.labels[i] < 0 || l.core[i]) continue;
    bool reached = false;
    for (std::size_t j = 0; j < c.size(); ++j) {
      reached = reached || (l.core[j] && l.labels[j] == l.labels[i] &&
                            (c.points[i] - c.points[j]).norm() <= p.eps);
    }
    EXPECT_TRUE(reached);
  }
}

TEST(ReferenceCloud, Examples) {
  SceneSpec s;
  const Scene sc = generate_scene(s);
  const Pose at_node{UnitQuaternion::identity(), sc.truth.node_positions[0]};
  const PointCloud ref = extract_reference_cloud(sc.scene, at_node, s.grid.spacing / 2);
  EXPECT_GT(ref.size(), 0u);
  for (const Vec3& p : ref.points) EXPECT_LE((p - at_node.translation).norm(), s.grid.spacing / 2);
  EXPECT_EQ(extract_reference_cloud(sc.scene, at_node, 1e6).size(), sc.scene.size());
  const Pose far{UnitQuaternion::identity(), Vec3(100, 100, 100)};
  try {
    extract_reference_cloud(sc.scene, far, 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyReference);
  }
}

TEST(SelectCluster, ReferenceFromOneCluster) {
  Rng rng(7);
  PointCloud c = blob(Vec3::Zero(), 60, 0.003, rng);
  c.append(blob(Vec3(1, 0, 0), 60, 0.003, rng));
  c.append(blob(Vec3(0, 1, 0), 60, 0.003, rng));
  const ClusterLabeling l = dbscan(c, {0.02, 5});
  ASSERT_EQ(l.n_clusters, 3);
  for (int k = 0; k < 3; ++k) {
    const PointCloud ref = c.subset(l.members(k));
    EXPECT_EQ(select_rebar_cluster(c, l, ref, 0.02), k);
  }
}

TEST(SelectCluster, TieGoesToLowerId) {
  PointCloud c;
  c.points = {Vec3(0, 0, 0), Vec3(0.001, 0, 0), Vec3(1, 0, 0), Vec3(1.001, 0, 0)};
  const ClusterLabeling l = dbscan(c, {0.01, 2});
  ASSERT_EQ(l.n_clusters, 2);
  PointCloud ref;
  ref.points = {Vec3(0.0005, 0, 0), Vec3(1.0005, 0, 0)};
  EXPECT_EQ(select_rebar_cluster(c, l, ref, 0.01), 0);
}

TEST(SelectCluster, Errors) {
  PointCloud c;
  c.points = {Vec3(0, 0, 0), Vec3(0.001, 0, 0)};
  const ClusterLabeling l = dbscan(c, {0.01, 2});
  PointCloud far;
  far.points = {Vec3(5, 5, 5)};
  try {
    select_rebar_cluster(c, l, far, 0.01);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kAllZeroCounts);
  }
  const ClusterLabeling none = dbscan(c, {0.0001, 3});
  try {
    select_rebar_cluster(c, none, far, 0.01);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNoClusters);
  }
}

TEST(SelectCluster, InvariantUnderRelabeling) {
  Rng rng(8);
  PointCloud c = blob(Vec3::Zero(), 60, 0.003, rng);
  c.append(blob(Vec3(1, 0, 0), 80, 0.003, rng));
  const ClusterLabeling l = dbscan(c, {0.02, 5});
  PointCloud ref = blob(Vec3(1, 0, 0), 10, 0.003, rng);
  const int chosen = select_rebar_cluster(c, l, ref, 0.02);
  ClusterLabeling swapped = l;
  for (int& x : swapped.labels) {
    if (x >= 0) x = 1 - x;
  }
  EXPECT_EQ(select_rebar_cluster(c, swapped, ref, 0.02), 1 - chosen);
}

TEST(SelectCluster, PicksRebarAmongObstacles) {
  SceneSpec s;
  s.n_obstacles = 2;
  s.seed = 3;
  const Scene sc = generate_scene(s);
  const ClusterLabeling l = dbscan(sc.scene, {0.02, 10});
  const Pose near_node{UnitQuaternion::identity(), sc.truth.node_positions[0]};
  const PointCloud ref = extract_reference_cloud(sc.scene, near_node, 0.1);
  const int k = select_rebar_cluster(sc.scene, l, ref, 0.02);
  std::size_t bar = 0, total = 0;
  for (std::size_t i = 0; i < sc.scene.size(); ++i) {
    if (l.labels[i] != k) continue;
    ++total;
    bar += sc.point_source[i] != kObstacleSource;
  }
  EXPECT_EQ(bar, total);
  EXPECT_GT(total, sc.scene.size() / 2);
}

}  // namespace
}  // namespace rebartie
