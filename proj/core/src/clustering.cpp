#include "rebartie/clustering.hpp"

#include <cmath>
#include <deque>
#include <limits>

#include "rebartie/error.hpp"
#include "rebartie/kdtree.hpp"

namespace rebartie {

namespace {

class Neighbors {
 public:
  Neighbors(const PointCloud& cloud, double eps, NeighborSearch search)
      : cloud_(cloud), eps_(eps), brute_(search == NeighborSearch::kBruteForce) {
    if (!brute_) tree_ = KdTree(cloud.points);
  }

  void query(std::size_t i, std::vector<std::size_t>& out) const {
    if (!brute_) {
      tree_.radius_search(cloud_.points[i], eps_, out);
      return;
    }
    out.clear();
    const Vec3& p = cloud_.points[i];
    for (std::size_t j = 0; j < cloud_.size(); ++j) {
      if ((cloud_.points[j] - p).norm() <= eps_) out.push_back(j);
    }
  }

 private:
  const PointCloud& cloud_;
  double eps_;
  bool brute_;
  KdTree tree_;
};

}  // namespace

void DbscanParams::validate() const {
  if (!(eps > 0.0) || !std::isfinite(eps) || min_pts < 1) {
    throw Error(ErrorCode::kInvalidParams, "dbscan requires eps > 0 and min_pts >= 1");
  }
}

std::vector<std::size_t> ClusterLabeling::cluster_sizes() const {
  std::vector<std::size_t> sizes(static_cast<std::size_t>(n_clusters), 0);
  for (int l : labels) {
    if (l >= 0) ++sizes[static_cast<std::size_t>(l)];
  }
  return sizes;
}

std::size_t ClusterLabeling::noise_count() const {
  std::size_t n = 0;
  for (int l : labels) n += (l == kNoise);
  return n;
}

std::vector<std::size_t> ClusterLabeling::members(int cluster) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == cluster) out.push_back(i);
  }
  return out;
}

ClusterLabeling dbscan(const PointCloud& cloud, const DbscanParams& params,
                       NeighborSearch search) {
  params.validate();
  const std::size_t n = cloud.size();
  ClusterLabeling out;
  out.labels.assign(n, kNoise);
  out.core.assign(n, 0);
  if (n == 0) throw Error(ErrorCode::kEmptyCloud, "dbscan input is empty");

  const Neighbors nb(cloud, params.eps, search);
  std::vector<std::size_t> scratch;
  for (std::size_t i = 0; i < n; ++i) {
    nb.query(i, scratch);
    out.core[i] = scratch.size() >= params.min_pts;
  }

  std::deque<std::size_t> frontier;
  for (std::size_t seed = 0; seed < n; ++seed) {
    if (!out.core[seed] || out.labels[seed] != kNoise) continue;
    const int id = out.n_clusters++;
    out.labels[seed] = id;
    frontier.push_back(seed);
    while (!frontier.empty()) {
      const std::size_t p = frontier.front();
      frontier.pop_front();
      nb.query(p, scratch);
      for (std::size_t q : scratch) {
        if (out.core[q] && out.labels[q] == kNoise) {
          out.labels[q] = id;
          frontier.push_back(q);
        }
      }
    }
  }

  for (std::size_t i = 0; i < n; ++i) {
    if (out.core[i]) continue;
    nb.query(i, scratch);
    double best = std::numeric_limits<double>::infinity();
    int label = kNoise;
    for (std::size_t q : scratch) {  // ascending, so strict < keeps lower index
      if (!out.core[q]) continue;
      const double d = (cloud.points[q] - cloud.points[i]).norm();
      if (d < best) {
        best = d;
        label = out.labels[q];
      }
    }
    out.labels[i] = label;
  }
  return out;
}

PointCloud extract_reference_cloud(const PointCloud& scene,
                                   const Pose& pose_prev, double radius) {
  if (!(radius > 0.0)) throw Error(ErrorCode::kInvalidParams, "radius must be > 0");
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < scene.size(); ++i) {
    if ((scene.points[i] - pose_prev.translation).norm() <= radius) idx.push_back(i);
  }
  if (idx.empty()) {
    throw Error(ErrorCode::kEmptyReference, "no scene point within the reference radius");
  }
  return scene.subset(idx);
}

std::vector<std::size_t> reference_hit_counts(const PointCloud& cloud,
                                              const ClusterLabeling& labeling,
                                              const PointCloud& reference,
                                              double search_radius) {
  if (!(search_radius > 0.0)) {
    throw Error(ErrorCode::kInvalidParams, "search_radius must be > 0");
  }
  if (labeling.labels.size() != cloud.size()) {
    throw Error(ErrorCode::kShapeMismatch, "labeling does not match the cloud");
  }
  std::vector<std::size_t> counts(static_cast<std::size_t>(labeling.n_clusters), 0);
  if (cloud.empty()) return counts;
  const KdTree tree(cloud.points);
  std::vector<std::size_t> hits;
  std::vector<std::uint8_t> seen(counts.size(), 0);
  for (const Vec3& r : reference.points) {
    tree.radius_search(r, search_radius, hits);
    std::fill(seen.begin(), seen.end(), 0);
    for (std::size_t h : hits) {
      const int l = labeling.labels[h];
      if (l >= 0 && !seen[static_cast<std::size_t>(l)]) {
        seen[static_cast<std::size_t>(l)] = 1;
        ++counts[static_cast<std::size_t>(l)];
      }
    }
  }
  return counts;
}

int select_rebar_cluster(const PointCloud& cloud,
                         const ClusterLabeling& labeling,
                         const PointCloud& reference, double search_radius) {
  if (labeling.n_clusters == 0) throw Error(ErrorCode::kNoClusters, "labeling has no clusters");
  const auto counts = reference_hit_counts(cloud, labeling, reference, search_radius);
  int best = 0;
  for (int c = 1; c < labeling.n_clusters; ++c) {
    if (counts[static_cast<std::size_t>(c)] > counts[static_cast<std::size_t>(best)]) best = c;
  }
  if (counts[static_cast<std::size_t>(best)] == 0) {
    throw Error(ErrorCode::kAllZeroCounts, "no reference point is near any cluster");
  }
  return best;
}

}  // namespace rebartie
