#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "rebartie/point_cloud.hpp"
#include "rebartie/se3.hpp"

namespace rebartie {

inline constexpr int kNoise = -1;

struct DbscanParams {
  double eps = 0.02;
  std::size_t min_pts = 10;  // neighborhood size including the point itself

  void validate() const;
};

struct ClusterLabeling {
  std::vector<int> labels;  // cluster id in [0, n_clusters) or kNoise
  int n_clusters = 0;
  std::vector<std::uint8_t> core;

  std::vector<std::size_t> cluster_sizes() const;
  std::size_t noise_count() const;
  std::vector<std::size_t> members(int cluster) const;
};

enum class NeighborSearch { kKdTree, kBruteForce };

/// Density clustering. Clusters are the connected components of core points;
/// ids follow the lowest core index of each component. A border point joins
/// the cluster of its nearest core neighbor (ties: lower index).
ClusterLabeling dbscan(const PointCloud& cloud, const DbscanParams& params,
                       NeighborSearch search = NeighborSearch::kKdTree);

/// Points of `scene` within `radius` of `pose_prev.translation`. Throws
/// EmptyReference when there are none.
PointCloud extract_reference_cloud(const PointCloud& scene,
                                   const Pose& pose_prev, double radius);

/// Cluster with the most reference points that have at least one member
/// within `search_radius`. Ties go to the lower id. Throws NoClusters or
/// AllZeroCounts.
int select_rebar_cluster(const PointCloud& cloud,
                         const ClusterLabeling& labeling,
                         const PointCloud& reference, double search_radius);

/// Per-cluster hit counts used by select_rebar_cluster.
std::vector<std::size_t> reference_hit_counts(const PointCloud& cloud,
                                              const ClusterLabeling& labeling,
                                              const PointCloud& reference,
                                              double search_radius);

}  // namespace rebartie
