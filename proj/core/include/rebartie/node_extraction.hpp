#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "rebartie/clustering.hpp"
#include "rebartie/kdtree.hpp"
#include "rebartie/point_cloud.hpp"

namespace rebartie {

/// Orthogonal feature filter. Neighbor direction vectors are shuffled, split
/// into two halves and paired; D holds |cos| of each pair. A point passes when
/// at least half of D is below r_res (some pairs near-orthogonal) and at least
/// a third of D is above p_res (some pairs near-parallel).
struct OrthoFilterParams {
  double r_eps = 0.08;
  double r_res = 0.6;
  double p_res = 0.75;
  std::size_t min_neighbors = 10;
  std::uint64_t rng_seed = 0;

  void validate() const;
};

using Mask = std::vector<std::uint8_t>;

/// Filter decision for one point. `tree` must index `cloud.points`.
bool orthogonal_feature_test(const PointCloud& cloud, const KdTree& tree,
                             std::size_t index,
                             const OrthoFilterParams& params);

/// Per-point decisions, independent of `jobs`.
Mask orthogonal_feature_mask(const PointCloud& cloud,
                             const OrthoFilterParams& params,
                             unsigned jobs = 1);

struct Node {
  Vec3 centroid = Vec3::Zero();
  PointCloud members;  // surviving points of this node
  PointCloud crop;     // input points within crop_radius of the centroid
};

struct NodeSet {
  std::vector<Node> nodes;

  std::size_t size() const { return nodes.size(); }
  std::vector<Vec3> centroids() const;
};

/// Line-support check for node candidates. Bar crossings have many neighbor
/// directions that are near-parallel to each other; box edges and curved
/// surfaces do not. min_fraction = 0 disables the check.
struct LineSupportParams {
  double radius = 0.08;
  double line_cos = 0.95;
  double min_fraction = 0.13;
  std::size_t min_neighbors = 10;

  void validate() const;
};

/// Fraction of neighbor direction pairs around `center` with |cos| > line_cos.
/// Returns 0 with fewer than min_neighbors neighbors.
double line_support(const PointCloud& cloud, const KdTree& tree, const Vec3& center,
                    const LineSupportParams& params);

bool is_line_supported(const PointCloud& cloud, const KdTree& tree, const Vec3& center,
                       const LineSupportParams& params);

/// Drops nodes whose centroid fails the line-support check against `cloud`.
/// Throws NoNodesFound when none remain.
void drop_unsupported_nodes(NodeSet& nodes, const PointCloud& cloud,
                            const LineSupportParams& params);

/// Mask, split the survivors with DBSCAN, and crop around each centroid.
/// Throws NoNodesFound when nothing survives.
NodeSet extract_nodes(const PointCloud& cloud, const OrthoFilterParams& filter,
                      const DbscanParams& split, double crop_radius,
                      unsigned jobs = 1);

/// Same, with a precomputed mask.
NodeSet extract_nodes_from_mask(const PointCloud& cloud, const Mask& mask,
                                const DbscanParams& split, double crop_radius);

}  // namespace rebartie
