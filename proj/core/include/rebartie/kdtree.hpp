#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "rebartie/se3.hpp"

namespace rebartie {

/// Static 3D k-d tree over a copy of the input points. Queries return indices
/// into the original input span.
class KdTree {
 public:
  KdTree() = default;
  explicit KdTree(std::span<const Vec3> points, std::size_t leaf_size = 16);

  std::size_t size() const { return points_.size(); }

  /// Indices of all points with ||p - query|| <= radius, sorted ascending.
  std::vector<std::size_t> radius_search(const Vec3& query,
                                         double radius) const;
  /// Appends to `out` (cleared first) without allocating a new vector.
  void radius_search(const Vec3& query, double radius,
                     std::vector<std::size_t>& out) const;
  std::size_t radius_count(const Vec3& query, double radius) const;
  bool any_within(const Vec3& query, double radius) const;

  /// Nearest point index and its distance; size() must be > 0.
  std::pair<std::size_t, double> nearest(const Vec3& query) const;

 private:
  struct Node {
    Eigen::Vector3d lo, hi;  // bounding box of the subtree
    std::uint32_t begin = 0, end = 0;
    std::int32_t left = -1, right = -1;
  };

  std::int32_t build(std::uint32_t begin, std::uint32_t end);
  template <typename Visit>
  bool visit_radius(const Vec3& q, double r2, Visit&& visit) const;

  std::vector<Vec3> points_;          // reordered copy
  std::vector<std::size_t> index_;    // reordered slot -> original index
  std::vector<Node> nodes_;
  std::size_t leaf_size_ = 16;
};

}  // namespace rebartie
