#include "rebartie/kdtree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace rebartie {

namespace {

double box_distance2(const Vec3& q, const Vec3& lo, const Vec3& hi) {
  double d2 = 0.0;
  for (int k = 0; k < 3; ++k) {
    const double d = q[k] < lo[k] ? lo[k] - q[k] : (q[k] > hi[k] ? q[k] - hi[k] : 0.0);
    d2 += d * d;
  }
  return d2;
}

}  // namespace

KdTree::KdTree(std::span<const Vec3> points, std::size_t leaf_size)
    : points_(points.begin(), points.end()),
      index_(points.size()),
      leaf_size_(std::max<std::size_t>(1, leaf_size)) {
  std::iota(index_.begin(), index_.end(), std::size_t{0});
  if (!points_.empty()) {
    nodes_.reserve(2 * points_.size() / leaf_size_ + 1);
    build(0, static_cast<std::uint32_t>(points_.size()));
  }
}

std::int32_t KdTree::build(std::uint32_t begin, std::uint32_t end) {
  const auto id = static_cast<std::int32_t>(nodes_.size());
  nodes_.emplace_back();
  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 hi = -lo;
  for (std::uint32_t i = begin; i < end; ++i) {
    lo = lo.cwiseMin(points_[i]);
    hi = hi.cwiseMax(points_[i]);
  }
  nodes_[id].lo = lo;
  nodes_[id].hi = hi;
  nodes_[id].begin = begin;
  nodes_[id].end = end;
  if (end - begin <= leaf_size_) return id;

  int dim;
  (hi - lo).maxCoeff(&dim);
  const std::uint32_t mid = begin + (end - begin) / 2;
  // Permute points and their original indices together.
  std::vector<std::uint32_t> order(end - begin);
  std::iota(order.begin(), order.end(), begin);
  std::nth_element(order.begin(), order.begin() + (mid - begin), order.end(),
                   [&](std::uint32_t a, std::uint32_t b) {
                     return points_[a][dim] < points_[b][dim];
                   });
  std::vector<Vec3> pts(order.size());
  std::vector<std::size_t> idx(order.size());
  for (std::size_t k = 0; k < order.size(); ++k) {
    pts[k] = points_[order[k]];
    idx[k] = index_[order[k]];
  }
  std::copy(pts.begin(), pts.end(), points_.begin() + begin);
  std::copy(idx.begin(), idx.end(), index_.begin() + begin);

  const std::int32_t l = build(begin, mid);
  const std::int32_t r = build(mid, end);
  nodes_[id].left = l;
  nodes_[id].right = r;
  return id;
}

template <typename Visit>
bool KdTree::visit_radius(const Vec3& q, double r2, Visit&& visit) const {
  if (nodes_.empty()) return true;
  std::int32_t stack[128];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const Node& n = nodes_[stack[--top]];
    if (box_distance2(q, n.lo, n.hi) > r2) continue;
    if (n.left < 0) {
      for (std::uint32_t i = n.begin; i < n.end; ++i) {
        if ((points_[i] - q).squaredNorm() <= r2) {
          if (!visit(i)) return false;
        }
      }
    } else {
      stack[top++] = n.right;
      stack[top++] = n.left;
    }
  }
  return true;
}

std::vector<std::size_t> KdTree::radius_search(const Vec3& query,
                                               double radius) const {
  std::vector<std::size_t> out;
  radius_search(query, radius, out);
  return out;
}

void KdTree::radius_search(const Vec3& query, double radius,
                           std::vector<std::size_t>& out) const {
  out.clear();
  visit_radius(query, radius * radius, [&](std::uint32_t i) {
    out.push_back(index_[i]);
    return true;
  });
  std::sort(out.begin(), out.end());
}

std::size_t KdTree::radius_count(const Vec3& query, double radius) const {
  std::size_t count = 0;
  visit_radius(query, radius * radius, [&](std::uint32_t) {
    ++count;
    return true;
  });
  return count;
}

bool KdTree::any_within(const Vec3& query, double radius) const {
  bool found = false;
  visit_radius(query, radius * radius, [&](std::uint32_t) {
    found = true;
    return false;
  });
  return found;
}

std::pair<std::size_t, double> KdTree::nearest(const Vec3& query) const {
  double best2 = std::numeric_limits<double>::infinity();
  std::size_t best = 0;
  std::int32_t stack[128];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const Node& n = nodes_[stack[--top]];
    if (box_distance2(query, n.lo, n.hi) > best2) continue;
    if (n.left < 0) {
      for (std::uint32_t i = n.begin; i < n.end; ++i) {
        const double d2 = (points_[i] - query).squaredNorm();
        if (d2 < best2 || (d2 == best2 && index_[i] < best)) {
          best2 = d2;
          best = index_[i];
        }
      }
    } else {
      const Node& l = nodes_[n.left];
      const Node& r = nodes_[n.right];
      const bool left_first = box_distance2(query, l.lo, l.hi) <=
                              box_distance2(query, r.lo, r.hi);
      stack[top++] = left_first ? n.right : n.left;
      stack[top++] = left_first ? n.left : n.right;
    }
  }
  return {best, std::sqrt(best2)};
}

}  // namespace rebartie
