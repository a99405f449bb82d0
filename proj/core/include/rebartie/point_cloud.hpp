#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "rebartie/se3.hpp"

namespace rebartie {

using Rgb = std::array<std::uint8_t, 3>;

/// Ordered list of 3D points with optional per-point colors.
struct PointCloud {
  std::vector<Vec3> points;
  std::optional<std::vector<Rgb>> colors;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  bool has_colors() const { return colors.has_value(); }

  /// Colors survive only when both sides carry them (or one side is empty).
  void append(const PointCloud& other);
  /// Sub-cloud in the order given by `indices`; colors follow the points.
  PointCloud subset(std::span<const std::size_t> indices) const;
  /// Throws SpecInvalid when a coordinate is non-finite or the color array
  /// length differs from the point count.
  void validate() const;
};

Vec3 centroid(std::span<const Vec3> points);

/// p -> R p + t for every point.
PointCloud apply_rigid_transform(const PointCloud& cloud, const Pose& g);

}  // namespace rebartie
