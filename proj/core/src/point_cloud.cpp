#include "rebartie/point_cloud.hpp"

#include <string>

#include "rebartie/error.hpp"

namespace rebartie {

void PointCloud::append(const PointCloud& other) {
  const bool keep_colors =
      (empty() || has_colors()) && (other.empty() || other.has_colors()) &&
      (has_colors() || other.has_colors());
  if (keep_colors) {
    if (!colors) colors.emplace();
    if (other.colors) {
      colors->insert(colors->end(), other.colors->begin(), other.colors->end());
    }
  } else {
    colors.reset();
  }
  points.insert(points.end(), other.points.begin(), other.points.end());
}

PointCloud PointCloud::subset(std::span<const std::size_t> indices) const {
  PointCloud out;
  out.points.reserve(indices.size());
  for (std::size_t i : indices) out.points.push_back(points.at(i));
  if (colors) {
    out.colors.emplace();
    out.colors->reserve(indices.size());
    for (std::size_t i : indices) out.colors->push_back(colors->at(i));
  }
  return out;
}

void PointCloud::validate() const {
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!points[i].allFinite()) {
      throw Error(ErrorCode::kSpecInvalid,
                  "non-finite coordinate at point " + std::to_string(i));
    }
  }
  if (colors && colors->size() != points.size()) {
    throw Error(ErrorCode::kSpecInvalid, "color count differs from point count");
  }
}

Vec3 centroid(std::span<const Vec3> points) {
  Vec3 sum = Vec3::Zero();
  for (const Vec3& p : points) sum += p;
  return points.empty() ? sum : Vec3(sum / static_cast<double>(points.size()));
}

PointCloud apply_rigid_transform(const PointCloud& cloud, const Pose& g) {
  PointCloud out = cloud;
  const Mat3 r = g.rotation.matrix();
  for (Vec3& p : out.points) p = r * p + g.translation;
  return out;
}

}  // namespace rebartie
