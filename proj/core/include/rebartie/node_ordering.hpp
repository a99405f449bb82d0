#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "rebartie/node_extraction.hpp"
#include "rebartie/point_cloud.hpp"
#include "rebartie/se3.hpp"

namespace rebartie {

struct PcaResult {
  Vec3 mean = Vec3::Zero();
  // Descending eigenvalues; axes[i] is the unit eigenvector of
  // eigenvalues[i], signed so that its largest-magnitude component is positive.
  std::array<Vec3, 3> axes{Vec3::UnitX(), Vec3::UnitY(), Vec3::UnitZ()};
  std::array<double, 3> eigenvalues{0.0, 0.0, 0.0};
  // Two eigenvalues equal within 1e-9 relative to the largest.
  bool degenerate = false;

  /// Number of eigenvalues above 1e-9 * largest.
  int rank() const;
};

/// Throws DegenerateCloud on fewer than 4 points.
PcaResult pca(std::span<const Vec3> points);
inline PcaResult pca(const PointCloud& cloud) { return pca(cloud.points); }

/// Right-handed orthonormal frame; x = y cross z.
struct Frame {
  Vec3 origin = Vec3::Zero();
  Vec3 x = Vec3::UnitX(), y = Vec3::UnitY(), z = Vec3::UnitZ();

  Mat3 rotation() const;
  Vec3 to_local(const Vec3& p) const;
};

struct FrameOptions {
  // Eigenvalues closer than this fraction of the larger one share an
  // eigenspace; axes are then chosen by projection inside that space.
  double eigen_gap_tol = 0.15;
};

/// z: PCA axis (or eigenspace projection) best aligned with `up`.
/// y: remaining axis best aligned with the direction from the robot position
/// to `reference`. Throws AmbiguousAxis when the choice is a tie.
Frame build_frame(const PcaResult& pca, const Pose& pose_prev,
                  const Vec3& reference, const Vec3& up,
                  const FrameOptions& options = {});

/// Averages per-crop frames. Crops with fewer than 4 points, rank below 2 or
/// an ambiguous frame are skipped. Throws DegenerateCloud if none remain.
Frame refine_frame(std::span<const PointCloud> crops, const Pose& pose_prev,
                   const Vec3& up, const FrameOptions& options = {});

struct SortKey {
  int axis;  // 0 = x, 1 = y, 2 = z in the frame
  int sign;  // +1 ascending, -1 descending
};

struct OrderOptions {
  std::array<SortKey, 3> keys{SortKey{1, -1}, SortKey{2, +1}, SortKey{0, +1}};
  // Values within this distance on a key count as equal.
  double tolerance = 0.05;
};

/// Lexicographic order of `keys` (already signed); values are grouped along
/// each component by chaining sorted gaps <= tolerance.
std::vector<std::size_t> lexicographic_order(std::span<const Vec3> keys,
                                             double tolerance);

struct OrderedNodes {
  NodeSet nodes;
  // order[k] is the index into nodes of the k-th node to tie.
  std::vector<std::size_t> order;
  Frame frame;
  std::vector<Vec3> local;  // node centroids in frame coordinates

  std::vector<Vec3> ordered_centroids() const;
};

OrderedNodes order_nodes(NodeSet nodes, const Frame& frame,
                         const OrderOptions& options = {});

}  // namespace rebartie
