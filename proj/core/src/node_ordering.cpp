#include "rebartie/node_ordering.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "rebartie/error.hpp"

namespace rebartie {

namespace {

constexpr double kTieTol = 1e-6;

Vec3 canonical_sign(const Vec3& v) {
  Eigen::Index i = 0;
  v.cwiseAbs().maxCoeff(&i);
  return v[i] < 0.0 ? Vec3(-v) : v;
}

// Orthonormal basis of a subspace spanned by `vs`.
std::vector<Vec3> orthonormalize(const std::vector<Vec3>& vs) {
  std::vector<Vec3> out;
  for (Vec3 v : vs) {
    for (const Vec3& b : out) v -= v.dot(b) * b;
    const double n = v.norm();
    if (n > 1e-9) out.push_back(v / n);
  }
  return out;
}

Vec3 project(const std::vector<Vec3>& basis, const Vec3& d) {
  Vec3 p = Vec3::Zero();
  for (const Vec3& b : basis) p += d.dot(b) * b;
  return p;
}

// Groups of indices into the descending eigenvalues.
std::vector<std::vector<int>> eigen_groups(const std::array<double, 3>& ev,
                                           double tol) {
  auto close = [&](int a, int b) {
    const double scale = std::max(std::abs(ev[a]), std::abs(ev[b]));
    return std::abs(ev[a] - ev[b]) <= tol * scale + 1e-15;
  };
  std::vector<std::vector<int>> groups{{0}};
  for (int i = 1; i < 3; ++i) {
    if (close(i - 1, i)) groups.back().push_back(i);
    else groups.push_back({i});
  }
  return groups;
}

// Picks the subspace whose projection of d is largest; returns the normalized
// projection. Throws AmbiguousAxis on a tie between subspaces.
Vec3 best_projection(const std::vector<std::vector<Vec3>>& spaces, const Vec3& d,
                     const char* what) {
  std::vector<double> norms;
  for (const auto& s : spaces) norms.push_back(project(s, d).norm());
  std::vector<std::size_t> idx(spaces.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return norms[a] > norms[b]; });
  if (norms[idx[0]] < 1e-9 ||
      (idx.size() > 1 && norms[idx[0]] - norms[idx[1]] <= kTieTol)) {
    throw Error(ErrorCode::kAmbiguousAxis, std::string("cannot choose the ") + what + " axis");
  }
  return project(spaces[idx[0]], d).normalized();
}

}  // namespace

int PcaResult::rank() const {
  const double top = eigenvalues[0];
  if (!(top > 0.0)) return 0;
  int r = 0;
  for (double e : eigenvalues) r += e > 1e-9 * top;
  return r;
}

PcaResult pca(std::span<const Vec3> points) {
  if (points.size() < 4) {
    throw Error(ErrorCode::kDegenerateCloud, "pca needs at least 4 points");
  }
  PcaResult out;
  out.mean = centroid(points);
  Mat3 cov = Mat3::Zero();
  for (const Vec3& p : points) {
    const Vec3 d = p - out.mean;
    cov += d * d.transpose();
  }
  cov /= static_cast<double>(points.size());
  const Eigen::SelfAdjointEigenSolver<Mat3> solver(cov);
  // Eigen returns ascending eigenvalues.
  for (int i = 0; i < 3; ++i) {
    out.eigenvalues[i] = std::max(0.0, solver.eigenvalues()[2 - i]);
    out.axes[i] = canonical_sign(solver.eigenvectors().col(2 - i).normalized());
  }
  const double scale = std::max(out.eigenvalues[0], 1e-300);
  out.degenerate = (out.eigenvalues[0] - out.eigenvalues[1]) <= 1e-9 * scale ||
                   (out.eigenvalues[1] - out.eigenvalues[2]) <= 1e-9 * scale;
  return out;
}

Mat3 Frame::rotation() const {
  Mat3 r;
  r.col(0) = x;
  r.col(1) = y;
  r.col(2) = z;
  return r;
}

Vec3 Frame::to_local(const Vec3& p) const {
  const Vec3 d = p - origin;
  return {d.dot(x), d.dot(y), d.dot(z)};
}

Frame build_frame(const PcaResult& pca, const Pose& pose_prev,
                  const Vec3& reference, const Vec3& up,
                  const FrameOptions& options) {
  if (!(up.norm() > 0.0)) throw Error(ErrorCode::kInvalidParams, "up must be nonzero");
  const Vec3 u = up.normalized();
  const auto groups = eigen_groups(pca.eigenvalues, options.eigen_gap_tol);

  std::vector<std::vector<Vec3>> spaces;
  for (const auto& g : groups) {
    std::vector<Vec3> s;
    for (int i : g) s.push_back(pca.axes[i]);
    spaces.push_back(s);
  }
  const Vec3 z = best_projection(spaces, u, "z");

  std::vector<std::vector<Vec3>> rest;
  for (const auto& s : spaces) {
    std::vector<Vec3> reduced;
    for (const Vec3& a : s) reduced.push_back(a - a.dot(z) * z);
    reduced = orthonormalize(reduced);
    if (!reduced.empty()) rest.push_back(reduced);
  }
  const Vec3 toward = reference - pose_prev.translation;
  if (!(toward.norm() > 0.0)) {
    throw Error(ErrorCode::kAmbiguousAxis, "robot position coincides with the reference point");
  }
  Vec3 y = best_projection(rest, toward.normalized(), "y");
  y = (y - y.dot(z) * z).normalized();

  Frame f;
  f.origin = reference;
  f.z = z;
  f.y = y;
  f.x = y.cross(z);
  return f;
}

Frame refine_frame(std::span<const PointCloud> crops, const Pose& pose_prev,
                   const Vec3& up, const FrameOptions& options) {
  std::vector<Vec3> means;
  for (const PointCloud& c : crops) {
    if (!c.empty()) means.push_back(centroid(c.points));
  }
  if (means.empty()) throw Error(ErrorCode::kDegenerateCloud, "all crops are empty");
  const Vec3 reference = centroid(means);

  Vec3 sy = Vec3::Zero(), sz = Vec3::Zero();
  std::vector<Vec3> used;
  for (const PointCloud& c : crops) {
    if (c.size() < 4) continue;
    const PcaResult p = pca(c.points);
    if (p.rank() < 2) continue;
    try {
      const Frame f = build_frame(p, pose_prev, reference, up, options);
      sy += f.y;
      sz += f.z;
      used.push_back(p.mean);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kAmbiguousAxis) throw;
    }
  }
  if (used.empty() || !(sz.norm() > 1e-9)) {
    throw Error(ErrorCode::kDegenerateCloud, "no crop yields a usable frame");
  }
  Frame f;
  f.origin = centroid(used);
  f.z = sz.normalized();
  Vec3 y = sy - sy.dot(f.z) * f.z;
  if (!(y.norm() > 1e-9)) throw Error(ErrorCode::kDegenerateCloud, "averaged axes collapse");
  f.y = y.normalized();
  f.x = f.y.cross(f.z);
  return f;
}

std::vector<std::size_t> lexicographic_order(std::span<const Vec3> keys,
                                             double tolerance) {
  if (!(tolerance >= 0.0)) throw Error(ErrorCode::kInvalidParams, "tolerance must be >= 0");
  const std::size_t n = keys.size();
  // Group rank of each item per component.
  std::array<std::vector<std::size_t>, 3> rank;
  for (int c = 0; c < 3; ++c) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return keys[a][c] < keys[b][c]; });
    rank[c].assign(n, 0);
    std::size_t g = 0;
    for (std::size_t k = 1; k < n; ++k) {
      if (keys[idx[k]][c] - keys[idx[k - 1]][c] > tolerance) ++g;
      rank[c][idx[k]] = g;
    }
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    for (int c = 0; c < 3; ++c) {
      if (rank[c][a] != rank[c][b]) return rank[c][a] < rank[c][b];
    }
    return false;
  });
  return order;
}

std::vector<Vec3> OrderedNodes::ordered_centroids() const {
  std::vector<Vec3> out;
  for (std::size_t i : order) out.push_back(nodes.nodes[i].centroid);
  return out;
}

OrderedNodes order_nodes(NodeSet nodes, const Frame& frame,
                         const OrderOptions& options) {
  OrderedNodes out;
  out.frame = frame;
  std::vector<Vec3> keys;
  for (const Node& n : nodes.nodes) {
    const Vec3 l = frame.to_local(n.centroid);
    out.local.push_back(l);
    Vec3 k;
    for (int i = 0; i < 3; ++i) {
      const SortKey& sk = options.keys[i];
      if (sk.axis < 0 || sk.axis > 2 || (sk.sign != 1 && sk.sign != -1)) {
        throw Error(ErrorCode::kInvalidParams, "sort keys need axis in [0,2] and sign +-1");
      }
      k[i] = sk.sign * l[sk.axis];
    }
    keys.push_back(k);
  }
  out.order = lexicographic_order(keys, options.tolerance);
  out.nodes = std::move(nodes);
  return out;
}

}  // namespace rebartie
