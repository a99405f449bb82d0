#include "rebartie/node_extraction.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "rebartie/error.hpp"

namespace rebartie {

void OrthoFilterParams::validate() const {
  const bool ok = std::isfinite(r_eps) && r_eps > 0.0 && r_res >= 0.0 &&
                  r_res < p_res && p_res <= 1.0 && min_neighbors >= 2;
  if (!ok) {
    throw Error(ErrorCode::kInvalidParams,
                "filter requires r_eps > 0, 0 <= r_res < p_res <= 1, min_neighbors >= 2");
  }
}

namespace {

bool test_point(const PointCloud& cloud, const KdTree& tree, std::size_t index,
                const OrthoFilterParams& params, std::vector<std::size_t>& hits,
                std::vector<Vec3>& dirs) {
  const Vec3& p = cloud.points[index];
  tree.radius_search(p, params.r_eps, hits);
  dirs.clear();
  for (std::size_t h : hits) {
    const Vec3 d = cloud.points[h] - p;
    const double len = d.norm();
    if (h == index || len == 0.0) continue;
    dirs.push_back(d / len);
  }
  if (dirs.size() < params.min_neighbors) return false;

  Rng rng(derive_seed(params.rng_seed, index));
  std::shuffle(dirs.begin(), dirs.end(), rng);
  const std::size_t half = dirs.size() / 2;
  std::size_t low = 0, high = 0;
  for (std::size_t i = 0; i < half; ++i) {
    const double c = std::abs(dirs[i].dot(dirs[half + i]));
    low += c < params.r_res;
    high += c > params.p_res;
  }
  return 2 * low >= half && 3 * high >= half;
}

}  // namespace

bool orthogonal_feature_test(const PointCloud& cloud, const KdTree& tree,
                             std::size_t index,
                             const OrthoFilterParams& params) {
  params.validate();
  std::vector<std::size_t> hits;
  std::vector<Vec3> dirs;
  return test_point(cloud, tree, index, params, hits, dirs);
}

Mask orthogonal_feature_mask(const PointCloud& cloud,
                             const OrthoFilterParams& params, unsigned jobs) {
  params.validate();
  const std::size_t n = cloud.size();
  Mask mask(n, 0);
  if (n == 0) return mask;
  const KdTree tree(cloud.points);
  const std::size_t workers = std::clamp<std::size_t>(jobs, 1, n);
  auto run = [&](std::size_t begin, std::size_t end) {
    std::vector<std::size_t> hits;
    std::vector<Vec3> dirs;
    for (std::size_t i = begin; i < end; ++i) {
      mask[i] = test_point(cloud, tree, i, params, hits, dirs);
    }
  };
  if (workers == 1) {
    run(0, n);
    return mask;
  }
  std::vector<std::jthread> pool;
  const std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t b = w * chunk, e = std::min(n, b + chunk);
    if (b < e) pool.emplace_back(run, b, e);
  }
  pool.clear();  // joins
  return mask;
}

std::vector<Vec3> NodeSet::centroids() const {
  std::vector<Vec3> out;
  out.reserve(nodes.size());
  for (const Node& n : nodes) out.push_back(n.centroid);
  return out;
}

NodeSet extract_nodes_from_mask(const PointCloud& cloud, const Mask& mask,
                                const DbscanParams& split, double crop_radius) {
  if (mask.size() != cloud.size()) {
    throw Error(ErrorCode::kShapeMismatch, "mask does not match the cloud");
  }
  if (!(crop_radius > 0.0)) throw Error(ErrorCode::kInvalidParams, "crop_radius must be > 0");
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i]) kept.push_back(i);
  }
  if (kept.empty()) throw Error(ErrorCode::kNoNodesFound, "no point passed the feature filter");
  const PointCloud survivors = cloud.subset(kept);
  const ClusterLabeling labeling = dbscan(survivors, split);
  if (labeling.n_clusters == 0) {
    throw Error(ErrorCode::kNoNodesFound, "surviving points form no cluster");
  }

  const KdTree tree(cloud.points);
  NodeSet out;
  for (int c = 0; c < labeling.n_clusters; ++c) {
    Node node;
    node.members = survivors.subset(labeling.members(c));
    node.centroid = centroid(node.members.points);
    const auto idx = tree.radius_search(node.centroid, crop_radius);
    node.crop = idx.empty() ? node.members : cloud.subset(idx);
    out.nodes.push_back(std::move(node));
  }
  return out;
}

void LineSupportParams::validate() const {
  const bool ok = std::isfinite(radius) && radius > 0.0 && line_cos > 0.0 &&
                  line_cos < 1.0 && min_fraction >= 0.0 && min_fraction <= 1.0 &&
                  min_neighbors >= 2;
  if (!ok) {
    throw Error(ErrorCode::kInvalidParams,
                "line support requires radius > 0, 0 < line_cos < 1, 0 <= min_fraction <= 1");
  }
}

double line_support(const PointCloud& cloud, const KdTree& tree, const Vec3& center,
                    const LineSupportParams& params) {
  params.validate();
  std::vector<Vec3> dirs;
  for (std::size_t h : tree.radius_search(center, params.radius)) {
    const Vec3 d = cloud.points[h] - center;
    const double len = d.norm();
    if (len > 0.0) dirs.push_back(d / len);
  }
  if (dirs.size() < params.min_neighbors) return 0.0;
  std::size_t hits = 0;
  for (std::size_t a = 0; a < dirs.size(); ++a) {
    for (std::size_t b = a + 1; b < dirs.size(); ++b) {
      hits += std::abs(dirs[a].dot(dirs[b])) > params.line_cos;
    }
  }
  const double pairs = 0.5 * static_cast<double>(dirs.size()) * (dirs.size() - 1);
  return static_cast<double>(hits) / pairs;
}

bool is_line_supported(const PointCloud& cloud, const KdTree& tree, const Vec3& center,
                       const LineSupportParams& params) {
  if (params.min_fraction <= 0.0) return true;
  return line_support(cloud, tree, center, params) >= params.min_fraction;
}

void drop_unsupported_nodes(NodeSet& nodes, const PointCloud& cloud,
                            const LineSupportParams& params) {
  params.validate();
  if (params.min_fraction <= 0.0) return;
  const KdTree tree(cloud.points);
  std::erase_if(nodes.nodes, [&](const Node& n) {
    return !is_line_supported(cloud, tree, n.centroid, params);
  });
  if (nodes.nodes.empty()) {
    throw Error(ErrorCode::kNoNodesFound, "no node candidate has line support");
  }
}

NodeSet extract_nodes(const PointCloud& cloud, const OrthoFilterParams& filter,
                      const DbscanParams& split, double crop_radius,
                      unsigned jobs) {
  if (cloud.empty()) throw Error(ErrorCode::kNoNodesFound, "input cloud is empty");
  return extract_nodes_from_mask(cloud, orthogonal_feature_mask(cloud, filter, jobs),
                                 split, crop_radius);
}

}  // namespace rebartie
