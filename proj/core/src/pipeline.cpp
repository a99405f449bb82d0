#include "rebartie/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <numeric>
#include <optional>

#include "rebartie/kdtree.hpp"
#include "rebartie/node_extraction.hpp"

namespace rebartie {

PipelineError::PipelineError(std::string stage, const Error& cause)
    : Error(cause.code(), "[" + stage + "] " + cause.message()), stage_(std::move(stage)) {}

namespace {

OrthoFilterParams seeded_filter(const PipelineConfig& c) {
  OrthoFilterParams f = c.filter;
  f.rng_seed = derive_seed(c.seed, c.filter.rng_seed);
  return f;
}

SamplerConfig seeded_sampler(const PipelineConfig& c) {
  SamplerConfig s = c.sampler;
  s.seed = derive_seed(c.seed, c.sampler.seed ^ 0x9e3779b97f4a7c15ULL);
  return s;
}

template <typename F>
auto stage(const char* name, std::vector<StageTiming>* timings, F&& fn) {
  const auto start = std::chrono::steady_clock::now();
  auto record = [&] {
    if (!timings) return;
    const auto end = std::chrono::steady_clock::now();
    timings->push_back(
        {name, std::chrono::duration<double, std::milli>(end - start).count()});
  };
  try {
    if constexpr (std::is_void_v<decltype(fn())>) {
      fn();
      record();
    } else {
      auto out = fn();
      record();
      return out;
    }
  } catch (const PipelineError&) {
    throw;
  } catch (const Error& e) {
    throw PipelineError(name, e);
  }
}

// Tool rotation facing along `approach` with its z as close to `up` as possible.
UnitQuaternion facing(const Vec3& approach, const Vec3& up) {
  const Vec3 y = approach.normalized();
  Vec3 z = up - up.dot(y) * y;
  if (z.norm() < 1e-9) {
    const Vec3 helper = std::abs(y.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitZ();
    z = helper - helper.dot(y) * y;
  }
  z.normalize();
  Mat3 r;
  r.col(0) = y.cross(z);
  r.col(1) = y;
  r.col(2) = z;
  return UnitQuaternion::from_matrix(r);
}

}  // namespace

PreDetection pre_detect(const PointCloud& scene, const PointCloud& tool,
                        const PipelineConfig& config) {
  if (scene.empty()) throw Error(ErrorCode::kEmptyCloud, "scene is empty");
  const OrthoFilterParams filter = seeded_filter(config);
  const KdTree tree(scene.points);
  const Vec3 c = centroid(scene.points);

  std::vector<std::size_t> by_distance(scene.size());
  std::iota(by_distance.begin(), by_distance.end(), std::size_t{0});
  std::vector<double> d2(scene.size());
  for (std::size_t i = 0; i < scene.size(); ++i) d2[i] = (scene.points[i] - c).squaredNorm();
  std::stable_sort(by_distance.begin(), by_distance.end(),
                   [&](std::size_t a, std::size_t b) { return d2[a] < d2[b]; });

  // Mask decisions are cached; a candidate must pass the mask and line support
  // and be a core point of the passing points (as the node split requires).
  std::vector<std::int8_t> passes(scene.size(), -1);
  auto passing = [&](std::size_t j) {
    if (passes[j] < 0) passes[j] = orthogonal_feature_test(scene, tree, j, filter);
    return passes[j] == 1;
  };
  auto dense = [&](std::size_t i) {
    std::size_t count = 0;
    for (std::size_t j : tree.radius_search(scene.points[i], config.split.eps)) {
      if (passing(j) && ++count >= config.split.min_pts) return true;
    }
    return false;
  };

  // Mean of the passing points around a candidate; the target must keep line
  // support too, which rejects isolated passes on box edges.
  auto target_position = [&](std::size_t i) {
    Vec3 sum = Vec3::Zero();
    std::size_t n = 0;
    for (std::size_t j : tree.radius_search(scene.points[i], config.crop_radius)) {
      if (passing(j)) {
        sum += scene.points[j];
        ++n;
      }
    }
    return Vec3(sum / static_cast<double>(n));
  };

  PreDetection out;
  std::optional<Vec3> found;
  for (std::size_t i : by_distance) {
    if (!passing(i) || !is_line_supported(scene, tree, scene.points[i], config.line_support) ||
        !dense(i)) {
      continue;
    }
    const Vec3 p = target_position(i);
    if (is_line_supported(scene, tree, p, config.line_support)) {
      out.candidate_index = i;
      found = p;
      break;
    }
  }
  if (!found) {
    throw Error(ErrorCode::kNoCandidateNode,
                "no scene point passes the feature filter with line support");
  }
  const Vec3 position = *found;

  Vec3 approach = position - config.viewpoint;
  const auto local = scene.subset(tree.radius_search(position, config.crop_radius));
  if (local.size() >= 4) {
    const PcaResult p = pca(local.points);
    if (p.rank() >= 2) {
      Vec3 normal = p.axes[2];
      if (normal.dot(approach) < 0.0) normal = -normal;
      approach = normal;
    }
  }
  if (!(approach.norm() > 0.0)) approach = Vec3::UnitY();
  approach.normalize();

  out.target = {facing(approach, config.up), position - config.standoff * approach};
  const ScoreField field = analytic_gaussian_score(
      out.target, config.score_sigma_rot, config.score_sigma_trans, config.eval.gamma);
  out.sample = anneal_sample(config.sampler_init, field, seeded_sampler(config), scene, tool,
                             config.jobs);
  out.pose_prev = out.sample.best;
  out.t_prev = compose(out.pose_prev, config.sampler_init.inverse());
  return out;
}

void process_rebar_cloud(const PointCloud& rebar, const Pose& pose_prev,
                         const PipelineConfig& config, PipelineResult& result) {
  std::vector<StageTiming>* timings = &result.timings;
  const NodeSet nodes = stage("extract", timings, [&] {
    NodeSet ns = extract_nodes(rebar, seeded_filter(config), config.split,
                               config.crop_radius, config.jobs);
    drop_unsupported_nodes(ns, rebar, config.line_support);
    return ns;
  });
  result.coarse_frame = stage("frame", timings, [&] {
    const PcaResult p = pca(rebar.points);
    return build_frame(p, pose_prev, p.mean, config.up, config.frame);
  });
  const Frame refined = stage("refine", timings, [&] {
    std::vector<PointCloud> crops;
    for (const Node& n : nodes.nodes) crops.push_back(n.crop);
    return refine_frame(crops, pose_prev, config.up, config.frame);
  });
  result.ordered_nodes =
      stage("order", timings, [&] { return order_nodes(nodes, refined, config.order); });
  result.tying_poses = stage("poses", timings, [&] {
    std::vector<Pose> poses;
    const OrderedNodes& on = result.ordered_nodes;
    for (std::size_t i : on.order) {
      poses.push_back(predict_tying_pose(on.nodes.nodes[i].crop, on.frame, config.standoff));
    }
    return poses;
  });
}

PipelineResult run_pipeline(const PointCloud& scene, const PointCloud& tool,
                            const PipelineConfig& config) {
  stage("config", nullptr, [&] { config.validate(); });
  PipelineResult r;
  std::vector<StageTiming>* timings = &r.timings;
  const PreDetection pre =
      stage("pre_detect", timings, [&] { return pre_detect(scene, tool, config); });
  r.t_prev = pre.t_prev;
  r.pose_prev = pre.pose_prev;
  r.labeling = stage("cluster", timings, [&] { return dbscan(scene, config.dbscan); });
  r.selected_cluster = stage("select", timings, [&] {
    const PointCloud reference =
        extract_reference_cloud(scene, r.pose_prev, config.reference_radius);
    return select_rebar_cluster(scene, r.labeling, reference, config.search_radius);
  });
  const PointCloud rebar = scene.subset(r.labeling.members(r.selected_cluster));
  r.rebar_points = rebar.size();
  process_rebar_cloud(rebar, r.pose_prev, config, r);
  return r;
}

}  // namespace rebartie
