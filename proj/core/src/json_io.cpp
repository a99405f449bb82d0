#include "rebartie/json_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "detail/json_util.hpp"
#include "rebartie/pipeline.hpp"

namespace rebartie {

using detail::check_keys;
using detail::json;
using detail::pose_from_json;
using detail::pose_json;
using detail::read;
using detail::vec_from_json;
using detail::vec_to_json;

namespace {

void read_range(const json& j, const char* key, double& lo, double& hi,
                const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) return;
  if (it->is_number()) {
    lo = hi = it->get<double>();
    return;
  }
  if (!it->is_array() || it->size() != 2 || !(*it)[0].is_number() || !(*it)[1].is_number()) {
    throw Error(ErrorCode::kConfig, where + "." + key + ": expected [min, max]");
  }
  lo = (*it)[0].get<double>();
  hi = (*it)[1].get<double>();
}

SceneSpec scene_spec_from(const json& j, const std::string& w) {
  check_keys(j, {"rows", "cols", "layers", "spacing", "bar_radius", "bar_length",
                 "points_per_meter", "scene_pose", "noise_sigma", "n_obstacles",
                 "obstacle_size", "obstacle_points_per_m2", "standoff", "seed"},
             w);
  SceneSpec s;
  RebarGridSpec& g = s.grid;
  read(j, "rows", g.rows, w);
  read(j, "cols", g.cols, w);
  read(j, "layers", g.layers, w);
  read(j, "spacing", g.spacing, w);
  read(j, "bar_radius", g.bar_radius, w);
  read(j, "bar_length", g.bar_length, w);
  read(j, "points_per_meter", g.points_per_meter, w);
  if (j.contains("scene_pose")) g.scene_pose = pose_from_json(j["scene_pose"], w + ".scene_pose");
  read_range(j, "noise_sigma", s.noise_sigma_min, s.noise_sigma_max, w);
  read(j, "n_obstacles", s.n_obstacles, w);
  read_range(j, "obstacle_size", s.obstacle_size_min, s.obstacle_size_max, w);
  read(j, "obstacle_points_per_m2", s.obstacle_points_per_m2, w);
  read(j, "standoff", s.standoff, w);
  read(j, "seed", s.seed, w);
  try {
    s.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::kConfig, w + ": " + e.message());
  }
  return s;
}

json scene_spec_json(const SceneSpec& s) {
  const RebarGridSpec& g = s.grid;
  return {{"rows", g.rows},
          {"cols", g.cols},
          {"layers", g.layers},
          {"spacing", g.spacing},
          {"bar_radius", g.bar_radius},
          {"bar_length", g.bar_length},
          {"points_per_meter", g.points_per_meter},
          {"scene_pose", pose_json(g.scene_pose)},
          {"noise_sigma", json::array({s.noise_sigma_min, s.noise_sigma_max})},
          {"n_obstacles", s.n_obstacles},
          {"obstacle_size", json::array({s.obstacle_size_min, s.obstacle_size_max})},
          {"obstacle_points_per_m2", s.obstacle_points_per_m2},
          {"standoff", s.standoff},
          {"seed", s.seed}};
}

json vec_list(std::span<const Vec3> vs) {
  json a = json::array();
  for (const Vec3& v : vs) a.push_back(vec_to_json(v));
  return a;
}

json pose_list(std::span<const Pose> ps) {
  json a = json::array();
  for (const Pose& p : ps) a.push_back(pose_json(p));
  return a;
}

json frame_json(const Frame& f) {
  return {{"origin", vec_to_json(f.origin)},
          {"x", vec_to_json(f.x)},
          {"y", vec_to_json(f.y)},
          {"z", vec_to_json(f.z)}};
}

const json& require_key(const json& j, const char* key, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) throw Error(ErrorCode::kConfig, where + ": missing '" + key + "'");
  return *it;
}

}  // namespace

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << text;
  if (!text.empty() && text.back() != '\n') out << '\n';
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

std::string pose_to_json(const Pose& pose) { return pose_json(pose).dump(); }

Pose parse_pose(const std::string& json_text) {
  return pose_from_json(detail::parse_text(json_text, "pose"), "pose");
}

SceneSpec parse_scene_spec(const std::string& json_text) {
  return scene_spec_from(detail::parse_text(json_text, "scene spec"), "scene spec");
}

std::string scene_spec_to_json(const SceneSpec& spec) { return scene_spec_json(spec).dump(2); }

std::vector<SceneSpec> load_scene_specs(const std::filesystem::path& path) {
  const json j = detail::parse_text(read_text_file(path), path.string());
  std::vector<SceneSpec> out;
  if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i) {
      out.push_back(scene_spec_from(j[i], "scene spec[" + std::to_string(i) + "]"));
    }
  } else {
    out.push_back(scene_spec_from(j, "scene spec"));
  }
  return out;
}

std::string ground_truth_to_json(const GroundTruth& truth, const SceneSpec& spec) {
  json j = {{"node_positions", vec_list(truth.node_positions)},
            {"tying_poses", pose_list(truth.tying_poses)},
            {"canonical_order", truth.canonical_order},
            {"up_axis", vec_to_json(truth.up_axis)},
            {"noise_sigma", truth.noise_sigma},
            {"spec", scene_spec_json(spec)}};
  return j.dump(2);
}

GroundTruth parse_ground_truth(const std::string& json_text) {
  const std::string w = "ground truth";
  const json j = detail::parse_text(json_text, w);
  check_keys(j, {"node_positions", "tying_poses", "canonical_order", "up_axis", "noise_sigma",
                 "spec"},
             w);
  GroundTruth t;
  for (const json& v : require_key(j, "node_positions", w)) {
    t.node_positions.push_back(vec_from_json(v, w + ".node_positions"));
  }
  for (const json& p : require_key(j, "tying_poses", w)) {
    t.tying_poses.push_back(pose_from_json(p, w + ".tying_poses"));
  }
  read(j, "canonical_order", t.canonical_order, w);
  detail::read_vec(j, "up_axis", t.up_axis, w);
  read(j, "noise_sigma", t.noise_sigma, w);
  if (t.node_positions.size() != t.tying_poses.size()) {
    throw Error(ErrorCode::kConfig, w + ": node and pose counts differ");
  }
  if (t.canonical_order.empty()) {
    for (std::size_t i = 0; i < t.node_positions.size(); ++i) t.canonical_order.push_back(i);
  }
  if (t.canonical_order.size() != t.node_positions.size()) {
    throw Error(ErrorCode::kConfig, w + ": canonical_order has the wrong length");
  }
  for (std::size_t i : t.canonical_order) {
    if (i >= t.node_positions.size()) {
      throw Error(ErrorCode::kConfig, w + ": canonical_order index out of range");
    }
  }
  return t;
}

GroundTruth load_ground_truth(const std::filesystem::path& path) {
  return parse_ground_truth(read_text_file(path));
}

std::string pipeline_result_to_json(const PipelineResult& r,
                                    std::span<const std::string> crop_files) {
  const OrderedNodes& on = r.ordered_nodes;
  json nodes = json::array();
  for (std::size_t i = 0; i < on.nodes.size(); ++i) {
    const Node& n = on.nodes.nodes[i];
    json node = {{"centroid", vec_to_json(n.centroid)},
                 {"local", vec_to_json(on.local[i])},
                 {"members", n.members.size()},
                 {"crop_points", n.crop.size()}};
    if (i < crop_files.size() && !crop_files[i].empty()) node["crop_file"] = crop_files[i];
    nodes.push_back(node);
  }
  json timings = json::object();
  for (const StageTiming& t : r.timings) timings[t.stage] = t.ms;
  const auto sizes = r.labeling.cluster_sizes();
  json j = {{"t_prev", pose_json(r.t_prev)},
            {"pose_prev", pose_json(r.pose_prev)},
            {"selected_cluster", r.selected_cluster},
            {"clusters", {{"count", r.labeling.n_clusters},
                          {"sizes", sizes},
                          {"noise", r.labeling.noise_count()}}},
            {"rebar_points", r.rebar_points},
            {"coarse_frame", frame_json(r.coarse_frame)},
            {"frame", frame_json(on.frame)},
            {"nodes", nodes},
            {"order", on.order},
            {"ordered_nodes", vec_list(on.ordered_centroids())},
            {"tying_poses", pose_list(r.tying_poses)},
            {"timings_ms", timings}};
  return j.dump(2);
}

ResultSummary parse_result_summary(const std::string& json_text) {
  const std::string w = "result";
  const json j = detail::parse_text(json_text, w);
  if (!j.is_object()) throw Error(ErrorCode::kConfig, w + ": expected an object");
  ResultSummary s;
  for (const json& p : require_key(j, "tying_poses", w)) {
    s.tying_poses.push_back(pose_from_json(p, w + ".tying_poses"));
  }
  for (const json& v : require_key(j, "ordered_nodes", w)) {
    s.ordered_nodes.push_back(vec_from_json(v, w + ".ordered_nodes"));
  }
  if (s.tying_poses.size() != s.ordered_nodes.size()) {
    throw Error(ErrorCode::kConfig, w + ": pose and node counts differ");
  }
  return s;
}

ResultSummary load_result_summary(const std::filesystem::path& path) {
  return parse_result_summary(read_text_file(path));
}

std::string eval_report_to_json(const EvalReport& report) {
  auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
  json demos = json::array();
  for (const DemoEval& d : report.demos) {
    json dist = json::array();
    for (double v : d.distances) dist.push_back(num(v));
    demos.push_back({{"n_poses", d.n_poses},
                     {"n_success", d.n_success},
                     {"n_missing", d.n_missing},
                     {"distances", dist}});
  }
  json j = {{"success_rate", report.success_rate},
            {"prediction_error", num(report.prediction_error)},
            {"n_poses", report.n_poses},
            {"demos", demos}};
  return j.dump(2);
}

void write_trajectory_jsonl(const std::filesystem::path& path,
                            std::span<const Pose> poses) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  for (const Pose& p : poses) out << pose_json(p).dump() << '\n';
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

}  // namespace rebartie
