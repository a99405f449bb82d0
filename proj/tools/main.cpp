#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rebartie/cloud_io.hpp"
#include "rebartie/config.hpp"
#include "rebartie/error.hpp"
#include "rebartie/evaluation.hpp"
#include "rebartie/json_io.hpp"
#include "rebartie/pipeline.hpp"
#include "rebartie/scene.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace rebartie;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitStage = 1;
constexpr int kExitConfig = 2;

struct CommonOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir = ".";
  unsigned jobs = 1;
  std::string format = "ply";
};

PipelineConfig load_config(const CommonOptions& o) {
  PipelineConfig c = o.config_path.empty() ? PipelineConfig{} : load_pipeline_config(o.config_path);
  if (o.seed) c.seed = *o.seed;
  c.validate();
  return c;
}

// Runs fn(i) for i in [0, n) on up to `jobs` threads. Results are written by
// index, so callers reduce in index order.
void parallel_for(std::size_t n, unsigned jobs, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(n, 1));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    });
  }
}

std::string scene_name(std::size_t index) {
  std::ostringstream os;
  os << "scene_" << std::setw(4) << std::setfill('0') << index;
  return os.str();
}

std::string strip_suffix(const std::string& name, const std::string& suffix) {
  if (name.size() >= suffix.size() && name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0) {
    return name.substr(0, name.size() - suffix.size());
  }
  return name;
}

std::string csv_escape(std::string s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

// --------------------------------------------------------------------------
// Per-scene pipeline runs shared by detect and demo

struct RunOutcome {
  bool ok = false;
  std::string stage;
  std::string error;
  ErrorCode code = ErrorCode::kIo;
  PipelineResult result;
  double ms = 0.0;
};

RunOutcome run_one(const PointCloud& scene, const PointCloud& tool, const PipelineConfig& config) {
  RunOutcome out;
  const auto start = std::chrono::steady_clock::now();
  try {
    out.result = run_pipeline(scene, tool, config);
    out.ok = true;
  } catch (const PipelineError& e) {
    out.stage = e.stage();
    out.error = e.what();
    out.code = e.code();
  } catch (const Error& e) {
    out.stage = "input";
    out.error = e.what();
    out.code = e.code();
  }
  out.ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return out;
}

// Writes the result JSON and, optionally, one cloud per node crop. Returns
// the crop file names (relative to the result file).
void write_result(const fs::path& dir, const std::string& stem, const RunOutcome& run,
                  std::optional<CloudFormat> crops) {
  if (!run.ok) {
    const json j = {{"error", {{"stage", run.stage}, {"message", run.error}}}};
    write_text_file(dir / (stem + ".result.json"), j.dump(2) + "\n");
    return;
  }
  std::vector<std::string> files;
  if (crops) {
    const std::string ext = *crops == CloudFormat::kPly ? ".ply" : ".csv";
    const fs::path crop_dir = dir / (stem + "_crops");
    fs::create_directories(crop_dir);
    const OrderedNodes& on = run.result.ordered_nodes;
    for (std::size_t k = 0; k < on.order.size(); ++k) {
      std::ostringstream name;
      name << "node_" << std::setw(2) << std::setfill('0') << k << ext;
      write_cloud(crop_dir / name.str(), on.nodes.nodes[on.order[k]].crop, *crops);
      files.push_back((fs::path(stem + "_crops") / name.str()).generic_string());
    }
  }
  write_text_file(dir / (stem + ".result.json"), pipeline_result_to_json(run.result, files) + "\n");
}

// --------------------------------------------------------------------------
// Evaluation helpers

struct Demo {
  std::string name;
  GroundTruth truth;
  std::optional<ResultSummary> result;  // empty when the run failed or is missing
};

struct Aligned {
  std::vector<std::optional<Pose>> predicted;  // canonical truth order
  std::vector<Pose> truth;
  double detection = 0.0;
};

// Matches detected nodes to truth nodes; each truth pose gets the tying pose
// of its matched detection, or nothing.
Aligned align(const Demo& d, double match_radius) {
  Aligned a;
  std::vector<Vec3> truth_nodes;
  for (std::size_t idx : d.truth.canonical_order) {
    truth_nodes.push_back(d.truth.node_positions[idx]);
    a.truth.push_back(d.truth.tying_poses[idx]);
  }
  a.predicted.assign(a.truth.size(), std::nullopt);
  if (!d.result) return a;
  const NodeMatch m = match_nodes(d.result->ordered_nodes, truth_nodes, match_radius);
  a.detection = m.rate;
  for (std::size_t t = 0; t < truth_nodes.size(); ++t) {
    if (m.truth_to_detected[t]) a.predicted[t] = d.result->tying_poses.at(*m.truth_to_detected[t]);
  }
  return a;
}

std::vector<fs::path> expand(const std::vector<std::string>& inputs, const std::string& suffix) {
  std::vector<fs::path> out;
  for (const std::string& in : inputs) {
    const fs::path p(in);
    if (fs::is_directory(p)) {
      std::vector<fs::path> found;
      for (const auto& e : fs::directory_iterator(p)) {
        const std::string name = e.path().filename().string();
        if (e.is_regular_file() && name.size() > suffix.size() &&
            name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0) {
          found.push_back(e.path());
        }
      }
      std::sort(found.begin(), found.end());
      out.insert(out.end(), found.begin(), found.end());
    } else {
      out.push_back(p);
    }
  }
  return out;
}

// Pairs truth files with result files by stem (scene_0001.truth.json with
// scene_0001.result.json). Truths without a usable result count as missed.
std::vector<Demo> load_demos(const std::vector<std::string>& results,
                             const std::vector<std::string>& truths) {
  std::map<std::string, fs::path> by_stem;
  for (const fs::path& p : expand(results, ".result.json")) {
    by_stem[strip_suffix(p.filename().string(), ".result.json")] = p;
  }
  std::vector<Demo> demos;
  for (const fs::path& p : expand(truths, ".truth.json")) {
    Demo d;
    d.name = strip_suffix(p.filename().string(), ".truth.json");
    d.truth = load_ground_truth(p);
    const auto it = by_stem.find(d.name);
    if (it != by_stem.end()) {
      const json j = json::parse(read_text_file(it->second), nullptr, false);
      if (!j.is_discarded() && !j.contains("error")) d.result = load_result_summary(it->second);
    }
    demos.push_back(std::move(d));
  }
  if (demos.empty()) throw Error(ErrorCode::kConfig, "no truth files given");
  return demos;
}

struct Metrics {
  EvalReport report;
  double mean_detection = 0.0;
};

Metrics score(const std::vector<Demo>& demos, const EvalConfig& cfg) {
  std::vector<std::vector<std::optional<Pose>>> predicted;
  PoseSets truth;
  Metrics m;
  for (const Demo& d : demos) {
    Aligned a = align(d, cfg.match_radius);
    m.mean_detection += a.detection;
    predicted.push_back(std::move(a.predicted));
    truth.push_back(std::move(a.truth));
  }
  m.mean_detection /= static_cast<double>(demos.size());
  m.report = evaluate(predicted, truth, cfg);
  return m;
}

json metrics_json(const Metrics& m, const std::vector<Demo>& demos, const EvalConfig& cfg) {
  json j = json::parse(eval_report_to_json(m.report));
  j["mean_node_detection_rate"] = m.mean_detection;
  j["t_g"] = cfg.t_g;
  j["gamma"] = cfg.gamma;
  json names = json::array();
  for (const Demo& d : demos) names.push_back(d.name);
  j["demo_names"] = names;
  return j;
}

std::vector<double> parse_thresholds(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || !(v > 0.0)) throw Error(ErrorCode::kConfig, "bad threshold '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw Error(ErrorCode::kConfig, "no thresholds given");
  return out;
}

// --------------------------------------------------------------------------
// Subcommands

int cmd_gen(const CommonOptions& o, const std::string& spec_path, std::size_t scenes) {
  const std::vector<SceneSpec> specs = load_scene_specs(spec_path);
  const CloudFormat fmt = parse_cloud_format(o.format);
  const std::string ext = fmt == CloudFormat::kPly ? ".ply" : ".csv";
  const fs::path dir(o.out_dir);
  fs::create_directories(dir);
  write_cloud(dir / ("tool" + ext), tool_template(), fmt);

  std::vector<SceneSpec> jobs;
  for (const SceneSpec& s : specs) {
    for (std::size_t k = 0; k < scenes; ++k) {
      SceneSpec spec = s;
      spec.seed = (o.seed ? *o.seed : s.seed) + k;
      jobs.push_back(spec);
    }
  }
  std::vector<std::string> rows(jobs.size());
  parallel_for(jobs.size(), o.jobs, [&](std::size_t i) {
    const Scene scene = generate_scene(jobs[i]);
    const std::string stem = scene_name(i);
    write_cloud(dir / (stem + ext), scene.scene, fmt);
    write_text_file(dir / (stem + ".truth.json"), ground_truth_to_json(scene.truth, jobs[i]) + "\n");
    std::ostringstream row;
    row << stem << ',' << jobs[i].seed << ',' << scene.truth.node_positions.size() << ','
        << scene.scene.size() << ',' << jobs[i].n_obstacles << ',' << scene.truth.noise_sigma;
    rows[i] = row.str();
  });
  std::ofstream manifest(dir / "manifest.csv");
  manifest << "scene,seed,nodes,points,obstacles,noise_sigma\n";
  for (const std::string& r : rows) manifest << r << '\n';
  std::cout << "wrote " << jobs.size() << " scenes to " << dir.string() << '\n';
  return kExitOk;
}

int cmd_detect(const CommonOptions& o, const std::vector<std::string>& inputs,
               const std::string& tool_path, bool no_crops) {
  PipelineConfig config = load_config(o);
  const CloudFormat fmt = parse_cloud_format(o.format);
  const PointCloud tool = tool_path.empty() ? tool_template() : read_cloud(tool_path);
  const fs::path dir(o.out_dir);
  fs::create_directories(dir);
  if (inputs.size() == 1) config.jobs = o.jobs;  // one scene: parallelize inside it

  std::vector<RunOutcome> runs(inputs.size());
  parallel_for(inputs.size(), inputs.size() == 1 ? 1 : o.jobs, [&](std::size_t i) {
    PointCloud scene;
    try {
      scene = read_cloud(inputs[i]);
    } catch (const Error& e) {
      runs[i].stage = "input";
      runs[i].error = e.what();
      runs[i].code = e.code();
      return;
    }
    runs[i] = run_one(scene, tool, config);
    write_result(dir, fs::path(inputs[i]).stem().string(), runs[i],
                 no_crops ? std::nullopt : std::optional<CloudFormat>(fmt));
  });

  std::ofstream csv(dir / "detect.csv");
  csv << "input,status,stage,nodes,selected_cluster,rebar_points,ms,error\n";
  int failed = 0;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const RunOutcome& r = runs[i];
    failed += !r.ok;
    csv << csv_escape(inputs[i]) << ',' << (r.ok ? "ok" : "error") << ',' << r.stage << ','
        << (r.ok ? r.result.tying_poses.size() : 0) << ',' << (r.ok ? r.result.selected_cluster : -1)
        << ',' << (r.ok ? r.result.rebar_points : 0) << ',' << r.ms << ',' << csv_escape(r.error)
        << '\n';
    if (!r.ok) std::cerr << inputs[i] << ": " << r.error << '\n';
  }
  std::cout << inputs.size() - failed << "/" << inputs.size() << " inputs processed\n";
  return failed == 0 ? kExitOk : kExitStage;
}

int cmd_eval(const CommonOptions& o, const std::vector<std::string>& results,
             const std::vector<std::string>& truths, std::optional<double> t_g) {
  PipelineConfig config = load_config(o);
  if (t_g) config.eval.t_g = *t_g;
  config.eval.validate();
  const std::vector<Demo> demos = load_demos(results, truths);
  const Metrics m = score(demos, config.eval);
  const fs::path dir(o.out_dir);
  fs::create_directories(dir);
  write_text_file(dir / "eval.json", metrics_json(m, demos, config.eval).dump(2) + "\n");
  std::cout << "R_s " << m.report.success_rate << "  E_r " << m.report.prediction_error
            << "  node detection " << m.mean_detection << "  (" << demos.size() << " demos)\n";
  return kExitOk;
}

int cmd_sweep(const CommonOptions& o, const std::vector<std::string>& results,
              const std::vector<std::string>& truths, const std::string& thresholds_text) {
  PipelineConfig config = load_config(o);
  std::vector<double> thresholds = parse_thresholds(thresholds_text);
  std::sort(thresholds.begin(), thresholds.end());
  const std::vector<Demo> demos = load_demos(results, truths);
  const fs::path dir(o.out_dir);
  fs::create_directories(dir);
  std::ofstream csv(dir / "sweep.csv");
  csv << "t_g,success_rate\n";
  for (double t : thresholds) {
    EvalConfig cfg = config.eval;
    cfg.t_g = t;
    csv << t << ',' << score(demos, cfg).report.success_rate << '\n';
  }
  std::cout << "wrote " << thresholds.size() << " thresholds to " << (dir / "sweep.csv").string() << '\n';
  return kExitOk;
}

struct DemoOptions {
  int rows = 2, cols = 2;
  std::size_t obstacles = 0;
  double noise_max = 0.0;
  std::size_t scenes = 50;
  bool save_clouds = false;
};

int cmd_demo(const CommonOptions& o, const DemoOptions& d) {
  const PipelineConfig config = load_config(o);
  const CloudFormat fmt = parse_cloud_format(o.format);
  const std::uint64_t base = o.seed.value_or(0);
  const fs::path dir(o.out_dir);
  fs::create_directories(dir);

  std::vector<Demo> demos(d.scenes);
  std::vector<RunOutcome> runs(d.scenes);
  parallel_for(d.scenes, o.jobs, [&](std::size_t i) {
    SceneSpec spec;
    spec.grid.rows = d.rows;
    spec.grid.cols = d.cols;
    spec.n_obstacles = d.obstacles;
    spec.noise_sigma_max = d.noise_max;
    spec.seed = base + i;
    spec.validate();
    const Scene scene = generate_scene(spec);
    PipelineConfig c = config;
    c.seed = spec.seed;
    c.jobs = 1;
    runs[i] = run_one(scene.scene, scene.tool, c);
    const std::string stem = scene_name(i);
    if (d.save_clouds) {
      write_cloud(dir / (stem + (fmt == CloudFormat::kPly ? ".ply" : ".csv")), scene.scene, fmt);
    }
    write_text_file(dir / (stem + ".truth.json"), ground_truth_to_json(scene.truth, spec) + "\n");
    write_result(dir, stem, runs[i], d.save_clouds ? std::optional<CloudFormat>(fmt) : std::nullopt);
    demos[i].name = stem;
    demos[i].truth = scene.truth;
    if (runs[i].ok) {
      ResultSummary s;
      s.tying_poses = runs[i].result.tying_poses;
      s.ordered_nodes = runs[i].result.ordered_nodes.ordered_centroids();
      demos[i].result = s;
    }
  });

  const Metrics m = score(demos, config.eval);
  std::ofstream csv(dir / "demo.csv");
  csv << "scene,seed,status,stage,detected,truth_nodes,detection_rate,order_correct,successes,ms\n";
  int ordered = 0, errors = 0;
  for (std::size_t i = 0; i < d.scenes; ++i) {
    const Aligned a = align(demos[i], config.eval.match_radius);
    bool order_ok = false;
    if (demos[i].result && demos[i].result->ordered_nodes.size() == a.truth.size()) {
      // Slot k must match the k-th canonical truth node.
      std::vector<Vec3> truth_nodes;
      for (std::size_t idx : demos[i].truth.canonical_order) truth_nodes.push_back(demos[i].truth.node_positions[idx]);
      const NodeMatch nm = match_nodes(demos[i].result->ordered_nodes, truth_nodes, config.eval.match_radius);
      order_ok = nm.matched == truth_nodes.size();
      for (std::size_t t = 0; t < truth_nodes.size() && order_ok; ++t) order_ok = *nm.truth_to_detected[t] == t;
    }
    ordered += order_ok;
    errors += !runs[i].ok;
    csv << demos[i].name << ',' << base + i << ',' << (runs[i].ok ? "ok" : "error") << ','
        << runs[i].stage << ',' << (demos[i].result ? demos[i].result->ordered_nodes.size() : 0) << ','
        << a.truth.size() << ',' << a.detection << ',' << order_ok << ','
        << m.report.demos[i].n_success << ',' << runs[i].ms << '\n';
  }
  json summary = metrics_json(m, demos, config.eval);
  summary["scenes"] = d.scenes;
  summary["ordering_correct"] = ordered;
  summary["pipeline_errors"] = errors;
  summary["grid"] = {{"rows", d.rows}, {"cols", d.cols}};
  summary["obstacles"] = d.obstacles;
  summary["noise_sigma_max"] = d.noise_max;
  write_text_file(dir / "summary.json", summary.dump(2) + "\n");
  std::cout << "detection " << m.mean_detection << "  ordering " << ordered << "/" << d.scenes
            << "  R_s " << m.report.success_rate << "  E_r " << m.report.prediction_error
            << "  errors " << errors << '\n';
  return kExitOk;
}

void add_common(CLI::App* cmd, CommonOptions& o, bool with_format) {
  cmd->add_option("--config", o.config_path, "Pipeline config JSON")->check(CLI::ExistingFile);
  cmd->add_option("--seed", o.seed, "Base seed");
  cmd->add_option("--out-dir", o.out_dir, "Output directory")->capture_default_str();
  cmd->add_option("--jobs", o.jobs, "Worker threads")->check(CLI::Range(1u, 1024u))->capture_default_str();
  if (with_format) {
    cmd->add_option("--format", o.format, "Cloud output format")
        ->check(CLI::IsMember({"ply", "csv"}, CLI::ignore_case))
        ->capture_default_str();
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rebar node detection, ordering and tying-pose prediction"};
  app.require_subcommand(1);
  CommonOptions common;

  auto* gen = app.add_subcommand("gen", "Generate synthetic scenes from a spec file");
  std::string spec_path;
  std::size_t scenes = 1;
  gen->add_option("spec", spec_path, "Scene spec JSON (object or array)")->required()->check(CLI::ExistingFile);
  gen->add_option("--scenes", scenes, "Scenes per spec, seeds seed..seed+n-1")->check(CLI::PositiveNumber)->capture_default_str();
  add_common(gen, common, true);

  auto* detect = app.add_subcommand("detect", "Run the pipeline on PLY/CSV clouds");
  std::vector<std::string> inputs;
  std::string tool_path;
  bool no_crops = false;
  detect->add_option("inputs", inputs, "Scene clouds")->required()->check(CLI::ExistingFile);
  detect->add_option("--tool", tool_path, "Tool cloud (default: built-in template)")->check(CLI::ExistingFile);
  detect->add_flag("--no-crops", no_crops, "Do not write node crops");
  add_common(detect, common, true);

  std::vector<std::string> results, truths;
  std::optional<double> t_g;
  auto* eval = app.add_subcommand("eval", "Success rate and pose error over result and truth files");
  eval->add_option("--results", results, "Result files or directories")->required();
  eval->add_option("--truth", truths, "Truth files or directories")->required();
  eval->add_option("--t-g", t_g, "Success threshold on D_g (overrides config)");
  add_common(eval, common, false);

  auto* sweep = app.add_subcommand("sweep", "Success rate over a range of thresholds");
  std::string thresholds = "0.01,0.02,0.05,0.1,0.2,0.5,1";
  sweep->add_option("--results", results, "Result files or directories")->required();
  sweep->add_option("--truth", truths, "Truth files or directories")->required();
  sweep->add_option("--thresholds", thresholds, "Comma-separated T_g values")->capture_default_str();
  add_common(sweep, common, false);

  auto* demo = app.add_subcommand("demo", "Generate, detect and evaluate a batch of scenes");
  DemoOptions d;
  demo->add_option("--rows", d.rows, "Horizontal bars")->check(CLI::PositiveNumber)->capture_default_str();
  demo->add_option("--cols", d.cols, "Vertical bars")->check(CLI::PositiveNumber)->capture_default_str();
  demo->add_option("--obstacles", d.obstacles, "Background obstacles")->capture_default_str();
  demo->add_option("--noise", d.noise_max, "Max noise sigma, meters")->check(CLI::NonNegativeNumber)->capture_default_str();
  demo->add_option("--scenes", d.scenes, "Number of scenes")->check(CLI::PositiveNumber)->capture_default_str();
  demo->add_flag("--save-clouds", d.save_clouds, "Write scene clouds and node crops");
  add_common(demo, common, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*gen) return cmd_gen(common, spec_path, scenes);
    if (*detect) return cmd_detect(common, inputs, tool_path, no_crops);
    if (*eval) return cmd_eval(common, results, truths, t_g);
    if (*sweep) return cmd_sweep(common, results, truths, thresholds);
    if (*demo) return cmd_demo(common, d);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    const ErrorCode c = e.code();
    const bool config_error = c == ErrorCode::kConfig || c == ErrorCode::kSpecInvalid ||
                              c == ErrorCode::kInvalidParams;
    return config_error ? kExitConfig : kExitStage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitStage;
  }
  return kExitOk;
}
