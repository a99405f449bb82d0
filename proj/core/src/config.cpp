#include "rebartie/config.hpp"

#include <cmath>

#include "detail/json_util.hpp"
#include "rebartie/json_io.hpp"

namespace rebartie {

using detail::check_keys;
using detail::json;
using detail::read;
using detail::read_vec;
using detail::vec_to_json;

namespace {

template <typename F>
void check(const char* field, F&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    throw Error(ErrorCode::kConfig, std::string(field) + ": " + e.message());
  }
}

void fail_if(bool bad, const std::string& what) {
  if (bad) throw Error(ErrorCode::kConfig, what);
}

DbscanParams dbscan_from(const json& j, DbscanParams d, const std::string& where) {
  check_keys(j, {"eps", "min_pts"}, where);
  read(j, "eps", d.eps, where);
  read(j, "min_pts", d.min_pts, where);
  return d;
}

json dbscan_to(const DbscanParams& d) { return {{"eps", d.eps}, {"min_pts", d.min_pts}}; }

int axis_from(const std::string& s, const std::string& where) {
  if (s == "x") return 0;
  if (s == "y") return 1;
  if (s == "z") return 2;
  throw Error(ErrorCode::kConfig, where + ": axis must be x, y or z");
}

const char* axis_name(int a) { return a == 0 ? "x" : (a == 1 ? "y" : "z"); }

}  // namespace

void PipelineConfig::validate() const {
  check("dbscan", [&] { dbscan.validate(); });
  check("filter", [&] { filter.validate(); });
  check("split", [&] { split.validate(); });
  check("line_support", [&] { line_support.validate(); });
  check("sampler", [&] { sampler.validate(); });
  check("eval", [&] { eval.validate(); });
  fail_if(!(crop_radius > 0.0), "crop_radius must be > 0");
  fail_if(!(reference_radius > 0.0), "reference_radius must be > 0");
  fail_if(!(search_radius > 0.0), "search_radius must be > 0");
  fail_if(!(standoff >= 0.0) || !std::isfinite(standoff), "standoff must be >= 0");
  fail_if(!(up.norm() > 0.0) || !up.allFinite(), "up must be a finite nonzero vector");
  fail_if(!viewpoint.allFinite(), "viewpoint must be finite");
  fail_if(!(frame.eigen_gap_tol >= 0.0 && frame.eigen_gap_tol < 1.0),
          "frame.eigen_gap_tol must be in [0, 1)");
  fail_if(!(order.tolerance >= 0.0), "order.tolerance must be >= 0");
  for (const SortKey& k : order.keys) {
    fail_if(k.axis < 0 || k.axis > 2 || (k.sign != 1 && k.sign != -1),
            "order.keys: invalid axis or sign");
  }
  fail_if(!(score_sigma_rot > 0.0 && score_sigma_trans > 0.0),
          "sampler score sigmas must be > 0");
  fail_if(jobs < 1, "jobs must be >= 1");
}

PipelineConfig parse_pipeline_config(const std::string& json_text) {
  const json j = detail::parse_text(json_text, "config");
  const std::string w = "config";
  check_keys(j, {"dbscan", "filter", "split", "line_support", "crop_radius", "reference_radius",
                 "search_radius", "standoff", "up", "viewpoint", "frame", "order",
                 "sampler", "eval", "seed", "jobs"},
             w);
  PipelineConfig c;
  if (j.contains("dbscan")) c.dbscan = dbscan_from(j["dbscan"], c.dbscan, w + ".dbscan");
  if (j.contains("split")) c.split = dbscan_from(j["split"], c.split, w + ".split");
  if (j.contains("filter")) {
    const json& f = j["filter"];
    const std::string fw = w + ".filter";
    check_keys(f, {"r_eps", "r_res", "p_res", "min_neighbors", "rng_seed"}, fw);
    read(f, "r_eps", c.filter.r_eps, fw);
    read(f, "r_res", c.filter.r_res, fw);
    read(f, "p_res", c.filter.p_res, fw);
    read(f, "min_neighbors", c.filter.min_neighbors, fw);
    read(f, "rng_seed", c.filter.rng_seed, fw);
  }
  if (j.contains("line_support")) {
    const json& l = j["line_support"];
    const std::string lw = w + ".line_support";
    check_keys(l, {"radius", "line_cos", "min_fraction", "min_neighbors"}, lw);
    read(l, "radius", c.line_support.radius, lw);
    read(l, "line_cos", c.line_support.line_cos, lw);
    read(l, "min_fraction", c.line_support.min_fraction, lw);
    read(l, "min_neighbors", c.line_support.min_neighbors, lw);
  }
  read(j, "crop_radius", c.crop_radius, w);
  read(j, "reference_radius", c.reference_radius, w);
  read(j, "search_radius", c.search_radius, w);
  read(j, "standoff", c.standoff, w);
  read_vec(j, "up", c.up, w);
  read_vec(j, "viewpoint", c.viewpoint, w);
  if (j.contains("frame")) {
    check_keys(j["frame"], {"eigen_gap_tol"}, w + ".frame");
    read(j["frame"], "eigen_gap_tol", c.frame.eigen_gap_tol, w + ".frame");
  }
  if (j.contains("order")) {
    const json& o = j["order"];
    const std::string ow = w + ".order";
    check_keys(o, {"tolerance", "keys"}, ow);
    read(o, "tolerance", c.order.tolerance, ow);
    if (o.contains("keys")) {
      const json& ks = o["keys"];
      fail_if(!ks.is_array() || ks.size() != 3, ow + ".keys: expected 3 entries");
      for (std::size_t i = 0; i < 3; ++i) {
        const std::string kw = ow + ".keys[" + std::to_string(i) + "]";
        check_keys(ks[i], {"axis", "sign"}, kw);
        std::string axis = axis_name(c.order.keys[i].axis);
        read(ks[i], "axis", axis, kw);
        c.order.keys[i].axis = axis_from(axis, kw);
        read(ks[i], "sign", c.order.keys[i].sign, kw);
      }
    }
  }
  if (j.contains("sampler")) {
    const json& s = j["sampler"];
    const std::string sw = w + ".sampler";
    check_keys(s, {"steps", "t_start", "t_end", "dt", "sigma_rot", "sigma_trans", "decay",
                   "n_chains", "seed", "score_sigma_rot", "score_sigma_trans", "init"},
               sw);
    AnnealSchedule& a = c.sampler.schedule;
    read(s, "steps", a.steps, sw);
    read(s, "t_start", a.t_start, sw);
    read(s, "t_end", a.t_end, sw);
    read(s, "dt", a.dt, sw);
    read(s, "sigma_rot", a.sigma_rot, sw);
    read(s, "sigma_trans", a.sigma_trans, sw);
    std::string decay = a.decay == NoiseDecay::kGeometric ? "geometric" : "linear";
    read(s, "decay", decay, sw);
    fail_if(decay != "linear" && decay != "geometric", sw + ".decay: linear or geometric");
    a.decay = decay == "geometric" ? NoiseDecay::kGeometric : NoiseDecay::kLinear;
    read(s, "n_chains", c.sampler.n_chains, sw);
    read(s, "seed", c.sampler.seed, sw);
    read(s, "score_sigma_rot", c.score_sigma_rot, sw);
    read(s, "score_sigma_trans", c.score_sigma_trans, sw);
    if (s.contains("init")) c.sampler_init = detail::pose_from_json(s["init"], sw + ".init");
  }
  if (j.contains("eval")) {
    const json& e = j["eval"];
    const std::string ew = w + ".eval";
    check_keys(e, {"gamma", "t_g", "match_radius", "metric"}, ew);
    read(e, "gamma", c.eval.gamma, ew);
    read(e, "t_g", c.eval.t_g, ew);
    read(e, "match_radius", c.eval.match_radius, ew);
    std::string metric = c.eval.metric == TranslationMetric::kSquared ? "squared" : "euclidean";
    read(e, "metric", metric, ew);
    fail_if(metric != "euclidean" && metric != "squared", ew + ".metric: euclidean or squared");
    c.eval.metric = metric == "squared" ? TranslationMetric::kSquared : TranslationMetric::kEuclidean;
  }
  read(j, "seed", c.seed, w);
  read(j, "jobs", c.jobs, w);
  c.validate();
  return c;
}

PipelineConfig load_pipeline_config(const std::filesystem::path& path) {
  return parse_pipeline_config(read_text_file(path));
}

std::string pipeline_config_to_json(const PipelineConfig& c) {
  json keys = json::array();
  for (const SortKey& k : c.order.keys) keys.push_back({{"axis", axis_name(k.axis)}, {"sign", k.sign}});
  const AnnealSchedule& a = c.sampler.schedule;
  json j = {
      {"dbscan", dbscan_to(c.dbscan)},
      {"filter",
       {{"r_eps", c.filter.r_eps},
        {"r_res", c.filter.r_res},
        {"p_res", c.filter.p_res},
        {"min_neighbors", c.filter.min_neighbors},
        {"rng_seed", c.filter.rng_seed}}},
      {"split", dbscan_to(c.split)},
      {"line_support",
       {{"radius", c.line_support.radius},
        {"line_cos", c.line_support.line_cos},
        {"min_fraction", c.line_support.min_fraction},
        {"min_neighbors", c.line_support.min_neighbors}}},
      {"crop_radius", c.crop_radius},
      {"reference_radius", c.reference_radius},
      {"search_radius", c.search_radius},
      {"standoff", c.standoff},
      {"up", vec_to_json(c.up)},
      {"viewpoint", vec_to_json(c.viewpoint)},
      {"frame", {{"eigen_gap_tol", c.frame.eigen_gap_tol}}},
      {"order", {{"tolerance", c.order.tolerance}, {"keys", keys}}},
      {"sampler",
       {{"steps", a.steps},
        {"t_start", a.t_start},
        {"t_end", a.t_end},
        {"dt", a.dt},
        {"sigma_rot", a.sigma_rot},
        {"sigma_trans", a.sigma_trans},
        {"decay", a.decay == NoiseDecay::kGeometric ? "geometric" : "linear"},
        {"n_chains", c.sampler.n_chains},
        {"seed", c.sampler.seed},
        {"score_sigma_rot", c.score_sigma_rot},
        {"score_sigma_trans", c.score_sigma_trans},
        {"init", detail::pose_json(c.sampler_init)}}},
      {"eval",
       {{"gamma", c.eval.gamma},
        {"t_g", c.eval.t_g},
        {"match_radius", c.eval.match_radius},
        {"metric", c.eval.metric == TranslationMetric::kSquared ? "squared" : "euclidean"}}},
      {"seed", c.seed},
      {"jobs", c.jobs},
  };
  return j.dump(2);
}

}  // namespace rebartie
