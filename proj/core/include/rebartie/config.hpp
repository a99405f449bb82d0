#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "rebartie/clustering.hpp"
#include "rebartie/evaluation.hpp"
#include "rebartie/node_extraction.hpp"
#include "rebartie/node_ordering.hpp"
#include "rebartie/pose_sampling.hpp"

namespace rebartie {

struct PipelineConfig {
  DbscanParams dbscan{0.02, 10};
  OrthoFilterParams filter;
  DbscanParams split{0.02, 10};
  LineSupportParams line_support;
  double crop_radius = 0.09;
  double reference_radius = 0.2;
  double search_radius = 0.02;
  double standoff = 0.15;
  Vec3 up = Vec3::UnitZ();
  Vec3 viewpoint = Vec3::Zero();  // sensor position, orients surface normals
  FrameOptions frame;
  OrderOptions order;
  SamplerConfig sampler;
  Pose sampler_init;
  double score_sigma_rot = 0.25;
  double score_sigma_trans = 0.25;
  EvalConfig eval;
  std::uint64_t seed = 0;
  unsigned jobs = 1;

  /// Throws Config with the offending field named.
  void validate() const;
};

/// Parses a JSON document; missing keys keep their defaults, unknown keys and
/// type errors throw Config.
PipelineConfig parse_pipeline_config(const std::string& json_text);
PipelineConfig load_pipeline_config(const std::filesystem::path& path);
std::string pipeline_config_to_json(const PipelineConfig& config);

}  // namespace rebartie
