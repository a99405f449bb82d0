#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "rebartie/evaluation.hpp"
#include "rebartie/node_ordering.hpp"
#include "rebartie/scene.hpp"
#include "rebartie/se3.hpp"

namespace rebartie {

struct PipelineResult;

// Poses serialize as {"q": [w, x, y, z], "t": [x, y, z]}, q canonical.

std::string pose_to_json(const Pose& pose);
Pose parse_pose(const std::string& json_text);

/// Strict parse: unknown keys throw Config.
SceneSpec parse_scene_spec(const std::string& json_text);
std::string scene_spec_to_json(const SceneSpec& spec);
/// A spec file holds one spec object or an array of them.
std::vector<SceneSpec> load_scene_specs(const std::filesystem::path& path);

std::string ground_truth_to_json(const GroundTruth& truth, const SceneSpec& spec);
GroundTruth parse_ground_truth(const std::string& json_text);
GroundTruth load_ground_truth(const std::filesystem::path& path);

/// `crop_files[i]` names the crop of node i; may be empty.
std::string pipeline_result_to_json(const PipelineResult& result,
                                    std::span<const std::string> crop_files = {});

/// The parts of a result file used for evaluation.
struct ResultSummary {
  std::vector<Pose> tying_poses;    // canonical order
  std::vector<Vec3> ordered_nodes;  // centroids, canonical order
};
ResultSummary parse_result_summary(const std::string& json_text);
ResultSummary load_result_summary(const std::filesystem::path& path);

std::string eval_report_to_json(const EvalReport& report);

/// One pose object per line.
void write_trajectory_jsonl(const std::filesystem::path& path,
                            std::span<const Pose> poses);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace rebartie
