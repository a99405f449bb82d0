#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "rebartie/clustering.hpp"
#include "rebartie/config.hpp"
#include "rebartie/error.hpp"
#include "rebartie/node_ordering.hpp"
#include "rebartie/point_cloud.hpp"
#include "rebartie/pose_sampling.hpp"

namespace rebartie {

/// Stage error carrying the name of the stage that failed.
class PipelineError : public Error {
 public:
  PipelineError(std::string stage, const Error& cause);
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

struct PreDetection {
  Pose t_prev;    // motion from sampler_init to pose_prev, world frame
  Pose pose_prev;
  Pose target;    // pose the score field pulls toward
  std::size_t candidate_index = 0;
  SampleResult sample;
};

/// Picks the mask-passing point nearest the scene centroid, builds a tool pose
/// facing it and runs the sampler toward that pose. Throws NoCandidateNode.
PreDetection pre_detect(const PointCloud& scene, const PointCloud& tool,
                        const PipelineConfig& config);

struct StageTiming {
  std::string stage;
  double ms = 0.0;
};

struct PipelineResult {
  Pose t_prev;
  Pose pose_prev;
  int selected_cluster = -1;
  std::size_t rebar_points = 0;
  ClusterLabeling labeling;
  Frame coarse_frame;
  OrderedNodes ordered_nodes;
  std::vector<Pose> tying_poses;  // canonical order
  std::vector<StageTiming> timings;
};

/// Extraction, frame, ordering and pose stages on an already isolated rebar
/// cloud. Fills ordered_nodes, coarse_frame and tying_poses.
void process_rebar_cloud(const PointCloud& rebar, const Pose& pose_prev,
                         const PipelineConfig& config, PipelineResult& result);

PipelineResult run_pipeline(const PointCloud& scene, const PointCloud& tool,
                            const PipelineConfig& config);

}  // namespace rebartie
