#include <benchmark/benchmark.h>

#include "rebartie/clustering.hpp"
#include "rebartie/kdtree.hpp"
#include "rebartie/node_extraction.hpp"
#include "rebartie/pipeline.hpp"
#include "rebartie/pose_sampling.hpp"
#include "rebartie/scene.hpp"

namespace {

using namespace rebartie;

Scene grid_scene(int side, std::size_t obstacles = 0) {
  SceneSpec spec;
  spec.grid.rows = spec.grid.cols = side;
  spec.n_obstacles = obstacles;
  spec.seed = 1;
  return generate_scene(spec);
}

void BM_KdTreeBuild(benchmark::State& state) {
  const Scene s = grid_scene(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    KdTree tree(s.scene.points);
    benchmark::DoNotOptimize(tree.size());
  }
  state.counters["points"] = static_cast<double>(s.scene.size());
}
BENCHMARK(BM_KdTreeBuild)->Arg(2)->Arg(4)->Arg(6)->Unit(benchmark::kMillisecond);

void BM_KdTreeRadiusSearch(benchmark::State& state) {
  const Scene s = grid_scene(4);
  const KdTree tree(s.scene.points);
  std::vector<std::size_t> hits;
  std::size_t i = 0;
  for (auto _ : state) {
    tree.radius_search(s.scene.points[i], 0.08, hits);
    benchmark::DoNotOptimize(hits.data());
    i = (i + 97) % s.scene.size();
  }
}
BENCHMARK(BM_KdTreeRadiusSearch);

void BM_Dbscan(benchmark::State& state) {
  const Scene s = grid_scene(static_cast<int>(state.range(0)), 4);
  for (auto _ : state) benchmark::DoNotOptimize(dbscan(s.scene, {0.02, 10}).n_clusters);
  state.counters["points"] = static_cast<double>(s.scene.size());
}
BENCHMARK(BM_Dbscan)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_OrthogonalMask(benchmark::State& state) {
  const Scene s = grid_scene(4);
  const unsigned jobs = static_cast<unsigned>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(orthogonal_feature_mask(s.scene, OrthoFilterParams{}, jobs).data());
  }
}
BENCHMARK(BM_OrthogonalMask)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_AnnealSample(benchmark::State& state) {
  const Pose target{UnitQuaternion::from_axis_angle(Vec3::UnitZ(), 0.8), Vec3(0.3, 0.2, 0.1)};
  const ScoreField field = analytic_gaussian_score(target, 0.5, 0.5);
  SamplerConfig config;
  config.n_chains = static_cast<std::size_t>(state.range(0));
  const PointCloud none;
  for (auto _ : state) {
    benchmark::DoNotOptimize(anneal_sample(Pose::identity(), field, config, none, none).best);
  }
}
BENCHMARK(BM_AnnealSample)->Arg(8)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_RunPipeline(benchmark::State& state) {
  const Scene s = grid_scene(static_cast<int>(state.range(0)), 4);
  const PipelineConfig config;
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_pipeline(s.scene, s.tool, config).tying_poses.size());
  }
  state.counters["nodes"] = static_cast<double>(s.truth.node_positions.size());
}
BENCHMARK(BM_RunPipeline)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
