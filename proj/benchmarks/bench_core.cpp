#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "crowdnav/baselines.hpp"
#include "crowdnav/gridmap.hpp"
#include "crowdnav/memory.hpp"
#include "crowdnav/planner.hpp"
#include "crowdnav/tracking.hpp"

using namespace crowdnav;

namespace {

MixtureModel crowd(int people, double side, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> pos(0.0, side);
  std::vector<Vec2> means;
  for (int k = 0; k < people; ++k) means.emplace_back(pos(rng), pos(rng));
  return MixtureModel::equal_weight(means, Mat2::Identity() * 0.25);
}

std::vector<Obstacle> obstacles(int count, double side, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> pos(2.0, side - 2.0), rad(0.25, 0.75);
  std::vector<Obstacle> out;
  for (int k = 0; k < count; ++k) out.push_back({Vec2(pos(rng), pos(rng)), rad(rng)});
  return out;
}

void BM_Rasterize(benchmark::State& state) {
  const GridSpec spec(20.0, static_cast<int>(state.range(0)));
  const auto model = crowd(static_cast<int>(state.range(1)), 20.0, 1);
  for (auto _ : state) benchmark::DoNotOptimize(rasterize_normalize(model, spec));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(spec.cell_count()));
}
BENCHMARK(BM_Rasterize)->Args({80, 30})->Args({80, 100})->Args({160, 100});

void BM_FuseLayers(benchmark::State& state) {
  const GridSpec spec(20.0, static_cast<int>(state.range(0)));
  const auto wm = MemoryLayer::working(rasterize_normalize(crowd(40, 20.0, 2), spec), footprint_all(spec));
  const auto olm = MemoryLayer::full(rasterize_normalize(crowd(40, 20.0, 3), spec), LayerKind::OLM);
  FusionConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(fuse_layers(wm, olm, 0.3, cfg));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(spec.cell_count()));
}
BENCHMARK(BM_FuseLayers)->Arg(80)->Arg(160);

void BM_KalmanStep(benchmark::State& state) {
  SensorModel s;
  auto t = init_track(Vec2::Zero(), s);
  double x = 0.0;
  for (auto _ : state) {
    x += 0.1;
    t = kf_step(t, Vec2(x, 0.5 * x), s);
    benchmark::DoNotOptimize(t);
  }
}
BENCHMARK(BM_KalmanStep);

void BM_SolveSubproblem(benchmark::State& state) {
  const GridSpec spec(20.0, 80);
  const auto fm = rasterize_normalize(crowd(60, 20.0, 4), spec);
  const auto obs = obstacles(static_cast<int>(state.range(0)), 20.0, 5);
  PlannerParams p;
  std::uint64_t seed = 0;
  for (auto _ : state) {
    try {
      benchmark::DoNotOptimize(solve_subproblem(Vec2(1, 1), Vec2(19, 19), fm, obs, p, ++seed));
    } catch (const SubproblemInfeasible&) {
    }
  }
}
BENCHMARK(BM_SolveSubproblem)->Arg(0)->Arg(15)->Unit(benchmark::kMillisecond);

void BM_Plan(benchmark::State& state) {
  const GridSpec spec(20.0, 80);
  const auto fm = rasterize_normalize(crowd(60, 20.0, 6), spec);
  const auto obs = obstacles(15, 20.0, 7);
  PlannerParams p;
  for (auto _ : state) benchmark::DoNotOptimize(plan(Vec2(1, 1), Vec2(19, 19), fm, obs, p, 9));
}
BENCHMARK(BM_Plan)->Unit(benchmark::kMillisecond);

void BM_AStar(benchmark::State& state) {
  const GridSpec spec(20.0, static_cast<int>(state.range(0)));
  const auto cong = rasterize_normalize(crowd(60, 20.0, 8), spec);
  const auto obs = obstacles(15, 20.0, 9);
  const GridGraph graph(spec, obs, 0.3, &cong);
  const double lambda = state.range(1) ? preset_lambda(CongestionPreset::CG2, spec) : 0.0;
  for (auto _ : state) benchmark::DoNotOptimize(congestion_astar(graph, Vec2(0.5, 0.5), Vec2(19.5, 19.5), lambda));
}
BENCHMARK(BM_AStar)->Args({80, 0})->Args({80, 1})->Args({160, 1});

}  // namespace

BENCHMARK_MAIN();
