#include <benchmark/benchmark.h>

#include "scenforge/dedup.hpp"
#include "scenforge/evolution.hpp"
#include "scenforge/simulator.hpp"
#include "scenforge/stats.hpp"

using namespace scenforge;

namespace {

const std::string kGridPath = std::string(SCENFORGE_MAPS_DIR) + "/grid_3x3.json";

void BM_PolygonDistance(benchmark::State& state) {
  Rng rng(1);
  std::vector<std::pair<PolygonPose, PolygonPose>> pairs;
  for (int i = 0; i < 512; ++i) {
    pairs.push_back({{{rng.uniform(-15, 15), rng.uniform(-15, 15)},
                      rng.uniform(-3, 3), rng.uniform(0.3, 8), rng.uniform(0.3, 3)},
                     {{rng.uniform(-15, 15), rng.uniform(-15, 15)},
                      rng.uniform(-3, 3), rng.uniform(0.3, 8), rng.uniform(0.3, 3)}});
  }
  std::size_t i = 0;
  for (auto _ : state) {
    const auto& [a, b] = pairs[i++ & 511];
    benchmark::DoNotOptimize(polygon_distance(a, b));
  }
}
BENCHMARK(BM_PolygonDistance);

void BM_ShortestRoute(benchmark::State& state) {
  const LaneMap map = LaneMap::load(kGridPath);
  Rng rng(2);
  std::vector<std::pair<MapPoint, MapPoint>> pairs;
  for (int i = 0; i < 128; ++i) {
    const auto& lanes = map.lanes();
    const Lane& a = lanes[rng.uniform_int(lanes.size())];
    const Lane& b = lanes[rng.uniform_int(lanes.size())];
    pairs.push_back({map.point_at(a.id, rng.uniform(1, a.length() - 1)),
                     map.point_at(b.id, rng.uniform(1, b.length() - 1))});
  }
  std::size_t i = 0;
  for (auto _ : state) {
    const auto& [src, dst] = pairs[i++ & 127];
    benchmark::DoNotOptimize(map.shortest_route(src, dst));
  }
}
BENCHMARK(BM_ShortestRoute);

void BM_Simulate70Obstacles(benchmark::State& state) {
  const LaneMap map = LaneMap::load(kGridPath);
  const ConstraintTable table = ConstraintTable::defaults();
  Rng rng(3);
  ScenarioGenome s;
  s.id = "bench";
  s.duration = 30.0;
  s.ego_start = {5.0, 200.0};
  s.ego_end = {100.0, 30.0};
  for (int i = 0; i < 70; ++i)
    s.obstacles.push_back(sample_obstacle(table, map, rng, i + 1));
  const PlannerConfig cfg;
  for (auto _ : state) {
    benchmark::DoNotOptimize(simulate(s, map, cfg));
  }
}
BENCHMARK(BM_Simulate70Obstacles)->Unit(benchmark::kMillisecond);

void BM_EvaluateTrace(benchmark::State& state) {
  const LaneMap map = LaneMap::load(kGridPath);
  const ConstraintTable table = ConstraintTable::defaults();
  Rng rng(4);
  ScenarioGenome s;
  s.id = "bench";
  s.duration = 30.0;
  s.ego_start = {5.0, 200.0};
  s.ego_end = {100.0, 30.0};
  for (int i = 0; i < 30; ++i)
    s.obstacles.push_back(sample_obstacle(table, map, rng, i + 1));
  const Trace trace = simulate(s, map, PlannerConfig{});
  const Thresholds th;
  for (auto _ : state) {
    benchmark::DoNotOptimize(evaluate(trace, map, th));
  }
}
BENCHMARK(BM_EvaluateTrace)->Unit(benchmark::kMillisecond);

void BM_Nsga2Select(benchmark::State& state) {
  Rng rng(5);
  std::vector<ObjectiveVector> objs;
  for (int i = 0; i < 100; ++i)
    objs.push_back({rng.uniform(0, 10), rng.uniform(-5, 5), rng.uniform(0, 8),
                    rng.uniform(0, 6), rng.uniform(-7, 0)});
  for (auto _ : state) {
    benchmark::DoNotOptimize(nsga2_select(objs, 50));
  }
}
BENCHMARK(BM_Nsga2Select);

void BM_Dedup2000(benchmark::State& state) {
  Rng rng(6);
  std::vector<Violation> violations;
  for (int i = 0; i < 2000; ++i) {
    Violation v;
    v.kind = rng.chance(0.5) ? ViolationKind::kCollision
                             : ViolationKind::kHardBrake;
    v.t_first = 0.1 * i;
    v.duration = 0.5;
    v.value = -4.5;
    v.ego_position = {5.0 * static_cast<double>(rng.uniform_int(12)) +
                          rng.uniform(-0.3, 0.3),
                      rng.uniform(-0.3, 0.3)};
    v.ego_speed = rng.uniform(0, 15);
    v.ego_heading = rng.uniform(-3, 3);
    v.collision_side = CollisionSide::kFront;
    v.obstacle_kind = ObstacleKind::kVehicle;
    v.obstacle_length = 4.5;
    v.obstacle_width = 2.0;
    v.obstacle_height = 1.5;
    violations.push_back(v);
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(dedup(violations));
  }
}
BENCHMARK(BM_Dedup2000)->Unit(benchmark::kMillisecond);

void BM_MannWhitneyExact12(benchmark::State& state) {
  Rng rng(7);
  std::vector<double> xs, ys;
  for (int i = 0; i < 12; ++i) {
    xs.push_back(static_cast<double>(rng.uniform_int(20)));
    ys.push_back(static_cast<double>(rng.uniform_int(20)) + 1.0);
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(mann_whitney_u(xs, ys));
  }
}
BENCHMARK(BM_MannWhitneyExact12)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
