#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <chrono>
#include <cmath>

#include "scenforge/simulator.hpp"
#include "scenforge/validity.hpp"

using namespace scenforge;

namespace {

const std::string kGridPath = std::string(SCENFORGE_MAPS_DIR) + "/grid_3x3.json";
const std::string kStraightPath = std::string(SCENFORGE_MAPS_DIR) + "/straight.json";

ObstacleGenome static_vehicle(MapPoint at, std::int64_t id = 1) {
  ObstacleGenome o;
  o.id = id;
  o.kind = ObstacleKind::kVehicle;
  o.mobility = Mobility::kStatic;
  o.start = at;
  o.end = at;
  o.heading = 0.0;
  o.length = 4.6;
  o.width = 1.9;
  o.height = 1.5;
  o.speed = 5.0;
  return o;
}

ScenarioGenome cruise_scenario(MapPoint obstacle_at) {
  ScenarioGenome s;
  s.id = "sim-test";
  s.ego_start = {10.0, 0.0};
  s.ego_end = {190.0, 0.0};
  s.duration = 30.0;
  s.obstacles = {static_vehicle(obstacle_at)};
  return s;
}

double ego_obstacle_gap(const Trace& t, std::size_t j, std::size_t k = 0) {
  const PolygonPose ego{t.ego[j].position, t.ego[j].heading, t.ego_length,
                        t.ego_width};
  const auto& o = t.obstacles[k];
  const PolygonPose obs{o.states[j].position, o.states[j].heading, o.length,
                        o.width};
  return polygon_distance(ego, obs);
}

}  // namespace

TEST_CASE("static obstacles hold their pose at every tick") {
  const LaneMap map = LaneMap::load(kStraightPath);
  ObstacleGenome g = static_vehicle({77.0, 0.0});
  g.kind = ObstacleKind::kPedestrian;
  g.length = 0.3;
  g.width = 0.5;
  g.height = 1.5;
  g.heading = 1.1;
  const auto traj = build_trajectory(g, map, 30.0, 0.1);
  REQUIRE(traj.states.size() == 301);
  for (const auto& st : traj.states) {
    CHECK(st.position.x == 77.0);
    CHECK(st.position.y == 0.0);
    CHECK(st.heading == 1.1);
    CHECK(st.speed == 0.0);
  }
}

TEST_CASE("a vehicle on a straight lane advances at speed times time") {
  const LaneMap map = LaneMap::load(kStraightPath);
  ObstacleGenome g = static_vehicle({0.0, 0.0});
  g.mobility = Mobility::kDynamic;
  g.start = {0.0, 0.0};
  g.end = {380.0, 0.0};
  g.speed = 10.0;
  const auto traj = build_trajectory(g, map, 30.0, 0.1);
  REQUIRE(traj.states.size() == 301);
  for (std::size_t j = 0; j < traj.states.size(); ++j) {
    const double t = 0.1 * static_cast<double>(j);
    const double expected = std::min(10.0 * t, 380.0);
    CHECK(traj.states[j].position.x == doctest::Approx(expected).epsilon(1e-9));
    CHECK(std::abs(traj.states[j].position.y) < 1e-9);
  }
}

TEST_CASE("an obstacle parks at the route end when the route is short") {
  const LaneMap map = LaneMap::load(kStraightPath);
  ObstacleGenome g = static_vehicle({0.0, 0.0});
  g.mobility = Mobility::kDynamic;
  g.start = {0.0, 0.0};
  g.end = {50.0, 0.0};
  g.speed = 10.0;  // route exhausted after 5 s
  const auto traj = build_trajectory(g, map, 30.0, 0.1);
  for (std::size_t j = 52; j < traj.states.size(); ++j) {
    CHECK(traj.states[j].position.x == doctest::Approx(50.0).epsilon(1e-9));
    CHECK(traj.states[j].speed == 0.0);
  }
  CHECK(traj.states[10].speed == 10.0);
}

TEST_CASE("trajectory spacing never exceeds speed times dt") {
  const LaneMap map = LaneMap::load(kGridPath);
  const ConstraintTable table = ConstraintTable::defaults();
  Rng rng(404);
  for (int trial = 0; trial < 40; ++trial) {
    ObstacleGenome g = sample_obstacle(table, map, rng, trial);
    const auto traj = build_trajectory(g, map, 30.0, 0.1);
    for (std::size_t j = 1; j < traj.states.size(); ++j) {
      const double step =
          distance(traj.states[j - 1].position, traj.states[j].position);
      CHECK(step <= g.speed * 0.1 + 1e-6);
    }
  }
}

TEST_CASE("empty-road cruise reaches a lawful speed and arrives") {
  const LaneMap map = LaneMap::load(kStraightPath);
  const PlannerConfig cfg;
  const ScenarioGenome s = cruise_scenario({390.0, 3.5});
  const Trace t = simulate(s, map, cfg);
  REQUIRE(t.ego.size() == 301);

  double max_v = 0.0, min_gap = 1e18;
  for (std::size_t j = 0; j < t.ego.size(); ++j) {
    max_v = std::max(max_v, t.ego[j].speed);
    min_gap = std::min(min_gap, ego_obstacle_gap(t, j));
  }
  CHECK(max_v <= 13.89 + kmh_to_mps(8.0));
  CHECK(min_gap > 0.0);  // no collision
  // arrives at the destination (within the documented stop buffer) and holds
  CHECK(std::abs(t.ego.back().position.x - 190.0) < 1.0);
  CHECK(t.ego.back().speed == 0.0);
}

TEST_CASE("ego stops at least the standoff behind a parked obstacle") {
  const char* slow_map = R"({
    "bounding_box": {"min_x": -10, "min_y": -10, "max_x": 410, "max_y": 10},
    "lanes": [{"id": "street", "width_m": 3.5, "speed_limit_mps": 8.33,
               "centerline": [[0,0],[400,0]],
               "successors": [], "predecessors": []}]})";
  const LaneMap map = LaneMap::from_json_text(slow_map, "slow");
  const PlannerConfig cfg;
  const ScenarioGenome s = cruise_scenario({40.0, 0.0});
  const Trace t = simulate(s, map, cfg);

  double min_gap = 1e18;
  for (std::size_t j = 0; j < t.ego.size(); ++j)
    min_gap = std::min(min_gap, ego_obstacle_gap(t, j));
  CHECK(min_gap >= cfg.standoff);
  CHECK(t.ego.back().speed < 0.05);
  // it did brake rather than never moving
  CHECK(t.ego.back().position.x > 20.0);
}

TEST_CASE("recorded acceleration is exactly the speed difference quotient") {
  const LaneMap map = LaneMap::load(kStraightPath);
  const PlannerConfig cfg;
  const Trace t = simulate(cruise_scenario({40.0, 0.0}), map, cfg);
  CHECK(t.ego[0].acceleration == 0.0);
  for (std::size_t j = 1; j < t.ego.size(); ++j) {
    const double quotient = (t.ego[j].speed - t.ego[j - 1].speed) / t.dt;
    CHECK(std::abs(t.ego[j].acceleration - quotient) <= 1e-9);
  }
}

TEST_CASE("planner respects its actuation limits") {
  const LaneMap map = LaneMap::load(kGridPath);
  const PlannerConfig cfg;
  const ConstraintTable table = ConstraintTable::defaults();
  Rng rng(808);
  for (int trial = 0; trial < 10; ++trial) {
    ScenarioGenome s;
    s.id = "limits";
    s.duration = 30.0;
    // ego route along the top avenue into the slow east column
    s.ego_start = {5.0, 200.0};
    s.ego_end = {200.0, 60.0};
    for (int i = 0; i < 8; ++i)
      s.obstacles.push_back(sample_obstacle(table, map, rng, i + 1));
    const Trace t = simulate(s, map, cfg);
    for (std::size_t j = 1; j < t.ego.size(); ++j) {
      CHECK(t.ego[j].acceleration <=
            std::max(cfg.max_accel, -cfg.max_brake) + 1e-9);
      CHECK(-t.ego[j].acceleration <=
            std::max(cfg.max_accel, -cfg.max_brake) + 1e-9);
    }
    // ego never leaves the lane graph
    for (const auto& e : t.ego) CHECK_FALSE(e.current_lane.empty());
  }
}

TEST_CASE("timestamps are uniform and series lengths agree") {
  const LaneMap map = LaneMap::load(kStraightPath);
  const Trace t = simulate(cruise_scenario({390.0, 3.5}), map, PlannerConfig{});
  REQUIRE(t.ego.size() == 301);
  for (const auto& o : t.obstacles) CHECK(o.states.size() == t.ego.size());
  for (std::size_t j = 0; j < t.ego.size(); ++j)
    CHECK(t.ego[j].t == doctest::Approx(0.1 * static_cast<double>(j)).epsilon(1e-12));
}

TEST_CASE("simulation is deterministic at the record level") {
  const LaneMap map = LaneMap::load(kGridPath);
  const ConstraintTable table = ConstraintTable::defaults();
  PlannerConfig cfg;
  Rng rng(2121);
  ScenarioGenome s;
  s.id = "det";
  s.duration = 30.0;
  s.ego_start = {5.0, 200.0};
  s.ego_end = {100.0, 30.0};
  for (int i = 0; i < 12; ++i)
    s.obstacles.push_back(sample_obstacle(table, map, rng, i + 1));
  const std::string first = record_to_text(simulate(s, map, cfg));
  const std::string second = record_to_text(simulate(s, map, cfg));
  CHECK(first == second);
}

TEST_CASE("the ego straddles the boundary while changing lanes") {
  const LaneMap map = LaneMap::load(kStraightPath);
  ScenarioGenome s = cruise_scenario({390.0, 3.5});
  s.ego_end = {250.0, 3.5};  // destination on the left neighbor
  const Trace t = simulate(s, map, PlannerConfig{});
  int straddle = 0;
  for (const auto& e : t.ego) straddle += e.straddling ? 1 : 0;
  CHECK(straddle > 5);
  CHECK(straddle < 50);  // unblocked change finishes well under delta_safe
  CHECK(t.ego.back().current_lane == "main_l");
}

TEST_CASE("records round-trip losslessly at 1e-9") {
  const LaneMap map = LaneMap::load(kStraightPath);
  const Trace t = simulate(cruise_scenario({40.0, 0.0}), map, PlannerConfig{});
  const std::string text = record_to_text(t);
  const Trace back = record_from_text(text);
  REQUIRE(back.ego.size() == t.ego.size());
  REQUIRE(back.obstacles.size() == t.obstacles.size());
  CHECK(back.map_id == t.map_id);
  CHECK(back.scenario_id == t.scenario_id);
  for (std::size_t j = 0; j < t.ego.size(); ++j) {
    CHECK(std::abs(back.ego[j].position.x - t.ego[j].position.x) <= 5e-10);
    CHECK(std::abs(back.ego[j].speed - t.ego[j].speed) <= 5e-10);
    CHECK(std::abs(back.ego[j].acceleration - t.ego[j].acceleration) <= 5e-10);
    CHECK(back.ego[j].current_lane == t.ego[j].current_lane);
    CHECK(back.ego[j].straddling == t.ego[j].straddling);
  }
  // write-read-write is a fixed point
  CHECK(record_to_text(back) == text);
}

TEST_CASE("future record schema versions are rejected") {
  const LaneMap map = LaneMap::load(kStraightPath);
  const Trace t = simulate(cruise_scenario({40.0, 0.0}), map, PlannerConfig{});
  std::string text = record_to_text(t);
  const auto pos = text.find("\"schema_version\":1");
  REQUIRE(pos != std::string::npos);
  text.replace(pos, 18, "\"schema_version\":9");
  CHECK_THROWS_WITH_AS(record_from_text(text),
                       doctest::Contains("schema_version"), std::runtime_error);
}

TEST_CASE("a 70-obstacle simulation finishes within a second") {
  const LaneMap map = LaneMap::load(kGridPath);
  const ConstraintTable table = ConstraintTable::defaults();
  Rng rng(99999);
  ScenarioGenome s;
  s.id = "load";
  s.duration = 30.0;
  s.ego_start = {5.0, 200.0};
  s.ego_end = {100.0, 30.0};
  for (int i = 0; i < 70; ++i)
    s.obstacles.push_back(sample_obstacle(table, map, rng, i + 1));
  const auto t0 = std::chrono::steady_clock::now();
  const Trace t = simulate(s, map, PlannerConfig{});
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  CHECK(t.obstacles.size() == 70);
  CHECK(elapsed < 1.0);
}
