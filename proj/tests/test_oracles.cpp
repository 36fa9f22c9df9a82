#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>

#include "scenforge/oracles.hpp"
#include "scenforge/rng.hpp"

using namespace scenforge;

namespace {

const std::string kStraightPath = std::string(SCENFORGE_MAPS_DIR) + "/straight.json";

// Crafted trace: ego cruising main_r at 10 m/s, one pedestrian far away.
// Tests overwrite the pieces they exercise; the oracles do not re-derive
// positions from speeds, so the series can be shaped independently.
Trace base_trace(std::size_t ticks = 301) {
  Trace t;
  t.map_id = "straight";
  t.scenario_id = "crafted";
  t.dt = 0.1;
  t.duration = 0.1 * static_cast<double>(ticks - 1);
  TraceObstacle o;
  o.id = 1;
  o.kind = ObstacleKind::kPedestrian;
  o.length = 0.3;
  o.width = 0.5;
  o.height = 1.5;
  for (std::size_t j = 0; j < ticks; ++j) {
    EgoState e;
    e.t = 0.1 * static_cast<double>(j);
    e.position = {10.0 + 10.0 * e.t, 0.0};
    e.heading = 0.0;
    e.speed = 10.0;
    e.acceleration = 0.0;
    e.current_lane = "main_r";
    e.straddling = false;
    t.ego.push_back(e);
    o.states.push_back({{390.0, 3.5}, 0.0, 0.0});
  }
  t.obstacles.push_back(std::move(o));
  return t;
}

void set_speeds(Trace& t, const std::vector<std::pair<double, double>>& ramps) {
  // piecewise-linear speed profile through (time, speed) anchor points
  for (std::size_t j = 0; j < t.ego.size(); ++j) {
    const double time = t.ego[j].t;
    double v = ramps.front().second;
    for (std::size_t k = 1; k < ramps.size(); ++k) {
      if (time >= ramps[k].first) {
        v = ramps[k].second;
      } else {
        const double f = (time - ramps[k - 1].first) /
                         (ramps[k].first - ramps[k - 1].first);
        v = ramps[k - 1].second + f * (ramps[k].second - ramps[k - 1].second);
        break;
      }
    }
    t.ego[j].speed = v;
  }
  for (std::size_t j = 1; j < t.ego.size(); ++j)
    t.ego[j].acceleration = (t.ego[j].speed - t.ego[j - 1].speed) / t.dt;
  t.ego[0].acceleration = 0.0;
}

void set_straddle(Trace& t, double from, double to) {
  for (auto& e : t.ego)
    if (e.t >= from - 1e-9 && e.t <= to + 1e-9) e.straddling = true;
}

}  // namespace

TEST_CASE("a crossing pedestrian produces a left collision at the analytic tick") {
  Trace t = base_trace();
  // ego parked at (100, 0); pedestrian crossing downward through it
  for (auto& e : t.ego) {
    e.position = {100.0, 0.0};
    e.speed = 0.0;
    e.acceleration = 0.0;
  }
  for (std::size_t j = 0; j < t.ego.size(); ++j) {
    const double time = t.ego[j].t;
    t.obstacles[0].states[j] = {{100.0, 10.0 - 2.0 * time},
                                -0.5 * std::numbers::pi, 2.0};
  }
  // contact when the pedestrian front (0.15) meets the ego side (1.055):
  // y = 1.205 at t = 4.3975, first sampled tick 4.4
  const auto result = check_collision(t);
  REQUIRE(result.violations.size() == 1);
  const Violation& v = result.violations[0];
  CHECK(v.kind == ViolationKind::kCollision);
  CHECK(v.t_first == doctest::Approx(4.4).epsilon(1e-12));
  CHECK(v.collision_side == CollisionSide::kLeft);
  CHECK(v.obstacle_id == 1);
  CHECK(v.obstacle_kind == ObstacleKind::kPedestrian);
  CHECK(v.duration >= t.dt);
  CHECK(v.obstacle_speed == doctest::Approx(2.0));
  CHECK(result.min_distance.at(1) == 0.0);
}

TEST_CASE("a 0.4 m near miss is no violation and scores 0.4") {
  Trace t = base_trace();
  // parallel pedestrian offset so the closest pass is exactly 0.4 m
  const double y = 1.055 + 0.25 + 0.4;
  for (std::size_t j = 0; j < t.ego.size(); ++j)
    t.obstacles[0].states[j] = {{150.0, y}, 0.0, 0.0};
  const auto result = check_collision(t);
  CHECK(result.violations.empty());
  CHECK(result.min_distance.at(1) == doctest::Approx(0.4).epsilon(1e-9));
}

TEST_CASE("a faraway static obstacle scores its closest approach") {
  Trace t = base_trace();
  const auto result = check_collision(t);
  CHECK(result.violations.empty());
  // ego travels x in [10, 310]; obstacle at (390, 3.5)
  CHECK(result.min_distance.at(1) > 70.0);
}

TEST_CASE("speeding triggers strictly above the beta_safe allowance") {
  const LaneMap map = LaneMap::load(kStraightPath);
  const Thresholds th;
  SUBCASE("peak 16.5 on a 13.89 limit is a violation worth 2.61") {
    Trace t = base_trace();
    set_speeds(t, {{0.0, 13.0}, {10.0, 16.5}, {20.0, 13.0}, {30.0, 13.0}});
    const auto result = check_speeding(t, map, th);
    REQUIRE(result.violations.size() == 1);
    CHECK(result.violations[0].value == doctest::Approx(16.5 - 13.89).epsilon(1e-9));
    CHECK(result.violations[0].kind == ViolationKind::kSpeeding);
    CHECK(result.min_gap == doctest::Approx(13.89 - 16.5).epsilon(1e-9));
  }
  SUBCASE("peaking exactly at limit plus beta_safe passes") {
    Trace t = base_trace();
    const double boundary = 13.89 + th.beta_safe;
    set_speeds(t, {{0.0, 13.0}, {10.0, boundary}, {20.0, 13.0}, {30.0, 13.0}});
    CHECK(check_speeding(t, map, th).violations.empty());
  }
  SUBCASE("constant 10 under a 13.89 limit scores 3.89") {
    Trace t = base_trace();
    const auto result = check_speeding(t, map, th);
    CHECK(result.violations.empty());
    CHECK(result.min_gap == doctest::Approx(3.89).epsilon(1e-9));
  }
}

TEST_CASE("straddle episodes are graded against delta_safe") {
  const Thresholds th;
  SUBCASE("a 6.2 s episode is one violation of value 6.2") {
    Trace t = base_trace();
    set_straddle(t, 8.0, 14.1);  // 62 ticks
    const auto result = check_unsafe_lane_change(t, th);
    REQUIRE(result.violations.size() == 1);
    CHECK(result.violations[0].value == doctest::Approx(6.2).epsilon(1e-9));
    CHECK(result.violations[0].duration == doctest::Approx(6.2).epsilon(1e-9));
    // the violation starts once the straddle outlasts delta_safe
    CHECK(result.violations[0].t_first == doctest::Approx(13.0).epsilon(1e-9));
    CHECK(result.max_duration == doctest::Approx(6.2).epsilon(1e-9));
  }
  SUBCASE("episodes of 3 and 4 seconds pass with a max of 4") {
    Trace t = base_trace();
    set_straddle(t, 5.0, 7.9);    // 30 ticks = 3.0 s
    set_straddle(t, 15.0, 18.9);  // 40 ticks = 4.0 s
    const auto result = check_unsafe_lane_change(t, th);
    CHECK(result.violations.empty());
    CHECK(result.max_duration == doctest::Approx(4.0).epsilon(1e-9));
  }
  SUBCASE("no lane change at all scores zero") {
    Trace t = base_trace();
    const auto result = check_unsafe_lane_change(t, th);
    CHECK(result.violations.empty());
    CHECK(result.max_duration == 0.0);
  }
}

TEST_CASE("comfort oracles trigger strictly beyond the thresholds") {
  const Thresholds th;
  SUBCASE("a 4.5 m/s2 peak is a fast-acceleration violation") {
    Trace t = base_trace();
    set_speeds(t, {{0.0, 5.0}, {10.0, 5.0}, {12.0, 14.0}, {30.0, 14.0}});
    const auto result = check_fast_accel(t, th);
    REQUIRE(result.violations.size() == 1);
    CHECK(result.violations[0].value == doctest::Approx(4.5).epsilon(1e-6));
    CHECK(result.extremum == doctest::Approx(4.5).epsilon(1e-6));
  }
  SUBCASE("a -4.3 m/s2 trough is a hard-braking violation") {
    Trace t = base_trace();
    set_speeds(t, {{0.0, 14.0}, {10.0, 14.0}, {12.0, 5.4}, {30.0, 5.4}});
    const auto result = check_hard_brake(t, th);
    REQUIRE(result.violations.size() == 1);
    CHECK(result.violations[0].value == doctest::Approx(-4.3).epsilon(1e-6));
    CHECK(result.violations[0].kind == ViolationKind::kHardBrake);
  }
  SUBCASE("acceleration inside [-4, 4] raises nothing") {
    Trace t = base_trace();
    set_speeds(t, {{0.0, 5.0}, {10.0, 12.0}, {20.0, 5.0}, {30.0, 5.0}});
    CHECK(check_fast_accel(t, th).violations.empty());
    CHECK(check_hard_brake(t, th).violations.empty());
  }
}

TEST_CASE("nearby threshold crossings merge into one event") {
  const Thresholds th;
  Trace t = base_trace();
  // two acceleration bursts separated by 0.3 s
  for (auto& e : t.ego) e.speed = 5.0;
  auto spike = [&](std::size_t from, std::size_t count) {
    for (std::size_t j = from; j < from + count; ++j)
      t.ego[j].acceleration = 4.4;
  };
  spike(100, 5);
  spike(108, 5);  // gap of 3 ticks = 0.3 s < merge_gap
  CHECK(check_fast_accel(t, th).violations.size() == 1);

  Trace t2 = base_trace();
  for (auto& e : t2.ego) e.speed = 5.0;
  for (std::size_t j = 100; j < 105; ++j) t2.ego[j].acceleration = 4.4;
  for (std::size_t j = 120; j < 125; ++j) t2.ego[j].acceleration = 4.4;
  CHECK(check_fast_accel(t2, th).violations.size() == 2);
}

TEST_CASE("evaluate reports co-occurring violations from one trace") {
  const LaneMap map = LaneMap::load(kStraightPath);
  const Thresholds th;
  Trace t = base_trace();
  // hard stop at 10 s, then a side impact at 11 s
  set_speeds(t, {{0.0, 13.0}, {10.0, 13.0}, {10.3, 8.7}, {30.0, 8.7}});
  for (std::size_t j = 0; j < t.ego.size(); ++j) {
    const double time = t.ego[j].t;
    // obstacle converges on the ego laterally around t = 11
    t.obstacles[0].states[j] = {
        {10.0 + 10.0 * time, time < 11.0 ? 8.0 - 0.7 * time : 0.3}, 0.0, 2.0};
  }
  const Evaluation eval = evaluate(t, map, th);
  bool saw_hard = false, saw_collision = false;
  for (const auto& v : eval.violations) {
    saw_hard |= v.kind == ViolationKind::kHardBrake;
    saw_collision |= v.kind == ViolationKind::kCollision;
  }
  CHECK(saw_hard);
  CHECK(saw_collision);
  CHECK(eval.objectives.hard_brake < -4.0);
  CHECK(eval.objectives.collision == 0.0);
}

TEST_CASE("a benign cruise has zero violations and finite objectives") {
  const LaneMap map = LaneMap::load(kStraightPath);
  const Evaluation eval = evaluate(base_trace(), map, Thresholds{});
  CHECK(eval.violations.empty());
  for (double v : eval.objectives.as_array()) CHECK(std::isfinite(v));
}

TEST_CASE("grading a record round-trip matches grading the original") {
  const LaneMap map = LaneMap::load(kStraightPath);
  const Thresholds th;
  Trace t = base_trace();
  set_speeds(t, {{0.0, 13.0}, {10.0, 16.6}, {12.0, 7.0}, {30.0, 7.0}});
  const Evaluation before = evaluate(t, map, th);
  const Trace back = record_from_text(record_to_text(t));
  const Evaluation after = evaluate(back, map, th);
  REQUIRE(after.violations.size() == before.violations.size());
  for (std::size_t i = 0; i < before.violations.size(); ++i) {
    CHECK(after.violations[i].kind == before.violations[i].kind);
    CHECK(after.violations[i].t_first ==
          doctest::Approx(before.violations[i].t_first).epsilon(1e-9));
    CHECK(after.violations[i].value ==
          doctest::Approx(before.violations[i].value).epsilon(1e-6));
  }
  CHECK(after.objectives.fast_accel ==
        doctest::Approx(before.objectives.fast_accel).epsilon(1e-6));
}

TEST_CASE("tightening gamma_comfort never loses fast-accel events") {
  const LaneMap map = LaneMap::load(kStraightPath);
  Rng rng(6060);
  for (int trial = 0; trial < 30; ++trial) {
    Trace t = base_trace(120);
    double v = rng.uniform(3.0, 12.0);
    for (std::size_t j = 0; j < t.ego.size(); ++j) {
      t.ego[j].speed = v;
      const double a = rng.uniform(-5.5, 5.5);
      v = std::max(0.0, v + a * t.dt);
      if (j + 1 < t.ego.size()) {
        t.ego[j + 1].speed = v;
        t.ego[j + 1].acceleration = (v - t.ego[j].speed) / t.dt;
      }
    }
    // Event counts are not monotone under tightening (a stricter
    // threshold can bridge the gap between two events and merge them),
    // but detection and total violating time are.
    Thresholds loose, tight;
    loose.gamma_comfort = 4.0;
    tight.gamma_comfort = 3.0;
    auto total_duration = [](const ComfortCheck& c) {
      double sum = 0.0;
      for (const auto& v : c.violations) sum += v.duration;
      return sum;
    };
    const auto fast_loose = check_fast_accel(t, loose);
    const auto fast_tight = check_fast_accel(t, tight);
    if (!fast_loose.violations.empty()) CHECK(!fast_tight.violations.empty());
    CHECK(total_duration(fast_tight) >= total_duration(fast_loose) - 1e-9);

    loose.epsilon_comfort = -4.0;
    tight.epsilon_comfort = -3.0;
    const auto hard_loose = check_hard_brake(t, loose);
    const auto hard_tight = check_hard_brake(t, tight);
    if (!hard_loose.violations.empty()) CHECK(!hard_tight.violations.empty());
    CHECK(total_duration(hard_tight) >= total_duration(hard_loose) - 1e-9);
  }
}

TEST_CASE("violations exist exactly when the fitness crosses the threshold") {
  const LaneMap map = LaneMap::load(kStraightPath);
  const Thresholds th;
  Rng rng(7070);
  for (int trial = 0; trial < 40; ++trial) {
    Trace t = base_trace(150);
    // random speed profile and straddle pattern
    double v = rng.uniform(5.0, 15.0);
    for (std::size_t j = 0; j < t.ego.size(); ++j) {
      t.ego[j].speed = v;
      if (j > 0)
        t.ego[j].acceleration = (v - t.ego[j - 1].speed) / t.dt;
      v = std::max(0.0, v + rng.uniform(-0.55, 0.55));
      t.ego[j].straddling = rng.chance(0.3);
    }
    const Evaluation eval = evaluate(t, map, th);
    auto has = [&](ViolationKind k) {
      for (const auto& viol : eval.violations)
        if (viol.kind == k) return true;
      return false;
    };
    CHECK(has(ViolationKind::kCollision) == (eval.objectives.collision <= 0.0));
    CHECK(has(ViolationKind::kSpeeding) ==
          (-eval.objectives.speed > th.beta_safe));
    CHECK(has(ViolationKind::kUnsafeLaneChange) ==
          (eval.objectives.unsafe_change > th.delta_safe));
    CHECK(has(ViolationKind::kFastAccel) ==
          (eval.objectives.fast_accel > th.gamma_comfort));
    CHECK(has(ViolationKind::kHardBrake) ==
          (eval.objectives.hard_brake < th.epsilon_comfort));
    for (const auto& viol : eval.violations) {
      CHECK(viol.t_first >= 0.0);
      CHECK(viol.t_first <= t.duration + 1e-9);
      const double ticks = viol.t_first / t.dt;
      CHECK(std::abs(ticks - std::round(ticks)) < 1e-6);
      CHECK(viol.duration >= t.dt - 1e-12);
    }
  }
}

TEST_CASE("polygon distance agrees with a boundary-sampling oracle") {
  // oracle: sample one boundary at 1 mm, measure exactly to the other
  auto sampled_distance = [](const PolygonPose& a, const PolygonPose& b) {
    auto one_way = [](const PolygonPose& from, const PolygonPose& to) {
      const auto corners = polygon_corners(from);
      double best = std::numeric_limits<double>::infinity();
      for (int e = 0; e < 4; ++e) {
        const MapPoint p0 = corners[e];
        const MapPoint p1 = corners[(e + 1) % 4];
        const int n = std::max(1, static_cast<int>(distance(p0, p1) / 0.001));
        for (int i = 0; i <= n; ++i) {
          const MapPoint p = p0 + (static_cast<double>(i) / n) * (p1 - p0);
          if (polygon_contains(to, p)) return 0.0;
          // exact point-to-rectangle distance
          const double c = std::cos(to.heading), s = std::sin(to.heading);
          const MapPoint d = p - to.center;
          const double lx = std::clamp(c * d.x + s * d.y, -0.5 * to.length,
                                       0.5 * to.length);
          const double ly = std::clamp(-s * d.x + c * d.y, -0.5 * to.width,
                                       0.5 * to.width);
          const MapPoint q{to.center.x + c * lx - s * ly,
                           to.center.y + s * lx + c * ly};
          best = std::min(best, distance(p, q));
        }
      }
      return best;
    };
    return std::min(one_way(a, b), one_way(b, a));
  };

  Rng rng(9090);
  for (int trial = 0; trial < 100; ++trial) {
    const PolygonPose a{{rng.uniform(-15, 15), rng.uniform(-15, 15)},
                        rng.uniform(-3.2, 3.2), rng.uniform(0.3, 8.0),
                        rng.uniform(0.3, 3.0)};
    const PolygonPose b{{rng.uniform(-15, 15), rng.uniform(-15, 15)},
                        rng.uniform(-3.2, 3.2), rng.uniform(0.3, 8.0),
                        rng.uniform(0.3, 3.0)};
    CHECK(std::abs(polygon_distance(a, b) - sampled_distance(a, b)) <= 1e-3);
  }
}
