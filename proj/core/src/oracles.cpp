#include "scenforge/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace scenforge {

using ordered_json = nlohmann::ordered_json;

const char* to_string(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::kCollision: return "collision";
    case ViolationKind::kSpeeding: return "speed";
    case ViolationKind::kUnsafeLaneChange: return "unsafeChange";
    case ViolationKind::kFastAccel: return "fastAccl";
    case ViolationKind::kHardBrake: return "hardBrake";
  }
  return "collision";
}

ViolationKind violation_kind_from_string(const std::string& s) {
  for (ViolationKind k : kAllViolationKinds)
    if (s == to_string(k)) return k;
  throw std::invalid_argument("unknown violation kind '" + s + "'");
}

const char* to_string(CollisionSide side) {
  switch (side) {
    case CollisionSide::kFront: return "front";
    case CollisionSide::kRear: return "rear";
    case CollisionSide::kLeft: return "left";
    case CollisionSide::kRight: return "right";
  }
  return "front";
}

namespace {

struct Episode {
  std::size_t first = 0;
  std::size_t last = 0;  // inclusive
};

// Maximal runs of flagged ticks; runs separated by less than merge_gap
// seconds fuse into one event.
std::vector<Episode> episodes_of(const std::vector<bool>& flagged, double dt,
                                 double merge_gap) {
  std::vector<Episode> out;
  for (std::size_t j = 0; j < flagged.size(); ++j) {
    if (!flagged[j]) continue;
    if (!out.empty() &&
        (static_cast<double>(j - out.back().last) * dt) < merge_gap - 1e-12) {
      out.back().last = j;
    } else {
      out.push_back({j, j});
    }
  }
  return out;
}

PolygonPose ego_pose_at(const Trace& trace, std::size_t j) {
  const EgoState& e = trace.ego[j];
  return {e.position, e.heading, trace.ego_length, trace.ego_width};
}

PolygonPose obstacle_pose_at(const TraceObstacle& o, std::size_t j) {
  const ObstacleState& s = o.states[j];
  return {s.position, s.heading, o.length, o.width};
}

// Closest point of an oriented rectangle to a query point.
MapPoint closest_point_on_rect(const PolygonPose& rect, MapPoint p) {
  const double c = std::cos(rect.heading);
  const double s = std::sin(rect.heading);
  const MapPoint d = p - rect.center;
  double lx = c * d.x + s * d.y;
  double ly = -s * d.x + c * d.y;
  lx = std::clamp(lx, -0.5 * rect.length, 0.5 * rect.length);
  ly = std::clamp(ly, -0.5 * rect.width, 0.5 * rect.width);
  return {rect.center.x + c * lx - s * ly, rect.center.y + s * lx + c * ly};
}

CollisionSide classify_side(const EgoState& ego, MapPoint contact) {
  const MapPoint d = contact - ego.position;
  const double bearing = wrap_angle(std::atan2(d.y, d.x) - ego.heading);
  const double deg45 = std::numbers::pi / 4.0;
  if (std::abs(bearing) <= deg45) return CollisionSide::kFront;
  if (std::abs(bearing) >= 3.0 * deg45) return CollisionSide::kRear;
  return bearing > 0.0 ? CollisionSide::kLeft : CollisionSide::kRight;
}

Violation base_violation(ViolationKind kind, const Trace& trace,
                         std::size_t tick, double duration, double value) {
  const EgoState& e = trace.ego[tick];
  Violation v;
  v.kind = kind;
  v.t_first = e.t;
  v.duration = duration;
  v.value = value;
  v.ego_position = e.position;
  v.ego_speed = e.speed;
  v.ego_heading = e.heading;
  return v;
}

}  // namespace

CollisionCheck check_collision(const Trace& trace) {
  CollisionCheck result;
  const std::size_t ticks = trace.tick_count();
  for (const TraceObstacle& obs : trace.obstacles) {
    double min_d = std::numeric_limits<double>::infinity();
    std::vector<bool> contact(ticks, false);
    for (std::size_t j = 0; j < ticks; ++j) {
      const double d =
          polygon_distance(ego_pose_at(trace, j), obstacle_pose_at(obs, j));
      min_d = std::min(min_d, d);
      contact[j] = d <= 0.0;
    }
    result.min_distance[obs.id] = min_d;
    const auto spans = episodes_of(contact, trace.dt, 0.5);
    if (spans.empty()) continue;
    const Episode& first = spans.front();
    const double duration =
        static_cast<double>(first.last - first.first + 1) * trace.dt;
    Violation v = base_violation(ViolationKind::kCollision, trace, first.first,
                                 duration, 0.0);
    const ObstacleState& os = obs.states[first.first];
    const MapPoint contact_pt = closest_point_on_rect(
        obstacle_pose_at(obs, first.first), trace.ego[first.first].position);
    v.collision_side = classify_side(trace.ego[first.first], contact_pt);
    v.obstacle_id = obs.id;
    v.obstacle_kind = obs.kind;
    v.obstacle_length = obs.length;
    v.obstacle_width = obs.width;
    v.obstacle_height = obs.height;
    v.obstacle_speed = os.speed;
    v.obstacle_heading = os.heading;
    result.violations.push_back(v);
  }
  return result;
}

SpeedingCheck check_speeding(const Trace& trace, const LaneMap& map,
                             const Thresholds& th) {
  SpeedingCheck result;
  const std::size_t ticks = trace.tick_count();
  std::vector<bool> over(ticks, false);
  std::vector<double> overshoot(ticks, 0.0);
  result.min_gap = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < ticks; ++j) {
    const EgoState& e = trace.ego[j];
    const Lane* lane = map.find(e.current_lane);
    if (!lane)
      throw std::runtime_error("check_speeding: trace lane '" +
                               e.current_lane + "' is not in the map");
    overshoot[j] = e.speed - lane->speed_limit;
    over[j] = overshoot[j] > th.beta_safe;
    result.min_gap = std::min(result.min_gap, lane->speed_limit - e.speed);
  }
  for (const Episode& ep : episodes_of(over, trace.dt, th.merge_gap)) {
    double peak = 0.0;
    for (std::size_t j = ep.first; j <= ep.last; ++j)
      peak = std::max(peak, overshoot[j]);
    const double duration =
        static_cast<double>(ep.last - ep.first + 1) * trace.dt;
    result.violations.push_back(base_violation(
        ViolationKind::kSpeeding, trace, ep.first, duration, peak));
  }
  return result;
}

StraddleCheck check_unsafe_lane_change(const Trace& trace,
                                       const Thresholds& th) {
  StraddleCheck result;
  const std::size_t ticks = trace.tick_count();
  std::vector<bool> straddle(ticks, false);
  for (std::size_t j = 0; j < ticks; ++j) straddle[j] = trace.ego[j].straddling;
  result.max_duration = 0.0;
  for (const Episode& ep : episodes_of(straddle, trace.dt, th.merge_gap)) {
    const double c = static_cast<double>(ep.last - ep.first + 1) * trace.dt;
    result.max_duration = std::max(result.max_duration, c);
    if (c > th.delta_safe) {
      // The violation starts once the episode outlasts delta_safe.
      const std::size_t cross =
          ep.first + static_cast<std::size_t>(std::llround(th.delta_safe / trace.dt));
      Violation v = base_violation(ViolationKind::kUnsafeLaneChange, trace,
                                   std::min(cross, ep.last), c, c);
      result.violations.push_back(v);
    }
  }
  return result;
}

namespace {

ComfortCheck check_comfort(const Trace& trace, const Thresholds& th,
                           bool fast_side) {
  ComfortCheck result;
  const std::size_t ticks = trace.tick_count();
  std::vector<bool> beyond(ticks, false);
  result.extremum = fast_side ? -std::numeric_limits<double>::infinity()
                              : std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < ticks; ++j) {
    const double a = trace.ego[j].acceleration;
    if (fast_side) {
      result.extremum = std::max(result.extremum, a);
      beyond[j] = a > th.gamma_comfort;
    } else {
      result.extremum = std::min(result.extremum, a);
      beyond[j] = a < th.epsilon_comfort;
    }
  }
  for (const Episode& ep : episodes_of(beyond, trace.dt, th.merge_gap)) {
    double peak = fast_side ? -std::numeric_limits<double>::infinity()
                            : std::numeric_limits<double>::infinity();
    for (std::size_t j = ep.first; j <= ep.last; ++j) {
      const double a = trace.ego[j].acceleration;
      peak = fast_side ? std::max(peak, a) : std::min(peak, a);
    }
    const double duration =
        static_cast<double>(ep.last - ep.first + 1) * trace.dt;
    result.violations.push_back(base_violation(
        fast_side ? ViolationKind::kFastAccel : ViolationKind::kHardBrake,
        trace, ep.first, duration, peak));
  }
  return result;
}

}  // namespace

ComfortCheck check_fast_accel(const Trace& trace, const Thresholds& th) {
  return check_comfort(trace, th, true);
}

ComfortCheck check_hard_brake(const Trace& trace, const Thresholds& th) {
  return check_comfort(trace, th, false);
}

Evaluation evaluate(const Trace& trace, const LaneMap& map,
                    const Thresholds& th) {
  if (trace.obstacles.empty())
    throw std::invalid_argument("evaluate: trace has no obstacles");
  Evaluation eval;

  auto collision = check_collision(trace);
  auto speeding = check_speeding(trace, map, th);
  auto straddle = check_unsafe_lane_change(trace, th);
  auto fast = check_fast_accel(trace, th);
  auto hard = check_hard_brake(trace, th);

  eval.per_obstacle_min_distance = std::move(collision.min_distance);
  double closest = std::numeric_limits<double>::infinity();
  for (const auto& [id, d] : eval.per_obstacle_min_distance)
    closest = std::min(closest, d);

  eval.objectives.collision = closest;
  eval.objectives.speed = speeding.min_gap;
  eval.objectives.unsafe_change = straddle.max_duration;
  eval.objectives.fast_accel = fast.extremum;
  eval.objectives.hard_brake = hard.extremum;

  auto append = [&](std::vector<Violation>& vs) {
    eval.violations.insert(eval.violations.end(), vs.begin(), vs.end());
  };
  append(collision.violations);
  append(speeding.violations);
  append(straddle.violations);
  append(fast.violations);
  append(hard.violations);
  return eval;
}

namespace detail {

ordered_json violation_to_json(const Violation& v) {
  ordered_json j;
  j["kind"] = to_string(v.kind);
  j["t_first"] = v.t_first;
  j["duration"] = v.duration;
  j["value"] = v.value;
  j["ego"] = {{"x", v.ego_position.x},
              {"y", v.ego_position.y},
              {"speed", v.ego_speed},
              {"heading", v.ego_heading}};
  if (v.kind == ViolationKind::kCollision) {
    j["collision"] = {{"side", to_string(v.collision_side)},
                      {"obstacle_id", v.obstacle_id},
                      {"obstacle_kind", to_string(v.obstacle_kind)},
                      {"size", {v.obstacle_length, v.obstacle_width,
                                v.obstacle_height}},
                      {"obstacle_speed", v.obstacle_speed},
                      {"obstacle_heading", v.obstacle_heading}};
  }
  return j;
}

Violation violation_from_json(const ordered_json& j) {
  Violation v;
  v.kind = violation_kind_from_string(j.at("kind").get<std::string>());
  v.t_first = j.at("t_first").get<double>();
  v.duration = j.at("duration").get<double>();
  v.value = j.at("value").get<double>();
  const auto& e = j.at("ego");
  v.ego_position = {e.at("x").get<double>(), e.at("y").get<double>()};
  v.ego_speed = e.at("speed").get<double>();
  v.ego_heading = e.at("heading").get<double>();
  if (j.contains("collision")) {
    const auto& c = j.at("collision");
    const std::string side = c.at("side").get<std::string>();
    if (side == "front") v.collision_side = CollisionSide::kFront;
    else if (side == "rear") v.collision_side = CollisionSide::kRear;
    else if (side == "left") v.collision_side = CollisionSide::kLeft;
    else v.collision_side = CollisionSide::kRight;
    v.obstacle_id = c.at("obstacle_id").get<std::int64_t>();
    v.obstacle_kind =
        obstacle_kind_from_string(c.at("obstacle_kind").get<std::string>());
    v.obstacle_length = c.at("size").at(0).get<double>();
    v.obstacle_width = c.at("size").at(1).get<double>();
    v.obstacle_height = c.at("size").at(2).get<double>();
    v.obstacle_speed = c.at("obstacle_speed").get<double>();
    v.obstacle_heading = c.at("obstacle_heading").get<double>();
  }
  return v;
}

}  // namespace detail

using detail::violation_to_json;

std::string violations_to_json_text(const std::string& scenario_id,
                                    const Evaluation& eval) {
  ordered_json j;
  j["scenario_id"] = scenario_id;
  j["objectives"] = {{"collision", eval.objectives.collision},
                     {"speed", eval.objectives.speed},
                     {"unsafeChange", eval.objectives.unsafe_change},
                     {"fastAccl", eval.objectives.fast_accel},
                     {"hardBrake", eval.objectives.hard_brake}};
  j["violations"] = ordered_json::array();
  for (const auto& v : eval.violations)
    j["violations"].push_back(violation_to_json(v));
  return j.dump(2) + "\n";
}

void write_violations_json(const std::string& scenario_id,
                           const Evaluation& eval, const std::string& path) {
  std::ofstream out(path);
  if (!out)
    throw std::runtime_error("cannot write violations file '" + path + "'");
  out << violations_to_json_text(scenario_id, eval);
}

std::string violations_csv_header() {
  return "scenario_id,kind,t_first,duration,value,ego_x,ego_y,ego_speed,"
         "ego_heading,side,obstacle_id,obstacle_kind,obstacle_length,"
         "obstacle_width,obstacle_height,obstacle_speed,obstacle_heading";
}

std::string violation_to_csv_row(const std::string& scenario_id,
                                 const Violation& v) {
  std::ostringstream os;
  os.precision(9);
  os << scenario_id << ',' << to_string(v.kind) << ',' << v.t_first << ','
     << v.duration << ',' << v.value << ',' << v.ego_position.x << ','
     << v.ego_position.y << ',' << v.ego_speed << ',' << v.ego_heading << ',';
  if (v.kind == ViolationKind::kCollision) {
    os << to_string(v.collision_side) << ',' << v.obstacle_id << ','
       << to_string(v.obstacle_kind) << ',' << v.obstacle_length << ','
       << v.obstacle_width << ',' << v.obstacle_height << ','
       << v.obstacle_speed << ',' << v.obstacle_heading;
  } else {
    os << ",,,,,,,";
  }
  return os.str();
}

}  // namespace scenforge
