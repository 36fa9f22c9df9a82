#include "scenforge/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace scenforge {

namespace {

double smoothstep(double t) { return t * t * (3.0 - 2.0 * t); }

struct Polyline {
  std::vector<MapPoint> pts;
  std::vector<double> cum;

  explicit Polyline(std::vector<MapPoint> points) : pts(std::move(points)) {
    cum.assign(pts.size(), 0.0);
    for (std::size_t i = 1; i < pts.size(); ++i)
      cum[i] = cum[i - 1] + distance(pts[i - 1], pts[i]);
  }
  double length() const { return cum.empty() ? 0.0 : cum.back(); }

  std::size_t segment_of(double s) const {
    auto it = std::upper_bound(cum.begin(), cum.end(), s);
    std::size_t k = (it == cum.begin())
                        ? 0
                        : static_cast<std::size_t>(it - cum.begin()) - 1;
    if (k + 2 > pts.size()) k = pts.size() - 2;
    return k;
  }
  MapPoint at(double s) const {
    if (pts.size() == 1) return pts[0];
    s = std::clamp(s, 0.0, length());
    const std::size_t k = segment_of(s);
    const double seg = cum[k + 1] - cum[k];
    const double t = seg > 0.0 ? (s - cum[k]) / seg : 0.0;
    return pts[k] + t * (pts[k + 1] - pts[k]);
  }
  double heading_at(double s) const {
    if (pts.size() == 1) return 0.0;
    const std::size_t k = segment_of(std::clamp(s, 0.0, length()));
    const MapPoint d = pts[k + 1] - pts[k];
    return wrap_angle(std::atan2(d.y, d.x));
  }
};

std::size_t tick_count(double duration, double dt) {
  return static_cast<std::size_t>(std::ceil(duration / dt - 1e-9)) + 1;
}

}  // namespace

ObstacleTrajectory build_trajectory(const ObstacleGenome& genome,
                                    const LaneMap& map, double duration,
                                    double dt) {
  ObstacleTrajectory traj;
  traj.id = genome.id;
  traj.length = genome.length;
  traj.width = genome.width;
  const std::size_t ticks = tick_count(duration, dt);
  traj.states.reserve(ticks);

  if (genome.mobility == Mobility::kStatic) {
    for (std::size_t j = 0; j < ticks; ++j)
      traj.states.push_back({genome.start, genome.heading, 0.0});
    return traj;
  }

  const auto route = map.shortest_route(genome.start, genome.end);
  if (!route)
    throw std::logic_error("build_trajectory: validated genome has no route");
  const Polyline poly(map.realize_polyline(*route));
  const double total = poly.length();
  for (std::size_t j = 0; j < ticks; ++j) {
    const double t = static_cast<double>(j) * dt;
    const double s = std::min(genome.speed * t, total);
    const bool moving = s < total - 1e-9;
    traj.states.push_back(
        {poly.at(s), poly.heading_at(s), moving ? genome.speed : 0.0});
  }
  return traj;
}

namespace {

// Ego progress along the route leg structure.
struct EgoCursor {
  std::size_t leg = 0;
  double s = 0.0;  // arc position within the current leg's lane
  bool blending = false;
  double lambda = 0.0;   // lateral blend progress
  double target_s = 0.0; // arc position within the blend target lane
  bool arrived = false;
};

struct RouteFrame {
  const LaneMap* map;
  std::vector<RouteLeg> legs;
  std::vector<double> suffix;  // longitudinal extent after each leg

  double remaining(const EgoCursor& c) const {
    if (c.arrived) return 0.0;
    if (c.blending && c.leg + 1 < legs.size()) {
      const RouteLeg& t = legs[c.leg + 1];
      return std::max(t.s_out - c.target_s, 0.0) + suffix[c.leg + 1];
    }
    const RouteLeg& l = legs[c.leg];
    return std::max(l.s_out - c.s, 0.0) + suffix[c.leg];
  }

  MapPoint position(const EgoCursor& c) const {
    const RouteLeg& l = legs[c.leg];
    if (c.blending && c.leg + 1 < legs.size()) {
      const RouteLeg& t = legs[c.leg + 1];
      const MapPoint a = map->point_at(l.lane_id, c.s);
      const MapPoint b = map->point_at(t.lane_id, c.target_s);
      const double m = smoothstep(std::clamp(c.lambda, 0.0, 1.0));
      return {(1.0 - m) * a.x + m * b.x, (1.0 - m) * a.y + m * b.y};
    }
    return map->point_at(l.lane_id, c.s);
  }

  double tangent(const EgoCursor& c) const {
    if (c.blending && c.leg + 1 < legs.size() && c.lambda >= 0.5)
      return map->heading_at(legs[c.leg + 1].lane_id,
                             std::clamp(c.target_s, 0.0,
                                        map->at(legs[c.leg + 1].lane_id).length()));
    const Lane& lane = map->at(legs[c.leg].lane_id);
    return map->heading_at(lane.id, std::clamp(c.s, 0.0, lane.length()));
  }

  // Advances ds meters of longitudinal progress. lambda_add is the blend
  // progress for this step (0 when paused or predicting).
  void advance(EgoCursor& c, double ds, double lambda_add) const {
    if (c.arrived) return;
    if (c.blending) {
      c.s += ds;
      c.target_s += ds;
      c.lambda += lambda_add;
      const Lane& src = map->at(legs[c.leg].lane_id);
      if (c.lambda >= 1.0 || c.s >= src.length()) {
        c.leg += 1;
        c.s = c.target_s;
        c.blending = false;
        c.lambda = 0.0;
      } else {
        return;
      }
    } else {
      c.s += ds;
    }
    while (!c.blending && !c.arrived) {
      const RouteLeg& l = legs[c.leg];
      const bool last = c.leg + 1 == legs.size();
      if (last) {
        if (c.s >= l.s_out - 0.10) {
          c.s = std::min(c.s, l.s_out);
          // arrival is latched by the caller once speed is near zero
        }
        if (c.s > l.s_out) c.s = l.s_out;
        break;
      }
      if (c.s < l.s_out - 1e-9) break;
      const double overshoot = c.s - l.s_out;
      if (l.to_next == RouteTransition::kSuccessor) {
        c.leg += 1;
        c.s = legs[c.leg].s_in + overshoot;
      } else {
        c.blending = true;
        c.lambda = 0.0;
        c.target_s = legs[c.leg + 1].s_in + overshoot;
        break;
      }
    }
  }
};

struct Threat {
  double predicted_min = std::numeric_limits<double>::infinity();
  double current_gap = std::numeric_limits<double>::infinity();
};

}  // namespace

Trace simulate(const ScenarioGenome& scenario, const LaneMap& map,
               const PlannerConfig& cfg) {
  const auto route = map.shortest_route(scenario.ego_start, scenario.ego_end);
  if (!route) throw std::invalid_argument("simulate: ego route does not exist");

  RouteFrame frame{&map, map.route_legs(*route), {}};
  frame.suffix.assign(frame.legs.size(), 0.0);
  for (std::size_t i = frame.legs.size(); i-- > 1;)
    frame.suffix[i - 1] = frame.suffix[i] +
                          (frame.legs[i].s_out - frame.legs[i].s_in);

  const std::size_t ticks = tick_count(scenario.duration, cfg.dt);
  Trace trace;
  trace.map_id = map.id();
  trace.scenario_id = scenario.id;
  trace.dt = cfg.dt;
  trace.duration = scenario.duration;
  trace.ego_length = cfg.ego_length;
  trace.ego_width = cfg.ego_width;
  trace.ego_height = cfg.ego_height;

  for (const auto& g : scenario.obstacles) {
    const auto traj = build_trajectory(g, map, scenario.duration, cfg.dt);
    TraceObstacle rec;
    rec.id = g.id;
    rec.kind = g.kind;
    rec.length = g.length;
    rec.width = g.width;
    rec.height = g.height;
    rec.states = traj.states;
    trace.obstacles.push_back(std::move(rec));
  }

  EgoCursor cursor;
  cursor.s = route->start_offset;

  const auto start_proj = map.project(scenario.ego_start);
  double v = start_proj ? map.at(start_proj->lane_id).speed_limit : 0.0;
  double prev_heading = map.heading_at(frame.legs[0].lane_id,
                                       std::clamp(cursor.s, 0.0,
                                                  map.at(frame.legs[0].lane_id).length()));

  const std::size_t delay_ticks = static_cast<std::size_t>(
      std::llround(cfg.reaction_delay / cfg.dt));
  std::vector<Threat> history;
  history.reserve(ticks);
  bool braking = false;

  MapPoint prev_pos = frame.position(cursor);
  double prev_v = v;

  for (std::size_t j = 0; j < ticks; ++j) {
    const double t = static_cast<double>(j) * cfg.dt;
    const MapPoint pos = frame.position(cursor);

    double heading = prev_heading;
    if (j > 0) {
      const MapPoint d = pos - prev_pos;
      if (norm(d) > 1e-9) heading = wrap_angle(std::atan2(d.y, d.x));
    }

    const auto proj = map.project(pos);
    if (!proj)
      throw std::logic_error("simulate: ego left the lane graph at t=" +
                             std::to_string(t));
    const Lane& lane = map.at(proj->lane_id);
    bool straddling = false;
    const double edge = std::abs(proj->lateral) + 0.5 * cfg.ego_width;
    if (edge > 0.5 * lane.width + 1e-9) {
      const std::string& neighbor =
          proj->lateral >= 0.0 ? lane.left_neighbor : lane.right_neighbor;
      straddling = !neighbor.empty();
    }

    EgoState state;
    state.t = t;
    state.position = pos;
    state.heading = heading;
    state.speed = v;
    state.acceleration = j == 0 ? 0.0 : (v - prev_v) / cfg.dt;
    state.current_lane = proj->lane_id;
    state.straddling = straddling;
    trace.ego.push_back(state);

    prev_pos = pos;
    prev_heading = heading;
    prev_v = v;
    if (j + 1 == ticks) break;

    // Constant-velocity threat prediction from the current tick.
    Threat now;
    {
      const double ego_tangent = frame.tangent(cursor);
      const int steps =
          std::max(1, static_cast<int>(std::round(cfg.horizon / cfg.prediction_step)));
      std::vector<PolygonPose> ego_pred;
      ego_pred.reserve(static_cast<std::size_t>(steps) + 1);
      EgoCursor probe = cursor;
      ego_pred.push_back({pos, ego_tangent, cfg.ego_length, cfg.ego_width});
      for (int k = 1; k <= steps; ++k) {
        frame.advance(probe, v * cfg.prediction_step, 0.0);
        ego_pred.push_back({frame.position(probe), frame.tangent(probe),
                            cfg.ego_length, cfg.ego_width});
      }
      const double cos_h = std::cos(heading);
      const double sin_h = std::sin(heading);
      for (const auto& obs : trace.obstacles) {
        const ObstacleState& os = obs.states[j];
        const MapPoint rel = os.position - pos;
        // Ignore actors behind the ego's center; no yielding to the rear.
        if (cos_h * rel.x + sin_h * rel.y < 0.0) continue;
        const double reach = (v + os.speed) * cfg.horizon +
                             0.5 * (cfg.ego_length + obs.length) +
                             cfg.release_distance;
        if (norm(rel) > reach) continue;
        const MapPoint vel = {os.speed * std::cos(os.heading),
                              os.speed * std::sin(os.heading)};
        double pred = std::numeric_limits<double>::infinity();
        double gap = std::numeric_limits<double>::infinity();
        for (int k = 0; k <= steps; ++k) {
          const double tau = k * cfg.prediction_step;
          const PolygonPose obs_pose{os.position + tau * vel, os.heading,
                                     obs.length, obs.width};
          const double d = polygon_distance(ego_pred[static_cast<std::size_t>(k)],
                                            obs_pose);
          if (k == 0) gap = d;
          pred = std::min(pred, d);
        }
        if (pred < now.predicted_min) {
          now.predicted_min = pred;
          now.current_gap = gap;
        }
      }
    }
    history.push_back(now);
    const Threat delayed = j >= delay_ticks ? history[j - delay_ticks] : Threat{};

    if (!braking && delayed.predicted_min < cfg.yield_distance) braking = true;
    if (braking && delayed.predicted_min > cfg.release_distance) braking = false;

    // Destination approach: aim at a virtual stop point short of the
    // destination with a capped brake; the terminal stiffness of the
    // stop-at-a-point law lands in the buffer and the latch absorbs it.
    const double remaining = frame.remaining(cursor);
    const double room = std::max(remaining - 0.65, 0.0);
    const double v_allow = std::sqrt(2.0 * cfg.arrival_decel * room);
    const double v_target =
        std::min(lane.speed_limit + cfg.overshoot_bias, v_allow);

    double accel = cfg.speed_gain * (v_target - v);
    const double stop_req = (v * v) / (2.0 * std::max(room, 0.05));
    if (stop_req >= 0.8 * cfg.arrival_decel)
      accel = std::min(accel,
                       std::max(-1.05 * stop_req, -(cfg.arrival_decel + 0.5)));
    if (braking) {
      // The threat data is reaction_delay old; discount the distance
      // closed since it was measured.
      const double gap_eff = std::max(
          delayed.current_gap - v * cfg.reaction_delay - cfg.standoff -
              cfg.stop_margin,
          0.05);
      accel = std::min(accel, -(v * v) / (2.0 * gap_eff));
    }
    accel = std::clamp(accel, cfg.max_brake, cfg.max_accel);

    if (!cursor.arrived && remaining <= 0.70 && v <= 0.30) {
      cursor.arrived = true;
    }
    double v_next;
    if (cursor.arrived) {
      v_next = 0.0;
    } else {
      v_next = std::max(0.0, v + accel * cfg.dt);
    }

    bool pause_blend = false;
    if (cursor.blending && cursor.leg + 1 < frame.legs.size()) {
      const std::string& target_lane = frame.legs[cursor.leg + 1].lane_id;
      for (const auto& obs : trace.obstacles) {
        const ObstacleState& os = obs.states[j];
        if (distance(os.position, pos) > cfg.lane_change_pause_radius) continue;
        const auto op = map.project(os.position);
        if (op && op->lane_id == target_lane) {
          pause_blend = true;
          break;
        }
      }
    }
    const double lambda_add =
        pause_blend ? 0.0 : cfg.dt / std::max(cfg.lane_change_duration, 1e-6);
    frame.advance(cursor, v_next * cfg.dt, lambda_add);
    v = v_next;
  }
  return trace;
}

}  // namespace scenforge
