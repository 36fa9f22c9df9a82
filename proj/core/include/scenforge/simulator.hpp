#pragma once

#include "scenforge/lane_map.hpp"
#include "scenforge/trace.hpp"

namespace scenforge {

/// Planner and simulation parameters (docs/planner-contract.md). The
/// defaults are deliberately imperfect: the overshoot bias, actuation
/// limits beyond the comfort thresholds, delayed reaction, and pausable
/// lane-change blend each keep one violation class reachable.
struct PlannerConfig {
  double dt = 0.1;                      // s
  double overshoot_bias = 1.67;         // cruise target above the limit, m/s
  double max_accel = 4.5;               // m/s^2
  double max_brake = -6.0;              // m/s^2
  double speed_gain = 0.8;              // P-gain toward the target speed, 1/s
  double horizon = 3.0;                 // constant-velocity prediction, s
  double prediction_step = 0.3;         // horizon sampling, s
  double reaction_delay = 0.5;          // threat data age before reacting, s
  double yield_distance = 4.0;          // predicted-gap braking trigger, m
  double release_distance = 6.0;        // braking hysteresis release, m
  double standoff = 4.0;                // stop gap behind obstacles, m
  double stop_margin = 1.0;             // extra stop slack, m
  double arrival_decel = 3.0;           // destination approach rate, m/s^2
  double lane_change_duration = 3.0;    // nominal lateral blend time, s
  double lane_change_pause_radius = 10.0;  // target-lane obstacle hold-off, m
  double ego_length = 4.93;
  double ego_width = 2.11;
  double ego_height = 1.48;
};

struct ObstacleTrajectory {
  std::int64_t id = 0;
  double length = 1.0;  // polygon template
  double width = 1.0;
  std::vector<ObstacleState> states;  // one per tick
};

/// Realizes an obstacle genome as per-tick states. Dynamic obstacles move
/// along shortest_route(start, end) at the genome speed and park at the
/// route end; static obstacles hold the start pose.
ObstacleTrajectory build_trajectory(const ObstacleGenome& genome,
                                    const LaneMap& map, double duration,
                                    double dt);

/// Runs the built-in planner against the scenario. Pure and deterministic:
/// identical inputs produce identical traces.
Trace simulate(const ScenarioGenome& scenario, const LaneMap& map,
               const PlannerConfig& cfg);

}  // namespace scenforge
