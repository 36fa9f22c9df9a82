#pragma once

#include <map>

#include "scenforge/lane_map.hpp"
#include "scenforge/trace.hpp"

namespace scenforge {

/// Grading thresholds. Speed figures originate in km/h and are converted
/// once; the boundary value itself is passing (violations are strict).
struct Thresholds {
  double beta_safe = kmh_to_mps(8.0);  // allowed overshoot above the limit
  double delta_safe = 5.0;             // safe straddle duration, s
  double gamma_comfort = 4.0;          // max comfortable acceleration
  double epsilon_comfort = -4.0;       // min comfortable acceleration
  double collision_distance = 0.0;
  // Threshold crossings closer than this merge into one violation event.
  double merge_gap = 0.5;
};

enum class ViolationKind {
  kCollision,
  kSpeeding,
  kUnsafeLaneChange,
  kFastAccel,
  kHardBrake,
};
inline constexpr std::array<ViolationKind, 5> kAllViolationKinds = {
    ViolationKind::kCollision, ViolationKind::kSpeeding,
    ViolationKind::kUnsafeLaneChange, ViolationKind::kFastAccel,
    ViolationKind::kHardBrake};

const char* to_string(ViolationKind kind);
ViolationKind violation_kind_from_string(const std::string& s);

enum class CollisionSide { kFront, kRear, kLeft, kRight };
const char* to_string(CollisionSide side);

struct Violation {
  ViolationKind kind = ViolationKind::kCollision;
  double t_first = 0.0;   // t_c / t_s / t_u / t_f / t_h
  double duration = 0.0;  // >= dt
  double value = 0.0;     // kind-specific magnitude
  MapPoint ego_position;
  double ego_speed = 0.0;
  double ego_heading = 0.0;
  // Collision metadata, meaningful only for kind == kCollision.
  CollisionSide collision_side = CollisionSide::kFront;
  std::int64_t obstacle_id = -1;
  ObstacleKind obstacle_kind = ObstacleKind::kVehicle;
  double obstacle_length = 0.0;
  double obstacle_width = 0.0;
  double obstacle_height = 0.0;
  double obstacle_speed = 0.0;
  double obstacle_heading = 0.0;
};

/// Output of grading one trace.
struct Evaluation {
  ObjectiveVector objectives;
  std::vector<Violation> violations;
  std::map<std::int64_t, double> per_obstacle_min_distance;
};

struct EvaluatedScenario {
  ScenarioGenome genome;
  ObjectiveVector objectives;
  std::map<std::int64_t, double> per_obstacle_min_distance;
  std::vector<Violation> violations;
};

struct CollisionCheck {
  std::vector<Violation> violations;  // at most one per obstacle
  std::map<std::int64_t, double> min_distance;
};

/// Collision oracle: per-obstacle min polygon distance; first contact
/// becomes the violation, with the side classified from the contact
/// bearing in the ego frame (45-degree sectors).
CollisionCheck check_collision(const Trace& trace);

struct SpeedingCheck {
  std::vector<Violation> violations;  // one per overshoot episode
  double min_gap = 0.0;               // min over ticks of limit - speed
};
SpeedingCheck check_speeding(const Trace& trace, const LaneMap& map,
                             const Thresholds& th);

struct StraddleCheck {
  std::vector<Violation> violations;  // episodes longer than delta_safe
  double max_duration = 0.0;          // longest straddle episode, s
};
StraddleCheck check_unsafe_lane_change(const Trace& trace, const Thresholds& th);

struct ComfortCheck {
  std::vector<Violation> violations;
  double extremum = 0.0;  // max acceleration / min acceleration
};
ComfortCheck check_fast_accel(const Trace& trace, const Thresholds& th);
ComfortCheck check_hard_brake(const Trace& trace, const Thresholds& th);

/// Runs all five checks over a full trace; never aborts mid-scenario.
Evaluation evaluate(const Trace& trace, const LaneMap& map, const Thresholds& th);

/// Violation report files (docs/violations-format.md).
std::string violations_to_json_text(const std::string& scenario_id,
                                    const Evaluation& eval);
void write_violations_json(const std::string& scenario_id, const Evaluation& eval,
                           const std::string& path);
std::string violations_csv_header();
std::string violation_to_csv_row(const std::string& scenario_id, const Violation& v);

}  // namespace scenforge
