#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "scenforge/geometry.hpp"

namespace scenforge {

enum class ObstacleKind { kVehicle, kPedestrian, kBicycle };
enum class Mobility { kStatic, kDynamic };

const char* to_string(ObstacleKind kind);
const char* to_string(Mobility mobility);
ObstacleKind obstacle_kind_from_string(const std::string& s);
Mobility mobility_from_string(const std::string& s);

/// The fully mutable obstacle individual. Gene order:
/// id, start, end, heading, length, width, height, speed, kind, mobility.
struct ObstacleGenome {
  std::int64_t id = 0;
  MapPoint start;
  MapPoint end;
  double heading = 0.0;  // rad in (-pi, pi]
  double length = 1.0;   // meters
  double width = 1.0;
  double height = 1.0;
  double speed = 1.0;  // m/s
  ObstacleKind kind = ObstacleKind::kVehicle;
  Mobility mobility = Mobility::kDynamic;
};

inline constexpr int kGeneCount = 10;

/// One test: an ego route, a duration, and 1..max obstacles.
struct ScenarioGenome {
  std::string id;
  MapPoint ego_start;
  MapPoint ego_end;
  double duration = 30.0;  // seconds
  std::vector<ObstacleGenome> obstacles;

  /// Smallest id not used by any current obstacle.
  std::int64_t next_free_id() const;
};

/// Per-scenario fitness. Optimization directions are fixed:
/// collision, speed gap and hard brake are minimized; unsafe-change
/// duration and fast acceleration are maximized.
struct ObjectiveVector {
  double collision = 0.0;      // min ego-obstacle distance, meters
  double speed = 0.0;          // min (limit - ego speed), m/s
  double unsafe_change = 0.0;  // max straddle episode, seconds
  double fast_accel = 0.0;     // max acceleration, m/s^2
  double hard_brake = 0.0;     // min acceleration, m/s^2

  std::array<double, 5> as_array() const {
    return {collision, speed, unsafe_change, fast_accel, hard_brake};
  }
};

enum class Direction { kMinimize, kMaximize };

/// Violation-prone direction per objective, in as_array order.
inline constexpr std::array<Direction, 5> kObjectiveDirections = {
    Direction::kMinimize, Direction::kMinimize, Direction::kMaximize,
    Direction::kMaximize, Direction::kMinimize};

/// Scenario file round-trip (docs/scenario-format.md).
void write_scenario(const ScenarioGenome& scenario, const std::string& map_id,
                    const std::string& path);
ScenarioGenome read_scenario(const std::string& path, std::string* map_id = nullptr);
std::string scenario_to_json_text(const ScenarioGenome& scenario,
                                  const std::string& map_id);
ScenarioGenome scenario_from_json_text(const std::string& text,
                                       std::string* map_id = nullptr);

}  // namespace scenforge
