#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "scenforge/genome.hpp"

namespace scenforge {

struct EgoState {
  double t = 0.0;
  MapPoint position;
  double heading = 0.0;       // rad
  double speed = 0.0;         // m/s
  double acceleration = 0.0;  // (speed_j - speed_{j-1}) / dt
  std::string current_lane;
  bool straddling = false;  // ego polygon overlaps a shared neighbor boundary
};

struct ObstacleState {
  MapPoint position;
  double heading = 0.0;
  double speed = 0.0;
};

struct TraceObstacle {
  std::int64_t id = 0;
  ObstacleKind kind = ObstacleKind::kVehicle;
  double length = 1.0;
  double width = 1.0;
  double height = 1.0;
  std::vector<ObstacleState> states;  // one per tick
};

/// Tick-by-tick record of one simulated scenario. This structure is the
/// only contract between the simulator and the oracles; a record file
/// round-trips it losslessly at 1e-9 resolution.
struct Trace {
  std::string map_id;
  std::string scenario_id;
  double dt = 0.1;
  double duration = 30.0;
  double ego_length = 4.93;
  double ego_width = 2.11;
  double ego_height = 1.48;
  std::vector<EgoState> ego;
  std::vector<TraceObstacle> obstacles;

  std::size_t tick_count() const { return ego.size(); }
};

inline constexpr int kRecordSchemaVersion = 1;

/// Versioned line-delimited JSON record (docs/record-format.md). Values
/// are rounded to 1e-9 before writing.
void write_record(const Trace& trace, const std::string& path);
Trace read_record(const std::string& path);

std::string record_to_text(const Trace& trace);
Trace record_from_text(const std::string& text);

}  // namespace scenforge
