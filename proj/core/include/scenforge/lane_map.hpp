#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "scenforge/geometry.hpp"

namespace scenforge {

/// Raised on map parse failures and invariant violations; the message
/// names the offending lane and check.
class MapError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Lane {
  std::string id;
  std::vector<MapPoint> centerline;  // >= 2 points, no zero-length segments
  double width = 3.5;                // meters
  double speed_limit = 13.89;        // m/s
  std::vector<std::string> successors;
  std::vector<std::string> predecessors;
  std::string left_neighbor;   // empty = none; same travel direction
  std::string right_neighbor;  // empty = none

  // Derived at load: cumulative arc length per centerline vertex.
  std::vector<double> cum_s;

  double length() const { return cum_s.empty() ? 0.0 : cum_s.back(); }
};

struct BoundingBox {
  double min_x = 0, min_y = 0, max_x = 0, max_y = 0;
  bool contains(MapPoint p) const {
    return p.x >= min_x && p.x <= max_x && p.y >= min_y && p.y <= max_y;
  }
};

struct LaneProjection {
  std::string lane_id;
  double s = 0.0;        // arc length along the centerline
  double lateral = 0.0;  // signed offset, positive left of travel
};

/// A drivable path over the lane graph. Consecutive lanes are connected
/// by successor links or by neighbor (lane-change) links.
struct RoutePath {
  std::vector<std::string> lane_sequence;
  double start_offset = 0.0;  // arc length into the first lane
  double end_offset = 0.0;    // arc length into the last lane
  double total_length = 0.0;  // arc length of the realized path
  double cost = 0.0;          // total_length plus lane-change penalties
};

enum class RouteTransition { kSuccessor, kNeighbor };

/// One contiguous stretch of a route within a single lane.
struct RouteLeg {
  std::string lane_id;
  double s_in = 0.0;
  double s_out = 0.0;
  // Transition used to reach the next leg; meaningless on the last leg.
  RouteTransition to_next = RouteTransition::kSuccessor;
};

/// Immutable directed lane graph. Safe for concurrent reads after load.
class LaneMap {
 public:
  /// Loads and validates a map JSON file. Throws MapError.
  static LaneMap load(const std::string& path);
  static LaneMap from_json_text(const std::string& text, const std::string& map_id);

  /// Writes the map back out in the same schema (lossless round-trip).
  void save(const std::string& path) const;
  std::string to_json_text() const;

  const std::string& id() const { return id_; }
  const BoundingBox& bounding_box() const { return bbox_; }
  std::size_t lane_count() const { return lanes_.size(); }
  const std::vector<Lane>& lanes() const { return lanes_; }

  const Lane* find(const std::string& lane_id) const;
  const Lane& at(const std::string& lane_id) const;

  /// Cost added to a route per neighbor (lane-change) hop, meters.
  double lane_change_penalty() const { return lane_change_penalty_; }
  void set_lane_change_penalty(double meters) { lane_change_penalty_ = meters; }

  /// Projects a point onto the closest lane. Returns the lane minimizing
  /// |lateral|, or nullopt when no lane is within width/2 + 2 m.
  std::optional<LaneProjection> project(MapPoint p) const;

  /// Minimal-cost forward route between two projectable points, or
  /// nullopt when unreachable.
  std::optional<RoutePath> shortest_route(MapPoint src, MapPoint dst) const;

  /// Centerline tangent direction at arc length s, in (-pi, pi].
  /// Throws std::out_of_range when s is outside [0, length].
  double heading_at(const std::string& lane_id, double s) const;

  /// Centerline position at arc length s (clamped to [0, length]).
  MapPoint point_at(const std::string& lane_id, double s) const;

  /// Splits a route into per-lane legs with entry/exit offsets.
  std::vector<RouteLeg> route_legs(const RoutePath& route) const;

  /// Samples the route into a continuous polyline. Neighbor hops are
  /// realized as lateral blends over blend_window meters.
  std::vector<MapPoint> realize_polyline(const RoutePath& route,
                                         double blend_window = 15.0,
                                         double sample_step = 0.5) const;

 private:
  struct LaneAabb {
    double min_x, min_y, max_x, max_y;
  };

  void build_derived();
  void validate() const;
  double polyline_length(const std::vector<MapPoint>& pts) const;

  std::string id_;
  BoundingBox bbox_;
  std::vector<Lane> lanes_;
  std::vector<LaneAabb> lane_aabbs_;  // inflated by projection tolerance
  std::unordered_map<std::string, std::size_t> index_;
  double lane_change_penalty_ = 5.0;

  std::size_t index_of(const std::string& lane_id) const;
};

}  // namespace scenforge
