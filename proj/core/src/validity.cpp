#include "scenforge/validity.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace scenforge {

const TypeBounds& ConstraintTable::bounds(ObstacleKind kind) const {
  switch (kind) {
    case ObstacleKind::kVehicle: return vehicle;
    case ObstacleKind::kPedestrian: return pedestrian;
    case ObstacleKind::kBicycle: return bicycle;
  }
  return vehicle;
}

namespace {

std::string fmt_range(const char* what, double v, const Range& r) {
  std::ostringstream os;
  os << what << " " << v << " outside [" << r.min << ", " << r.max << "]";
  return os.str();
}

}  // namespace

std::vector<Breach> validate(const ObstacleGenome& g,
                             const ConstraintTable& table,
                             const LaneMap& map) {
  std::vector<Breach> breaches;
  const TypeBounds& b = table.bounds(g.kind);
  if (!b.length.contains(g.length))
    breaches.push_back({BreachCode::kLengthOutOfRange,
                        fmt_range("length", g.length, b.length)});
  if (!b.width.contains(g.width))
    breaches.push_back(
        {BreachCode::kWidthOutOfRange, fmt_range("width", g.width, b.width)});
  if (!b.height.contains(g.height))
    breaches.push_back({BreachCode::kHeightOutOfRange,
                        fmt_range("height", g.height, b.height)});
  if (!b.speed.contains(g.speed))
    breaches.push_back(
        {BreachCode::kSpeedOutOfRange,
         g.speed > b.speed.max ? "speed exceeds kind max: " + std::to_string(g.speed)
                               : fmt_range("speed", g.speed, b.speed)});
  if (!(g.heading > -std::numbers::pi && g.heading <= std::numbers::pi) ||
      !std::isfinite(g.heading))
    breaches.push_back({BreachCode::kHeadingOutOfRange,
                        "heading " + std::to_string(g.heading) +
                            " outside (-pi, pi]"});
  const auto start_proj = map.project(g.start);
  const auto end_proj = map.project(g.end);
  if (!start_proj)
    breaches.push_back({BreachCode::kStartOffMap, "start point off map"});
  if (!end_proj)
    breaches.push_back({BreachCode::kEndOffMap, "end point off map"});
  if (g.mobility == Mobility::kDynamic && start_proj && end_proj) {
    if (!map.shortest_route(g.start, g.end))
      breaches.push_back({BreachCode::kNoRoute, "no valid path from start to end"});
  }
  return breaches;
}

MapPoint sample_lane_point(const LaneMap& map, Rng& rng, std::string* lane_id,
                           double* s_out) {
  const auto& lanes = map.lanes();
  const Lane& lane = lanes[rng.uniform_int(lanes.size())];
  const double s = rng.uniform(0.0, lane.length());
  if (lane_id) *lane_id = lane.id;
  if (s_out) *s_out = s;
  return map.point_at(lane.id, s);
}

namespace {

void resample_size_speed(ObstacleGenome& g, const TypeBounds& b, Rng& rng,
                         bool length, bool width, bool height, bool speed) {
  if (length) g.length = rng.uniform(b.length.min, b.length.max);
  if (width) g.width = rng.uniform(b.width.min, b.width.max);
  if (height) g.height = rng.uniform(b.height.min, b.height.max);
  if (speed) g.speed = rng.uniform(b.speed.min, b.speed.max);
}

// Draws start (with tangent heading) and a routable end for dynamic
// obstacles; static obstacles end where they start.
bool resample_endpoints(ObstacleGenome& g, const LaneMap& map, Rng& rng,
                        bool redraw_start, bool redraw_end) {
  std::string lane_id;
  double s = 0.0;
  if (redraw_start) {
    g.start = sample_lane_point(map, rng, &lane_id, &s);
    g.heading = map.heading_at(lane_id, s);
  }
  if (g.mobility == Mobility::kStatic) {
    if (redraw_start || redraw_end) g.end = g.start;
    return true;
  }
  if (redraw_end) g.end = sample_lane_point(map, rng);
  return map.shortest_route(g.start, g.end).has_value();
}

}  // namespace

ObstacleGenome repair(const ObstacleGenome& genome, const ConstraintTable& table,
                      const LaneMap& map, Rng& rng) {
  ObstacleGenome g = genome;
  const int kMaxTotal = 1000;
  const int kEndpointRetries = 100;
  int attempts = 0;
  int endpoint_failures = 0;

  while (attempts++ < kMaxTotal) {
    const auto breaches = validate(g, table, map);
    if (breaches.empty()) return g;

    bool redraw_start = false, redraw_end = false;
    bool fix_len = false, fix_wid = false, fix_hgt = false, fix_spd = false;
    bool fix_heading = false;
    for (const Breach& br : breaches) {
      switch (br.code) {
        case BreachCode::kLengthOutOfRange: fix_len = true; break;
        case BreachCode::kWidthOutOfRange: fix_wid = true; break;
        case BreachCode::kHeightOutOfRange: fix_hgt = true; break;
        case BreachCode::kSpeedOutOfRange: fix_spd = true; break;
        case BreachCode::kHeadingOutOfRange: fix_heading = true; break;
        case BreachCode::kStartOffMap: redraw_start = true; break;
        case BreachCode::kEndOffMap: redraw_end = true; break;
        case BreachCode::kNoRoute:
          // Retry the end first; after repeated failures start over.
          redraw_end = true;
          if (++endpoint_failures > kEndpointRetries) {
            redraw_start = true;
            redraw_end = true;
          }
          break;
      }
    }
    resample_size_speed(g, table.bounds(g.kind), rng, fix_len, fix_wid,
                        fix_hgt, fix_spd);
    if (fix_heading && !redraw_start) {
      if (const auto proj = map.project(g.start))
        g.heading = map.heading_at(proj->lane_id, proj->s);
      else
        redraw_start = true;
    }
    if (redraw_start || redraw_end)
      resample_endpoints(g, map, rng, redraw_start, redraw_end);
  }
  throw SamplingExhausted(
      "repair failed after 1000 attempts; the map likely has no routable "
      "lane pairs");
}

ObstacleGenome sample_obstacle(const ConstraintTable& table, const LaneMap& map,
                               Rng& rng, std::int64_t id) {
  const int kMaxTotal = 1000;
  for (int attempt = 0; attempt < kMaxTotal; ++attempt) {
    ObstacleGenome g;
    g.id = id;
    switch (rng.uniform_int(3)) {
      case 0: g.kind = ObstacleKind::kVehicle; break;
      case 1: g.kind = ObstacleKind::kPedestrian; break;
      default: g.kind = ObstacleKind::kBicycle; break;
    }
    const TypeBounds& b = table.bounds(g.kind);
    resample_size_speed(g, b, rng, true, true, true, true);
    g.mobility = rng.chance(table.static_probability) ? Mobility::kStatic
                                                      : Mobility::kDynamic;
    if (resample_endpoints(g, map, rng, true, true)) return g;
    // A handful of unroutable end draws is normal; retry the end alone.
    for (int retry = 0; retry < 20; ++retry) {
      if (resample_endpoints(g, map, rng, false, true)) return g;
    }
  }
  throw SamplingExhausted(
      "sample_obstacle failed after 1000 attempts; the map likely has no "
      "routable lane pairs");
}

}  // namespace scenforge
