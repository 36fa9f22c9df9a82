#pragma once

#include <string>
#include <vector>

#include "scenforge/genome.hpp"
#include "scenforge/lane_map.hpp"
#include "scenforge/rng.hpp"

namespace scenforge {

struct Range {
  double min = 0.0;
  double max = 0.0;
  bool contains(double v) const { return v >= min && v <= max; }
};

/// Allowed size and speed per obstacle kind.
struct TypeBounds {
  Range width;   // meters
  Range length;  // meters
  Range height;  // meters
  Range speed;   // m/s
};

/// Domain-specific constraint table. Speed bounds are stated in km/h by
/// the sources and converted once here; everything downstream is SI.
/// Default construction yields the embedded defaults: pedestrian
/// anthropometrics, bicycle-with-rider dimensions, and road-vehicle
/// ranges from parking-lot to highway speeds.
struct ConstraintTable {
  TypeBounds vehicle{{1.5, 2.6},
                     {3.5, 12.0},
                     {1.3, 4.1},
                     {kmh_to_mps(8.0), kmh_to_mps(110.0)}};
  TypeBounds pedestrian{{0.24, 0.67},
                        {0.20, 0.45},
                        {0.97, 1.87},
                        {kmh_to_mps(4.5), kmh_to_mps(10.5)}};
  TypeBounds bicycle{{0.4, 0.8},
                     {1.5, 2.0},
                     {1.0, 1.8},
                     {kmh_to_mps(6.0), kmh_to_mps(30.0)}};
  double static_probability = 0.1;  // share of static obstacles at sampling

  const TypeBounds& bounds(ObstacleKind kind) const;
  static ConstraintTable defaults() { return {}; }
};

enum class BreachCode {
  kLengthOutOfRange,
  kWidthOutOfRange,
  kHeightOutOfRange,
  kSpeedOutOfRange,
  kHeadingOutOfRange,
  kStartOffMap,
  kEndOffMap,
  kNoRoute,
};

struct Breach {
  BreachCode code;
  std::string detail;
};

/// Raised when repeated resampling cannot produce a valid genome, which
/// signals a degenerate map rather than bad luck.
class SamplingExhausted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Empty result means the genome is valid: sizes and speed inside the
/// kind bounds, heading in (-pi, pi], endpoints on the map, and (for
/// dynamic obstacles) a routable start -> end path.
std::vector<Breach> validate(const ObstacleGenome& genome,
                             const ConstraintTable& table, const LaneMap& map);

/// Resamples only the breached genes until validate passes. Start/end
/// are retried up to 100 times before both are resampled from scratch;
/// throws SamplingExhausted after 1000 total attempts.
ObstacleGenome repair(const ObstacleGenome& genome, const ConstraintTable& table,
                      const LaneMap& map, Rng& rng);

/// Draws a fresh valid obstacle. Heading is set to the lane tangent at
/// the start point; mobility is static with table.static_probability.
ObstacleGenome sample_obstacle(const ConstraintTable& table, const LaneMap& map,
                               Rng& rng, std::int64_t id);

/// Uniform point on a uniformly chosen lane centerline.
MapPoint sample_lane_point(const LaneMap& map, Rng& rng, std::string* lane_id = nullptr,
                           double* s = nullptr);

}  // namespace scenforge
