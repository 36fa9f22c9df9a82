#pragma once

#include <array>
#include <cmath>

namespace scenforge {

/// A point in the map frame, meters.
struct MapPoint {
  double x = 0.0;
  double y = 0.0;
};

inline MapPoint operator+(MapPoint a, MapPoint b) { return {a.x + b.x, a.y + b.y}; }
inline MapPoint operator-(MapPoint a, MapPoint b) { return {a.x - b.x, a.y - b.y}; }
inline MapPoint operator*(double k, MapPoint p) { return {k * p.x, k * p.y}; }

inline double dot(MapPoint a, MapPoint b) { return a.x * b.x + a.y * b.y; }
inline double cross(MapPoint a, MapPoint b) { return a.x * b.y - a.y * b.x; }
inline double norm(MapPoint p) { return std::hypot(p.x, p.y); }
inline double distance(MapPoint a, MapPoint b) { return norm(b - a); }

/// Wraps an angle to (-pi, pi].
double wrap_angle(double rad);

/// Converts a speed in km/h to m/s. All internal units are SI.
inline constexpr double kmh_to_mps(double kmh) { return kmh / 3.6; }
inline constexpr double mps_to_kmh(double mps) { return mps * 3.6; }

/// An oriented rectangle: actor footprint in the plane.
/// Heading is measured counter-clockwise from the map +x axis.
struct PolygonPose {
  MapPoint center;
  double heading = 0.0;
  double length = 1.0;  // extent along heading
  double width = 1.0;   // extent across heading
};

/// Corner positions in counter-clockwise order starting front-left.
std::array<MapPoint, 4> polygon_corners(const PolygonPose& pose);

/// True if p lies inside or on the rectangle boundary.
bool polygon_contains(const PolygonPose& pose, MapPoint p);

/// Minimum Euclidean distance between two oriented rectangles.
/// Returns 0 exactly when they overlap or touch.
double polygon_distance(const PolygonPose& a, const PolygonPose& b);

/// Distance from a point to the closest point of a segment.
double point_segment_distance(MapPoint p, MapPoint a, MapPoint b);

/// Minimum distance between two segments.
double segment_segment_distance(MapPoint a0, MapPoint a1, MapPoint b0, MapPoint b1);

}  // namespace scenforge
