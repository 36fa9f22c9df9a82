#include "scenforge/geometry.hpp"

#include <algorithm>
#include <limits>
#include <numbers>

namespace scenforge {

double wrap_angle(double rad) {
  const double two_pi = 2.0 * std::numbers::pi;
  double a = std::fmod(rad, two_pi);
  if (a <= -std::numbers::pi) a += two_pi;
  if (a > std::numbers::pi) a -= two_pi;
  return a;
}

std::array<MapPoint, 4> polygon_corners(const PolygonPose& pose) {
  const double c = std::cos(pose.heading);
  const double s = std::sin(pose.heading);
  const double hl = 0.5 * pose.length;
  const double hw = 0.5 * pose.width;
  auto to_map = [&](double lx, double ly) -> MapPoint {
    return {pose.center.x + c * lx - s * ly, pose.center.y + s * lx + c * ly};
  };
  return {to_map(hl, hw), to_map(-hl, hw), to_map(-hl, -hw), to_map(hl, -hw)};
}

bool polygon_contains(const PolygonPose& pose, MapPoint p) {
  const double c = std::cos(pose.heading);
  const double s = std::sin(pose.heading);
  const MapPoint d = p - pose.center;
  const double lx = c * d.x + s * d.y;
  const double ly = -s * d.x + c * d.y;
  return std::abs(lx) <= 0.5 * pose.length && std::abs(ly) <= 0.5 * pose.width;
}

double point_segment_distance(MapPoint p, MapPoint a, MapPoint b) {
  const MapPoint ab = b - a;
  const double len2 = dot(ab, ab);
  if (len2 <= 0.0) return distance(p, a);
  double t = dot(p - a, ab) / len2;
  t = std::clamp(t, 0.0, 1.0);
  return distance(p, a + t * ab);
}

static bool segments_intersect(MapPoint a0, MapPoint a1, MapPoint b0, MapPoint b1) {
  auto orient = [](MapPoint p, MapPoint q, MapPoint r) { return cross(q - p, r - p); };
  const double d1 = orient(b0, b1, a0);
  const double d2 = orient(b0, b1, a1);
  const double d3 = orient(a0, a1, b0);
  const double d4 = orient(a0, a1, b1);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) &&
      ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0)))
    return true;
  return false;  // collinear touches handled by distance == 0 below
}

double segment_segment_distance(MapPoint a0, MapPoint a1, MapPoint b0, MapPoint b1) {
  if (segments_intersect(a0, a1, b0, b1)) return 0.0;
  double d = point_segment_distance(a0, b0, b1);
  d = std::min(d, point_segment_distance(a1, b0, b1));
  d = std::min(d, point_segment_distance(b0, a0, a1));
  d = std::min(d, point_segment_distance(b1, a0, a1));
  return d;
}

// Separating-axis overlap test on the four face normals of two rectangles.
static bool rectangles_overlap(const std::array<MapPoint, 4>& ca,
                               const std::array<MapPoint, 4>& cb) {
  auto axis_separates = [&](MapPoint axis) {
    double amin = std::numeric_limits<double>::infinity(), amax = -amin;
    double bmin = amin, bmax = amax;
    for (const auto& p : ca) {
      const double v = dot(p, axis);
      amin = std::min(amin, v);
      amax = std::max(amax, v);
    }
    for (const auto& p : cb) {
      const double v = dot(p, axis);
      bmin = std::min(bmin, v);
      bmax = std::max(bmax, v);
    }
    return amax < bmin || bmax < amin;
  };
  const std::array<MapPoint, 4> axes = {
      ca[1] - ca[0], ca[3] - ca[0], cb[1] - cb[0], cb[3] - cb[0]};
  for (const auto& e : axes) {
    if (axis_separates({-e.y, e.x})) return false;
  }
  return true;
}

double polygon_distance(const PolygonPose& a, const PolygonPose& b) {
  const auto ca = polygon_corners(a);
  const auto cb = polygon_corners(b);
  if (rectangles_overlap(ca, cb)) return 0.0;
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      best = std::min(best, segment_segment_distance(ca[i], ca[(i + 1) % 4],
                                                     cb[j], cb[(j + 1) % 4]));
    }
  }
  return best;
}

}  // namespace scenforge
