#pragma once

#include <cmath>
#include <vector>

namespace driveintent {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }

/// Wraps an angle to (-pi, pi].
double wrap_angle(double a);

/// Perpendicular-foot projection of a point onto an open polyline.
struct PolylineProjection {
  double station = 0.0;   // arclength of the foot point, m
  double lateral = 0.0;   // signed offset, > 0 left of travel direction
  double tangent = 0.0;   // heading of the containing segment, radians
  double distance = 0.0;  // Euclidean point-to-foot distance, m
};

/// Projects p onto the nearest point of the polyline (feet clamped to
/// segment ends). Polyline must have >= 2 points.
PolylineProjection project_to_polyline(const std::vector<Vec2>& polyline,
                                       Vec2 p);

}  // namespace driveintent
