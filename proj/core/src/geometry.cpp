#include "driveintent/geometry.hpp"

#include <cassert>
#include <limits>
#include <numbers>

namespace driveintent {

double wrap_angle(double a) {
  const double two_pi = 2.0 * std::numbers::pi;
  a = std::fmod(a + std::numbers::pi, two_pi);
  if (a <= 0.0) a += two_pi;
  return a - std::numbers::pi;
}

PolylineProjection project_to_polyline(const std::vector<Vec2>& polyline,
                                       Vec2 p) {
  assert(polyline.size() >= 2);

  PolylineProjection best;
  double best_d2 = std::numeric_limits<double>::infinity();
  double arclen = 0.0;

  for (std::size_t i = 0; i + 1 < polyline.size(); ++i) {
    const Vec2 a = polyline[i];
    const Vec2 b = polyline[i + 1];
    const Vec2 ab = b - a;
    const double len2 = dot(ab, ab);
    double u = len2 > 0.0 ? dot(p - a, ab) / len2 : 0.0;
    u = std::fmin(1.0, std::fmax(0.0, u));
    const Vec2 foot = a + ab * u;
    const Vec2 d = p - foot;
    const double d2 = dot(d, d);
    if (d2 < best_d2) {
      best_d2 = d2;
      const double seg_len = std::sqrt(len2);
      const Vec2 tangent_unit = seg_len > 0.0 ? ab * (1.0 / seg_len) : Vec2{1, 0};
      best.station = arclen + u * seg_len;
      best.lateral = cross(tangent_unit, d);
      best.tangent = std::atan2(ab.y, ab.x);
      best.distance = std::sqrt(d2);
    }
    arclen += std::sqrt(len2);
  }
  return best;
}

}  // namespace driveintent
