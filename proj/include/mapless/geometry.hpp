#ifndef MAPLESS_GEOMETRY_HPP
#define MAPLESS_GEOMETRY_HPP

#include <algorithm>
#include <cmath>
#include <numbers>

namespace mapless {

inline constexpr double kPi = std::numbers::pi;

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  constexpr Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
  constexpr bool operator==(const Vec2&) const = default;
};

constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 v) { return std::hypot(v.x, v.y); }

/// Rotates v counterclockwise by angle.
inline Vec2 rotate(Vec2 v, double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return {c * v.x - s * v.y, s * v.x + c * v.y};
}

/// Wraps an angle into (-pi, pi].
inline double normalize_angle(double a) {
  if (a > -kPi && a <= kPi) return a;
  a = std::remainder(a, 2.0 * kPi);  // [-pi, pi]
  if (a <= -kPi) a += 2.0 * kPi;
  return a;
}

struct Pose2D {
  double x = 0.0;
  double y = 0.0;
  double psi = 0.0;  // heading, (-pi, pi]

  Vec2 position() const { return {x, y}; }
  constexpr bool operator==(const Pose2D&) const = default;
};

struct Segment {
  Vec2 a;
  Vec2 b;
  constexpr bool operator==(const Segment&) const = default;
};

/// Axis-aligned rectangle, closed on all sides.
struct Bounds {
  double xmin = 0.0;
  double ymin = 0.0;
  double xmax = 0.0;
  double ymax = 0.0;

  constexpr bool contains(Vec2 p) const {
    return p.x >= xmin && p.x <= xmax && p.y >= ymin && p.y <= ymax;
  }
  constexpr bool operator==(const Bounds&) const = default;
};

inline double point_segment_distance(Vec2 p, const Segment& s) {
  const Vec2 d = s.b - s.a;
  const double len2 = dot(d, d);
  if (len2 == 0.0) return norm(p - s.a);
  const double t = std::clamp(dot(p - s.a, d) / len2, 0.0, 1.0);
  return norm(p - (s.a + d * t));
}

}  // namespace mapless

#endif  // MAPLESS_GEOMETRY_HPP
