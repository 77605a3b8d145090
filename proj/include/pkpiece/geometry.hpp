#pragma once

#include <cmath>
#include <numbers>

namespace pkp {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  constexpr Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  constexpr Vec2 operator-() const { return {-x, -y}; }
  constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
  constexpr Vec2& operator+=(Vec2 o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  constexpr Vec2& operator-=(Vec2 o) {
    x -= o.x;
    y -= o.y;
    return *this;
  }
  constexpr bool operator==(const Vec2&) const = default;
};

constexpr Vec2 operator*(double s, Vec2 v) { return v * s; }
constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
// w x r for a scalar angular velocity w.
constexpr Vec2 cross(double w, Vec2 r) { return {-w * r.y, w * r.x}; }
constexpr Vec2 perp(Vec2 v) { return {-v.y, v.x}; }
inline double length(Vec2 v) { return std::hypot(v.x, v.y); }
constexpr double length_squared(Vec2 v) { return dot(v, v); }

/// Rotation by a fixed angle, cached as cosine/sine.
struct Rotation {
  double c = 1.0;
  double s = 0.0;

  Rotation() = default;
  explicit Rotation(double angle) : c(std::cos(angle)), s(std::sin(angle)) {}

  Vec2 apply(Vec2 v) const { return {c * v.x - s * v.y, s * v.x + c * v.y}; }
  Vec2 apply_inverse(Vec2 v) const { return {c * v.x + s * v.y, -s * v.x + c * v.y}; }
};

/// Maps an angle onto (-pi, pi].
inline double wrap_angle(double a) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  if (a > -std::numbers::pi && a <= std::numbers::pi) return a;
  a = std::fmod(a + std::numbers::pi, two_pi);
  if (a <= 0.0) a += two_pi;
  return a - std::numbers::pi;
}

/// Planar pose (x, y, theta) in meters and radians.
struct Pose {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;

  constexpr Vec2 position() const { return {x, y}; }
  constexpr bool operator==(const Pose&) const = default;
};

/// Planar twist (vx, vy, omega) in m/s and rad/s.
struct Twist {
  double vx = 0.0;
  double vy = 0.0;
  double omega = 0.0;

  constexpr Vec2 linear() const { return {vx, vy}; }
  constexpr bool operator==(const Twist&) const = default;
};

/// Axis-aligned rectangle.
struct Rect {
  double min_x = 0.0;
  double min_y = 0.0;
  double max_x = 0.0;
  double max_y = 0.0;

  constexpr bool contains(Vec2 p) const {
    return p.x >= min_x && p.x <= max_x && p.y >= min_y && p.y <= max_y;
  }
  constexpr bool contains(const Rect& r) const {
    return r.min_x >= min_x && r.max_x <= max_x && r.min_y >= min_y && r.max_y <= max_y;
  }
  constexpr double width() const { return max_x - min_x; }
  constexpr double height() const { return max_y - min_y; }
  constexpr bool operator==(const Rect&) const = default;
};

}  // namespace pkp
