#pragma once
/**
 * @file  pose.hpp
 * @brief Planar points, poses and robot-centric polar references.
 *
 * Conventions: right-handed world frame, theta measured from +x,
 * every angle written by this module is wrapped to (-pi, pi].
 */

#include <cmath>
#include <numbers>

namespace prefnav::geom {

inline constexpr double kPi = std::numbers::pi;

/// Wraps an angle to (-pi, pi].
[[nodiscard]] inline double normalize_angle(double angle) noexcept {
  double a = std::remainder(angle, 2.0 * kPi);
  if (a <= -kPi) a += 2.0 * kPi;
  return a;
}

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2& operator+=(const Vec2& o) noexcept { x += o.x; y += o.y; return *this; }
  constexpr Vec2& operator-=(const Vec2& o) noexcept { x -= o.x; y -= o.y; return *this; }
  constexpr Vec2& operator*=(double s) noexcept { x *= s; y *= s; return *this; }

  friend constexpr Vec2 operator+(Vec2 a, const Vec2& b) noexcept { return a += b; }
  friend constexpr Vec2 operator-(Vec2 a, const Vec2& b) noexcept { return a -= b; }
  friend constexpr Vec2 operator*(Vec2 a, double s) noexcept { return a *= s; }
  friend constexpr Vec2 operator*(double s, Vec2 a) noexcept { return a *= s; }
  friend constexpr bool operator==(const Vec2&, const Vec2&) = default;

  [[nodiscard]] constexpr double dot(const Vec2& o) const noexcept { return x * o.x + y * o.y; }
  [[nodiscard]] constexpr double cross(const Vec2& o) const noexcept { return x * o.y - y * o.x; }
  [[nodiscard]] double norm() const noexcept { return std::hypot(x, y); }
};

[[nodiscard]] inline double distance(const Vec2& a, const Vec2& b) noexcept { return (a - b).norm(); }

struct Pose2 {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;

  Pose2() = default;
  Pose2(double x_, double y_, double theta_) : x(x_), y(y_), theta(normalize_angle(theta_)) {}
  Pose2(const Vec2& p, double theta_) : Pose2(p.x, p.y, theta_) {}

  [[nodiscard]] Vec2 position() const noexcept { return {x, y}; }
  friend bool operator==(const Pose2&, const Pose2&) = default;
};

/// (distance, bearing) of a target as seen from a robot frame.
struct PolarRef {
  double distance = -1.0;
  double bearing = 0.0;

  /// Encodes "nothing observed".
  static constexpr PolarRef sentinel() noexcept { return {-1.0, 0.0}; }
  [[nodiscard]] constexpr bool is_sentinel() const noexcept { return distance == -1.0 && bearing == 0.0; }
  friend constexpr bool operator==(const PolarRef&, const PolarRef&) = default;
};

[[nodiscard]] inline PolarRef to_polar(const Vec2& target, const Pose2& frame) noexcept {
  const Vec2 d = target - frame.position();
  return {d.norm(), normalize_angle(std::atan2(d.y, d.x) - frame.theta)};
}

/// Inverse of to_polar.
[[nodiscard]] inline Vec2 from_polar(const PolarRef& ref, const Pose2& frame) noexcept {
  const double a = frame.theta + ref.bearing;
  return {frame.x + ref.distance * std::cos(a), frame.y + ref.distance * std::sin(a)};
}

}  // namespace prefnav::geom
