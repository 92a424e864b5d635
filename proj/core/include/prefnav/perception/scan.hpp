#pragma once

#include <prefnav/geom/scene.hpp>
#include <prefnav/rng.hpp>

#include <Eigen/Core>

#include <optional>

namespace prefnav::perception {

using geom::Pose2;

inline constexpr double kDefaultFov = 87.0 * geom::kPi / 180.0;
inline constexpr double kWideFov = 120.0 * geom::kPi / 180.0;

/// One forward-facing depth scan, rays ordered left to right and
/// normalised by max_range into [0, 1].
struct DepthScan {
  Eigen::VectorXd rays;
  double fov = kDefaultFov;
  double max_range = 6.0;
};

/// Bearing of ray `i` of `count` relative to the heading (left positive).
[[nodiscard]] double ray_offset(int i, int count, double fov) noexcept;

/// Renders `rays` evenly spanning `fov`; the human, when given, is a disc
/// of radius `human_radius`.
[[nodiscard]] DepthScan render_scan(const geom::Scene& scene, const Pose2& robot, const std::optional<Pose2>& human,
                                    double fov, int rays, double max_range = 6.0, double human_radius = 0.3);

/// Sets each ray to 0 independently with probability p.
[[nodiscard]] DepthScan corrupt(const DepthScan& scan, double p, Rng& rng);

}  // namespace prefnav::perception
