#pragma once

#include <prefnav/geom/scene.hpp>

#include <optional>

namespace prefnav::perception {

/// Presence flag and robot-centric polar position of the human; the
/// sentinel (-1 m, 0 rad) whenever k_H = 0.
struct HumanObservation {
  int k_H = 0;
  double d_H = -1.0;
  double dalpha_H = 0.0;

  static constexpr HumanObservation none() noexcept { return {}; }
  [[nodiscard]] constexpr bool visible() const noexcept { return k_H == 1; }
  friend constexpr bool operator==(const HumanObservation&, const HumanObservation&) = default;
};

/// Visible iff the human exists, lies within fov/2 of the heading and within
/// max_range, and the line of sight to its centre is not blocked.
[[nodiscard]] HumanObservation detect_human(const geom::Scene& scene, const geom::Pose2& robot,
                                            const std::optional<geom::Pose2>& human, double fov,
                                            double max_range = 6.0);

}  // namespace prefnav::perception
