#pragma once

#include <prefnav/geom/pose.hpp>

#include <span>
#include <vector>

namespace prefnav::geom {

struct TimedPose {
  double t = 0.0;
  Pose2 pose;
};

/// Timestamped planar path. Holds at least two samples with strictly
/// increasing timestamps and finite coordinates.
class Trajectory {
 public:
  explicit Trajectory(std::vector<TimedPose> samples);

  /// Builds a trajectory from points; headings follow the path tangent and
  /// timestamps are arc length divided by `speed`.
  static Trajectory from_points(std::span<const Vec2> points, double speed = 1.0);

  [[nodiscard]] const std::vector<TimedPose>& samples() const noexcept { return samples_; }
  [[nodiscard]] std::size_t size() const noexcept { return samples_.size(); }
  [[nodiscard]] const TimedPose& front() const noexcept { return samples_.front(); }
  [[nodiscard]] const TimedPose& back() const noexcept { return samples_.back(); }
  [[nodiscard]] double duration() const noexcept { return back().t - front().t; }

  [[nodiscard]] std::vector<Vec2> points() const;
  [[nodiscard]] double arc_length() const;

  /// Pose at time `t`, clamped to the first/last sample outside the range.
  [[nodiscard]] Pose2 at_time(double t) const;

  /// Same path traversed backwards; timestamps mirrored so they stay increasing.
  [[nodiscard]] Trajectory reversed() const;

 private:
  std::vector<TimedPose> samples_;
};

enum class Interpolation { kLinear, kCatmullRom };

/// `n` samples equally spaced in arc length; endpoints are kept exactly.
/// Throws Error("zero-length trajectory") for a degenerate input.
[[nodiscard]] Trajectory resample(const Trajectory& traj, std::size_t n,
                                  Interpolation interp = Interpolation::kLinear);

[[nodiscard]] double polyline_length(std::span<const Vec2> pts) noexcept;

/// Point-only resampling used by the metrics and the tracking controller.
[[nodiscard]] std::vector<Vec2> resample_points(std::span<const Vec2> pts, std::size_t n);

/// Cumulative arc length at every vertex (first entry 0).
[[nodiscard]] std::vector<double> cumulative_length(std::span<const Vec2> pts);

/// Euclidean distance from `p` to the polyline.
[[nodiscard]] double distance_to_polyline(const Vec2& p, std::span<const Vec2> pts) noexcept;

}  // namespace prefnav::geom
