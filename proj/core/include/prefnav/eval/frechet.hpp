#pragma once
/**
 * @file  frechet.hpp
 * @brief Discrete Fréchet distance and its deviation-aware variant.
 *
 * With d(i, j) the coupling table
 *   d(i, j) = max(|A_i - B_j|, min(d(i-1, j), d(i, j-1), d(i-1, j-1))),
 * F(A, B) = d(n-1, m-1). The prefix curve takes, for every prefix
 * A[0..i], the best prefix of B: f_i = min_j d(i, j); the last sample is
 * the full-curve value F(A, B). The deviation point t* minimises
 *   C(t) = cos(phi) t + sin(phi) f(t) / max f
 * over the samples (ties go to the larger t), i.e. the knee where the
 * normalised prefix distance starts to outgrow the followed fraction.
 */

#include <prefnav/geom/trajectory.hpp>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include <limits>
#include <span>
#include <vector>

namespace prefnav::eval {

using geom::Vec2;

inline constexpr std::size_t kDefaultResample = 100;
inline constexpr double kDefaultPhi = 3.0 * geom::kPi / 4.0;

/// Full coupling table, row i for A_i. Throws Error on an empty input.
[[nodiscard]] Eigen::MatrixXd coupling_table(std::span<const Vec2> a, std::span<const Vec2> b);

/// F(A, B) over the given vertices (resample = 0) or after resampling both
/// polylines to `resample` points equally spaced in arc length.
[[nodiscard]] double discrete_frechet(std::span<const Vec2> a, std::span<const Vec2> b,
                                      std::size_t resample = kDefaultResample);

struct FrechetCurve {
  std::vector<double> t;  // arc-length fraction of A at each sample
  std::vector<double> f;  // meters, nondecreasing; last sample is F(A, B)
  /// Prefix value at t = 1 with B's end left free (min_j d(n-1, j)). The
  /// knee is located on this open-ended curve; NaN means "same as f.back()".
  double f_open_end = std::numeric_limits<double>::quiet_NaN();

  /// f with the last sample replaced by the open-ended value.
  [[nodiscard]] std::vector<double> open_ended() const;
};

[[nodiscard]] FrechetCurve partial_frechet_curve(std::span<const Vec2> a, std::span<const Vec2> b,
                                                 std::size_t resample = kDefaultResample);

/// Index of the deviation sample; the last index when f is identically 0.
[[nodiscard]] std::size_t deviation_index(const FrechetCurve& curve, double phi = kDefaultPhi);
[[nodiscard]] double deviation_point(const FrechetCurve& curve, double phi = kDefaultPhi);

enum class EndpointMode { kAuto, kForward, kReversed };

[[nodiscard]] std::string to_string(EndpointMode m);
[[nodiscard]] EndpointMode endpoint_mode_from_string(const std::string& s);

struct FrechetReport {
  double F_full = 0.0;
  FrechetCurve curve;
  double t_star = 1.0;
  double f_at_t_star = 0.0;
  bool reversed = false;

  [[nodiscard]] nlohmann::json to_json() const;
  /// "t,f" rows for plotting.
  [[nodiscard]] std::string curve_csv() const;
};

/// A is the rollout, B the demonstration. kAuto reverses both when their
/// ends are closer than their starts (shared goal, different starts).
/// Throws Error for inputs with fewer than two distinct points.
[[nodiscard]] FrechetReport deviation_aware_frechet(std::span<const Vec2> a, std::span<const Vec2> b,
                                                    EndpointMode mode = EndpointMode::kAuto,
                                                    std::size_t resample = kDefaultResample,
                                                    double phi = kDefaultPhi);

}  // namespace prefnav::eval
