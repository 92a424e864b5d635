#pragma once

#include <prefnav/nn/mlp.hpp>

#include <functional>
#include <span>

namespace prefnav::nn {

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
};

/// Relative error |a - n| / max(|a|, |n|, floor).
[[nodiscard]] double relative_error(double analytic, double numeric, double floor = 1e-7) noexcept;

/// Compares `analytic[i]` against the central difference of `loss` for each
/// probed index. `params` is perturbed in place and restored.
[[nodiscard]] GradCheckResult check_gradients(const std::function<double()>& loss, Vector& params,
                                              const Vector& analytic, std::span<const Eigen::Index> probes,
                                              double h = 1e-5);

/// `count` distinct random parameter indices out of `n`.
[[nodiscard]] std::vector<Eigen::Index> random_probes(Eigen::Index n, std::size_t count, Rng& rng);

}  // namespace prefnav::nn
