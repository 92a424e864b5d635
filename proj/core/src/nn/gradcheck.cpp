#include <prefnav/nn/gradcheck.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace prefnav::nn {

double relative_error(double analytic, double numeric, double floor) noexcept {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
}

GradCheckResult check_gradients(const std::function<double()>& loss, Vector& params, const Vector& analytic,
                                std::span<const Eigen::Index> probes, double h) {
  GradCheckResult res;
  for (const Eigen::Index i : probes) {
    const double saved = params[i];
    params[i] = saved + h;
    const double up = loss();
    params[i] = saved - h;
    const double down = loss();
    params[i] = saved;
    const double numeric = (up - down) / (2.0 * h);
    const double err = relative_error(analytic[i], numeric);
    if (err >= res.max_rel_error) {
      res.max_rel_error = err;
      res.worst_index = static_cast<std::size_t>(i);
      res.worst_analytic = analytic[i];
      res.worst_numeric = numeric;
    }
  }
  return res;
}

std::vector<Eigen::Index> random_probes(Eigen::Index n, std::size_t count, Rng& rng) {
  std::vector<Eigen::Index> all(static_cast<std::size_t>(n));
  std::iota(all.begin(), all.end(), Eigen::Index{0});
  std::shuffle(all.begin(), all.end(), rng);
  all.resize(std::min(all.size(), count));
  return all;
}

}  // namespace prefnav::nn
