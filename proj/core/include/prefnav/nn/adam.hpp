#pragma once

#include <prefnav/nn/mlp.hpp>

namespace prefnav::nn {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Bias-corrected Adam over one flat parameter vector.
class Adam {
 public:
  Adam() = default;
  Adam(Eigen::Index n, AdamConfig cfg) : cfg_(cfg), m_(Vector::Zero(n)), v_(Vector::Zero(n)) {}

  /// One descent step. Throws Error if the update leaves a non-finite parameter.
  void step(Vector& params, const Vector& grads);

  [[nodiscard]] const AdamConfig& config() const noexcept { return cfg_; }
  [[nodiscard]] long steps() const noexcept { return t_; }
  [[nodiscard]] const Vector& first_moment() const noexcept { return m_; }
  [[nodiscard]] const Vector& second_moment() const noexcept { return v_; }

 private:
  AdamConfig cfg_;
  Vector m_;
  Vector v_;
  long t_ = 0;
};

}  // namespace prefnav::nn
