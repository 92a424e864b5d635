#pragma once
/**
 * @file  gru.hpp
 * @brief Gated recurrent layer used as the predictor's sequence core.
 *
 *   r  = sigmoid(Wr x + bir + Ur h + bhr)
 *   z  = sigmoid(Wz x + biz + Uz h + bhz)
 *   n  = tanh(Wn x + bin + r * (Un h + bhn))
 *   h' = (1 - z) * n + z * h
 *
 * Flat parameter layout: W (3H x in), U (3H x H), bi (3H), bh (3H); gate
 * rows ordered r, z, n.
 */

#include <prefnav/nn/mlp.hpp>

#include <span>

namespace prefnav::nn {

class Gru {
 public:
  Gru() = default;
  Gru(int input, int hidden);             // zero parameters
  Gru(int input, int hidden, Rng& rng);   // U(-1/sqrt(H), 1/sqrt(H))

  [[nodiscard]] int input_dim() const noexcept { return in_; }
  [[nodiscard]] int hidden_dim() const noexcept { return hid_; }

  /// Single recurrent update for one sample (no caching).
  [[nodiscard]] Vector step(const Vector& x, const Vector& h) const;

  /// Unrolls over a sequence of (in x B) inputs from h0 = 0 and caches
  /// everything backward() needs. Returns the hidden state after every step.
  const std::vector<Matrix>& forward(std::span<const Matrix> xs);

  /// Back-propagation through time. `dh[t]` is dLoss/dh_t coming from
  /// above (may be zero); returns dLoss/dx_t for every step.
  std::vector<Matrix> backward(std::span<const Matrix> dh);

  void zero_grad() { grads_.setZero(); }
  Vector& params() noexcept { return params_; }
  [[nodiscard]] const Vector& params() const noexcept { return params_; }
  Vector& grads() noexcept { return grads_; }
  [[nodiscard]] const Vector& grads() const noexcept { return grads_; }

 private:
  [[nodiscard]] Eigen::Map<const Matrix> W() const { return {params_.data(), 3 * hid_, in_}; }
  [[nodiscard]] Eigen::Map<const Matrix> U() const { return {params_.data() + w_size(), 3 * hid_, hid_}; }
  [[nodiscard]] Eigen::Map<const Vector> bi() const { return {params_.data() + w_size() + u_size(), 3 * hid_}; }
  [[nodiscard]] Eigen::Map<const Vector> bh() const {
    return {params_.data() + w_size() + u_size() + 3 * hid_, 3 * hid_};
  }
  [[nodiscard]] Eigen::Index w_size() const noexcept { return static_cast<Eigen::Index>(3) * hid_ * in_; }
  [[nodiscard]] Eigen::Index u_size() const noexcept { return static_cast<Eigen::Index>(3) * hid_ * hid_; }

  int in_ = 0;
  int hid_ = 0;
  Vector params_;
  Vector grads_;

  struct StepCache {
    Matrix x, h_prev, r, z, n, hn;  // hn = Un h + bhn
  };
  std::vector<StepCache> cache_;
  std::vector<Matrix> outputs_;
};

}  // namespace prefnav::nn
