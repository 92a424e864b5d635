#pragma once
/**
 * @file  mlp.hpp
 * @brief Dense multi-layer perceptron with cached reverse-mode gradients.
 *
 * Samples are columns: a batch of B inputs is an (in x B) matrix. All
 * parameters live in one flat vector (per layer: W column-major, then b),
 * which is what the optimizer, soft target updates and checkpoints act on.
 */

#include <prefnav/rng.hpp>

#include <Eigen/Core>

#include <string>
#include <vector>

namespace prefnav::nn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class Activation { kLinear, kRelu, kTanh, kSigmoid };

[[nodiscard]] std::string to_string(Activation a);
[[nodiscard]] Activation activation_from_string(const std::string& s);

struct LayerShape {
  int in = 0;
  int out = 0;
  Activation act = Activation::kLinear;
  friend bool operator==(const LayerShape&, const LayerShape&) = default;
};

class Mlp {
 public:
  Mlp() = default;
  /// Weights and biases drawn from U(-1/sqrt(fan_in), +1/sqrt(fan_in)).
  Mlp(std::vector<LayerShape> layers, Rng& rng);
  /// Zero-initialised network of the given shape.
  explicit Mlp(std::vector<LayerShape> layers);

  static Mlp make(int in, const std::vector<int>& hidden, int out, Activation hidden_act, Activation out_act,
                  Rng& rng);

  [[nodiscard]] int input_dim() const noexcept { return layers_.empty() ? 0 : layers_.front().in; }
  [[nodiscard]] int output_dim() const noexcept { return layers_.empty() ? 0 : layers_.back().out; }
  [[nodiscard]] const std::vector<LayerShape>& layers() const noexcept { return layers_; }
  [[nodiscard]] Eigen::Index parameter_count() const noexcept { return params_.size(); }

  /// Evaluates and caches the activations needed by backward().
  const Matrix& forward(const Matrix& x);
  /// Evaluates without touching the cache.
  [[nodiscard]] Matrix predict(const Matrix& x) const;

  /// Back-propagates dLoss/dOutput for the cached batch. Accumulates
  /// parameter gradients unless `accumulate` is false and returns
  /// dLoss/dInput. Throws if forward() has not been called.
  Matrix backward(const Matrix& grad_out, bool accumulate = true);

  void zero_grad() { grads_.setZero(); }
  Vector& params() noexcept { return params_; }
  [[nodiscard]] const Vector& params() const noexcept { return params_; }
  Vector& grads() noexcept { return grads_; }
  [[nodiscard]] const Vector& grads() const noexcept { return grads_; }

  [[nodiscard]] Eigen::Map<const Matrix> weight(std::size_t layer) const;
  [[nodiscard]] Eigen::Map<const Vector> bias(std::size_t layer) const;
  Eigen::Map<Matrix> weight(std::size_t layer);
  Eigen::Map<Vector> bias(std::size_t layer);

 private:
  void check_input(const Matrix& x) const;

  std::vector<LayerShape> layers_;
  std::vector<Eigen::Index> offsets_;
  Vector params_;
  Vector grads_;
  std::vector<Matrix> cache_;  // cache_[l] = input of layer l; cache_.back() = network output
};

/// Applies `act` elementwise in place.
void activate(Matrix& z, Activation act);

}  // namespace prefnav::nn
