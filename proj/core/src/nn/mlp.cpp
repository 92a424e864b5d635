#include <prefnav/nn/mlp.hpp>

#include <prefnav/error.hpp>

#include <cmath>

namespace prefnav::nn {

std::string to_string(Activation a) {
  switch (a) {
    case Activation::kLinear: return "linear";
    case Activation::kRelu: return "relu";
    case Activation::kTanh: return "tanh";
    case Activation::kSigmoid: return "sigmoid";
  }
  return "linear";
}

Activation activation_from_string(const std::string& s) {
  if (s == "linear") return Activation::kLinear;
  if (s == "relu") return Activation::kRelu;
  if (s == "tanh") return Activation::kTanh;
  if (s == "sigmoid") return Activation::kSigmoid;
  throw Error("unknown activation '" + s + "'");
}

void activate(Matrix& z, Activation act) {
  switch (act) {
    case Activation::kLinear: break;
    case Activation::kRelu: z = z.cwiseMax(0.0); break;
    case Activation::kTanh: z = z.array().tanh().matrix(); break;
    case Activation::kSigmoid: z = (1.0 / (1.0 + (-z.array()).exp())).matrix(); break;
  }
}

Mlp::Mlp(std::vector<LayerShape> layers) : layers_(std::move(layers)) {
  if (layers_.empty()) throw Error("mlp needs at least one layer");
  Eigen::Index total = 0;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& s = layers_[l];
    if (s.in <= 0 || s.out <= 0) throw Error("mlp layer sizes must be positive");
    if (l > 0 && layers_[l - 1].out != s.in) throw Error("mlp layer shapes do not chain");
    offsets_.push_back(total);
    total += static_cast<Eigen::Index>(s.in) * s.out + s.out;
  }
  params_ = Vector::Zero(total);
  grads_ = Vector::Zero(total);
}

Mlp::Mlp(std::vector<LayerShape> layers, Rng& rng) : Mlp(std::move(layers)) {
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(layers_[l].in));
    const Eigen::Index n = static_cast<Eigen::Index>(layers_[l].in) * layers_[l].out + layers_[l].out;
    for (Eigen::Index i = 0; i < n; ++i) params_[offsets_[l] + i] = uniform(rng, -bound, bound);
  }
}

Mlp Mlp::make(int in, const std::vector<int>& hidden, int out, Activation hidden_act, Activation out_act, Rng& rng) {
  std::vector<LayerShape> shapes;
  int prev = in;
  for (int h : hidden) {
    shapes.push_back({prev, h, hidden_act});
    prev = h;
  }
  shapes.push_back({prev, out, out_act});
  return Mlp(std::move(shapes), rng);
}

Eigen::Map<const Matrix> Mlp::weight(std::size_t l) const {
  return {params_.data() + offsets_[l], layers_[l].out, layers_[l].in};
}
Eigen::Map<const Vector> Mlp::bias(std::size_t l) const {
  return {params_.data() + offsets_[l] + static_cast<Eigen::Index>(layers_[l].in) * layers_[l].out, layers_[l].out};
}
Eigen::Map<Matrix> Mlp::weight(std::size_t l) { return {params_.data() + offsets_[l], layers_[l].out, layers_[l].in}; }
Eigen::Map<Vector> Mlp::bias(std::size_t l) {
  return {params_.data() + offsets_[l] + static_cast<Eigen::Index>(layers_[l].in) * layers_[l].out, layers_[l].out};
}

void Mlp::check_input(const Matrix& x) const {
  if (layers_.empty()) throw Error("mlp is empty");
  if (x.rows() != input_dim())
    throw Error("mlp input has " + std::to_string(x.rows()) + " rows, expected " + std::to_string(input_dim()));
}

const Matrix& Mlp::forward(const Matrix& x) {
  check_input(x);
  cache_.resize(layers_.size() + 1);
  cache_[0] = x;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    Matrix& z = cache_[l + 1];
    z.noalias() = weight(l) * cache_[l];
    z.colwise() += bias(l);
    activate(z, layers_[l].act);
  }
  return cache_.back();
}

Matrix Mlp::predict(const Matrix& x) const {
  check_input(x);
  Matrix a = x;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    Matrix z = weight(l) * a;
    z.colwise() += bias(l);
    activate(z, layers_[l].act);
    a = std::move(z);
  }
  return a;
}

Matrix Mlp::backward(const Matrix& grad_out, bool accumulate) {
  if (cache_.size() != layers_.size() + 1) throw Error("mlp backward called before forward");
  const Matrix& out = cache_.back();
  if (grad_out.rows() != out.rows() || grad_out.cols() != out.cols()) throw Error("mlp backward: gradient shape mismatch");

  Matrix delta = grad_out;
  for (std::size_t li = layers_.size(); li-- > 0;) {
    const Matrix& a = cache_[li + 1];
    switch (layers_[li].act) {
      case Activation::kLinear: break;
      case Activation::kRelu: delta = (a.array() > 0.0).select(delta, 0.0); break;
      case Activation::kTanh: delta.array() *= 1.0 - a.array().square(); break;
      case Activation::kSigmoid: delta.array() *= a.array() * (1.0 - a.array()); break;
    }
    if (accumulate) {
      const auto& s = layers_[li];
      Eigen::Map<Matrix> gw(grads_.data() + offsets_[li], s.out, s.in);
      Eigen::Map<Vector> gb(grads_.data() + offsets_[li] + static_cast<Eigen::Index>(s.in) * s.out, s.out);
      gw.noalias() += delta * cache_[li].transpose();
      gb += delta.rowwise().sum();
    }
    Matrix next = weight(li).transpose() * delta;
    delta = std::move(next);
  }
  return delta;
}

}  // namespace prefnav::nn
