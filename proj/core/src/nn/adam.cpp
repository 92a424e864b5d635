#include <prefnav/nn/adam.hpp>

#include <prefnav/error.hpp>

#include <cmath>

namespace prefnav::nn {

void Adam::step(Vector& params, const Vector& grads) {
  if (params.size() != m_.size() || grads.size() != m_.size()) throw Error("adam: shape mismatch");
  if (!grads.allFinite()) throw Error("adam: non-finite gradient");
  ++t_;
  m_ = cfg_.beta1 * m_ + (1.0 - cfg_.beta1) * grads;
  v_ = cfg_.beta2 * v_ + (1.0 - cfg_.beta2) * grads.cwiseAbs2();
  const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  params.array() -= cfg_.lr * (m_.array() / c1) / ((v_.array() / c2).sqrt() + cfg_.eps);
  if (!params.allFinite()) throw Error("adam: non-finite parameters after update");
}

}  // namespace prefnav::nn
