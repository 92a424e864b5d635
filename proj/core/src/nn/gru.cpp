#include <prefnav/nn/gru.hpp>

#include <prefnav/error.hpp>

#include <cmath>

namespace prefnav::nn {
namespace {

Matrix sigmoid(const Matrix& z) { return (1.0 / (1.0 + (-z.array()).exp())).matrix(); }

}  // namespace

Gru::Gru(int input, int hidden) : in_(input), hid_(hidden) {
  if (input <= 0 || hidden <= 0) throw Error("gru sizes must be positive");
  const Eigen::Index n = w_size() + u_size() + 6 * static_cast<Eigen::Index>(hid_);
  params_ = Vector::Zero(n);
  grads_ = Vector::Zero(n);
}

Gru::Gru(int input, int hidden, Rng& rng) : Gru(input, hidden) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(hidden));
  for (Eigen::Index i = 0; i < params_.size(); ++i) params_[i] = uniform(rng, -bound, bound);
}

Vector Gru::step(const Vector& x, const Vector& h) const {
  if (x.size() != in_ || h.size() != hid_) throw Error("gru step: shape mismatch");
  const Vector gx = W() * x + bi();
  const Vector gh = U() * h + bh();
  const Vector r = sigmoid(gx.head(hid_) + gh.head(hid_));
  const Vector z = sigmoid(gx.segment(hid_, hid_) + gh.segment(hid_, hid_));
  const Vector n = (gx.tail(hid_).array() + r.array() * gh.tail(hid_).array()).tanh().matrix();
  return ((1.0 - z.array()) * n.array() + z.array() * h.array()).matrix();
}

const std::vector<Matrix>& Gru::forward(std::span<const Matrix> xs) {
  if (xs.empty()) throw Error("gru forward: empty sequence");
  const Eigen::Index batch = xs.front().cols();
  cache_.clear();
  outputs_.clear();
  Matrix h = Matrix::Zero(hid_, batch);
  for (const Matrix& x : xs) {
    if (x.rows() != in_ || x.cols() != batch) throw Error("gru forward: shape mismatch");
    Matrix gx = W() * x;
    gx.colwise() += bi();
    Matrix gh = U() * h;
    gh.colwise() += bh();
    StepCache c;
    c.x = x;
    c.h_prev = h;
    c.r = sigmoid(gx.topRows(hid_) + gh.topRows(hid_));
    c.z = sigmoid(gx.middleRows(hid_, hid_) + gh.middleRows(hid_, hid_));
    c.hn = gh.bottomRows(hid_);
    c.n = (gx.bottomRows(hid_).array() + c.r.array() * c.hn.array()).tanh().matrix();
    h = ((1.0 - c.z.array()) * c.n.array() + c.z.array() * h.array()).matrix();
    cache_.push_back(std::move(c));
    outputs_.push_back(h);
  }
  return outputs_;
}

std::vector<Matrix> Gru::backward(std::span<const Matrix> dh) {
  if (cache_.empty()) throw Error("gru backward called before forward");
  if (dh.size() != cache_.size()) throw Error("gru backward: sequence length mismatch");
  const Eigen::Index H = hid_;
  Eigen::Map<Matrix> gW(grads_.data(), 3 * H, in_);
  Eigen::Map<Matrix> gU(grads_.data() + w_size(), 3 * H, H);
  Eigen::Map<Vector> gbi(grads_.data() + w_size() + u_size(), 3 * H);
  Eigen::Map<Vector> gbh(grads_.data() + w_size() + u_size() + 3 * H, 3 * H);

  std::vector<Matrix> dx(cache_.size());
  Matrix carry = Matrix::Zero(H, cache_.front().x.cols());
  for (std::size_t t = cache_.size(); t-- > 0;) {
    const StepCache& c = cache_[t];
    const Matrix dht = dh[t] + carry;
    const Eigen::Index B = dht.cols();

    const Matrix dn_pre = (dht.array() * (1.0 - c.z.array()) * (1.0 - c.n.array().square())).matrix();
    const Matrix dz_pre =
        (dht.array() * (c.h_prev.array() - c.n.array()) * c.z.array() * (1.0 - c.z.array())).matrix();
    const Matrix dhn = (dn_pre.array() * c.r.array()).matrix();
    const Matrix dr_pre = (dn_pre.array() * c.hn.array() * c.r.array() * (1.0 - c.r.array())).matrix();

    Matrix dgx(3 * H, B);  // input-side pre-activation gradients
    dgx.topRows(H) = dr_pre;
    dgx.middleRows(H, H) = dz_pre;
    dgx.bottomRows(H) = dn_pre;
    Matrix dgh(3 * H, B);  // hidden-side
    dgh.topRows(H) = dr_pre;
    dgh.middleRows(H, H) = dz_pre;
    dgh.bottomRows(H) = dhn;

    gW.noalias() += dgx * c.x.transpose();
    gbi += dgx.rowwise().sum();
    gU.noalias() += dgh * c.h_prev.transpose();
    gbh += dgh.rowwise().sum();

    dx[t] = W().transpose() * dgx;
    carry = (dht.array() * c.z.array()).matrix();
    carry.noalias() += U().transpose() * dgh;
  }
  return dx;
}

}  // namespace prefnav::nn
