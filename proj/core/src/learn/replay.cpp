#include <prefnav/learn/replay.hpp>

#include <prefnav/error.hpp>
#include <prefnav/learn/td3.hpp>

namespace prefnav::learn {

Batch concat(const Batch& a, const Batch& b) {
  if (a.empty()) return b;
  if (b.empty()) return a;
  if (a.s.rows() != b.s.rows()) throw Error("concat: state sizes differ");
  Batch c;
  c.s.resize(a.s.rows(), a.size() + b.size());
  c.s << a.s, b.s;
  c.a.resize(2, a.size() + b.size());
  c.a << a.a, b.a;
  c.r.resize(a.size() + b.size());
  c.r << a.r, b.r;
  c.s_next.resize(a.s.rows(), a.size() + b.size());
  c.s_next << a.s_next, b.s_next;
  c.done.resize(a.size() + b.size());
  c.done << a.done, b.done;
  return c;
}

ReplayBuffer::ReplayBuffer(std::size_t capacity, sim::Source kind) : capacity_(capacity), kind_(kind) {
  if (capacity == 0) throw Error("replay buffer capacity must be positive");
}

void ReplayBuffer::push(const sim::Transition& t) {
  if (frozen_) throw Error("replay buffer is frozen");
  if (!data_.empty() && t.s.size() != data_.front().s.size()) throw Error("replay buffer: state size changed");
  if (data_.size() < capacity_) {
    data_.push_back(t);
    return;
  }
  data_[head_] = t;
  head_ = (head_ + 1) % capacity_;
}

const sim::Transition& ReplayBuffer::at(std::size_t i) const {
  if (i >= data_.size()) throw Error("replay buffer index out of range");
  return data_[(head_ + i) % data_.size()];
}

Batch ReplayBuffer::gather(std::span<const std::size_t> idx) const {
  Batch b;
  if (idx.empty()) return b;
  const auto n = static_cast<Eigen::Index>(idx.size());
  const Eigen::Index dim = data_.front().s.size();
  b.s.resize(dim, n);
  b.a.resize(2, n);
  b.r.resize(n);
  b.s_next.resize(dim, n);
  b.done.resize(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto& t = at(idx[static_cast<std::size_t>(k)]);
    b.s.col(k) = t.s;
    b.a.col(k) = normalize_action(t.a);
    b.r[k] = t.r;
    b.s_next.col(k) = t.s_next;
    b.done[k] = t.done ? 1.0 : 0.0;
  }
  return b;
}

Batch ReplayBuffer::sample(std::size_t n, Rng& rng) const {
  if (data_.empty()) return {};
  std::uniform_int_distribution<std::size_t> pick(0, data_.size() - 1);
  std::vector<std::size_t> idx(n);
  for (auto& i : idx) i = pick(rng);
  return gather(idx);
}

}  // namespace prefnav::learn
