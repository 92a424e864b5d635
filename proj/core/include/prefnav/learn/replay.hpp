#pragma once

#include <prefnav/rng.hpp>
#include <prefnav/sim/types.hpp>

#include <Eigen/Core>

#include <span>
#include <vector>

namespace prefnav::learn {

/// Column-per-sample view of sampled transitions; actions are in the
/// normalised tanh space of the actor.
struct Batch {
  Eigen::MatrixXd s;       // (state_dim, B)
  Eigen::MatrixXd a;       // (2, B)
  Eigen::VectorXd r;       // (B)
  Eigen::MatrixXd s_next;  // (state_dim, B)
  Eigen::VectorXd done;    // (B), 1 for terminal
  [[nodiscard]] Eigen::Index size() const noexcept { return r.size(); }
  [[nodiscard]] bool empty() const noexcept { return r.size() == 0; }
};

/// Concatenates two batches column-wise (either may be empty).
[[nodiscard]] Batch concat(const Batch& a, const Batch& b);

/// Fixed-capacity ring of transitions. The experience buffer evicts the
/// oldest entry when full; the demonstration buffer is frozen after loading.
class ReplayBuffer {
 public:
  ReplayBuffer(std::size_t capacity, sim::Source kind);

  /// Throws Error once the buffer is frozen or on a state-size change.
  void push(const sim::Transition& t);
  void freeze() noexcept { frozen_ = true; }
  [[nodiscard]] bool frozen() const noexcept { return frozen_; }

  [[nodiscard]] std::size_t size() const noexcept { return data_.size(); }
  [[nodiscard]] bool empty() const noexcept { return data_.empty(); }
  [[nodiscard]] std::size_t capacity() const noexcept { return capacity_; }
  [[nodiscard]] sim::Source kind() const noexcept { return kind_; }
  /// Logical index 0 is the oldest stored transition.
  [[nodiscard]] const sim::Transition& at(std::size_t i) const;

  /// `n` uniform draws with replacement.
  [[nodiscard]] Batch sample(std::size_t n, Rng& rng) const;
  [[nodiscard]] Batch gather(std::span<const std::size_t> idx) const;

 private:
  std::size_t capacity_;
  sim::Source kind_;
  bool frozen_ = false;
  std::vector<sim::Transition> data_;
  std::size_t head_ = 0;  // next slot to overwrite once full
};

}  // namespace prefnav::learn
