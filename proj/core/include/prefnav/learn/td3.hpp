#pragma once
/**
 * @file  td3.hpp
 * @brief Twin-delayed actor-critic with a behavioural-cloning term.
 *
 * Actions live in a normalised space inside the networks: the actor ends in
 * tanh, and (a_v, a_w) in [-1, 1]^2 maps to v = 0.25 (a_v + 1), omega = pi a_w.
 * Critics take [s; a_norm]. The actor's ascent direction is
 *   lambda_RL grad J - lambda_BC grad L_BC,
 * J = mean Q1(s, pi(s)) over the experience batch and
 * L_BC = sum ||pi(s_i) - a_i||^2 over the demonstration batch.
 */

#include <prefnav/learn/replay.hpp>
#include <prefnav/nn/adam.hpp>
#include <prefnav/nn/checkpoint.hpp>
#include <prefnav/nn/mlp.hpp>

#include <nlohmann/json.hpp>

namespace prefnav::learn {

using nn::Matrix;
using nn::Vector;

struct TD3Config {
  double gamma = 0.99;
  double lr_actor = 1e-4;
  double lr_critic = 8e-4;
  std::size_t buffer_E = 200000;
  std::size_t batch_E = 64;
  std::size_t batch_D = 64;
  double sigma_explore = 0.2;
  double sigma_target = 0.05;
  double noise_clip = 0.5;
  double lambda_RL = 30.0 / 4.0;
  double lambda_BC = 10.0 / 4.0;
  int n_ep = 150;
  std::size_t warmup = 5000;
  int policy_delay = 2;
  double tau = 0.005;
  std::vector<int> hidden{256, 256};
  /// Demonstration transitions also enter the critic batches.
  bool critics_use_demos = true;
  double q_abort = 1e6;

  [[nodiscard]] nlohmann::json to_json() const;
  /// Missing keys keep their defaults; unknown keys are rejected.
  static TD3Config from_json(const nlohmann::json& j);
  void validate() const;
};

[[nodiscard]] Eigen::Vector2d normalize_action(const sim::Action& a) noexcept;
[[nodiscard]] sim::Action denormalize_action(const Eigen::Vector2d& a) noexcept;

/// Actor, twin critics, their targets and the optimizer states.
struct PolicyBundle {
  int state_dim = 0;
  nn::Mlp actor, critic1, critic2;
  nn::Mlp actor_target, critic1_target, critic2_target;
  nn::Adam actor_opt, critic1_opt, critic2_opt;
  long updates = 0;  // critic updates performed

  PolicyBundle() = default;
  PolicyBundle(int state_dim, const TD3Config& cfg, Rng& rng);

  /// Actor-only checkpoint plus targets and critics for resuming.
  [[nodiscard]] nn::Checkpoint to_checkpoint() const;
  /// Restores networks; optimizer moments restart from zero.
  static PolicyBundle from_checkpoint(const nn::Checkpoint& ckpt, const TD3Config& cfg);
};

/// Deterministic (or Gaussian-perturbed in normalised space, then clamped)
/// action. Throws Error("policy divergence") on a non-finite actor output.
[[nodiscard]] sim::Action select_action(const nn::Mlp& actor, const Eigen::VectorXd& s, bool explore, Rng& rng,
                                        double sigma = 0.2);

/// y = r + gamma (1 - done) min(Q1'(s', a'), Q2'(s', a')), with
/// a' = clamp(target_actor(s') + clamp(noise, -c, c), -1, 1). `noise` is
/// (2, B) and is scaled by nothing: pass sigma-scaled draws.
[[nodiscard]] Vector bellman_targets(const PolicyBundle& b, const Batch& batch, const Matrix& noise,
                                     const TD3Config& cfg);

struct CriticStats {
  double loss1 = 0.0;  // mean squared Bellman error
  double loss2 = 0.0;
  double q_mean = 0.0;
  double q_abs_max = 0.0;
  Vector targets;
};

/// Critic gradients for fixed targets (left in critic grads()).
CriticStats critic_gradients(PolicyBundle& b, const Batch& batch, const Vector& targets);

/// Draws target noise, regresses both critics on y and takes one Adam step each.
CriticStats critic_update(PolicyBundle& b, const Batch& batch, const TD3Config& cfg, Rng& rng);

struct ActorStats {
  double actor_loss = 0.0;  // -mean Q1(s, pi(s)) over the experience batch
  double bc_loss = 0.0;     // L_BC over the demonstration batch
  Vector grad_J;            // gradient of J = mean Q1(s, pi(s))
  Vector grad_BC;           // gradient of L_BC
  Vector ascent;            // lambda_RL grad_J - lambda_BC grad_BC
};

/// Gradient parts and the combined ascent direction, without touching any
/// parameter. Throws Error("no demonstrations loaded") when lambda_BC > 0 and
/// `demo` is empty.
[[nodiscard]] ActorStats actor_gradients(PolicyBundle& b, const Batch& exp, const Batch& demo, const TD3Config& cfg);

/// Adam step along the combined direction followed by soft target updates.
ActorStats actor_update(PolicyBundle& b, const Batch& exp, const Batch& demo, const TD3Config& cfg);

/// target <- (1 - tau) target + tau main, elementwise.
void soft_update(nn::Mlp& target, const nn::Mlp& main, double tau);

}  // namespace prefnav::learn
