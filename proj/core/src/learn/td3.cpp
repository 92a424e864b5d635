#include <prefnav/learn/td3.hpp>

#include <prefnav/error.hpp>

#include <cmath>
#include <algorithm>

namespace prefnav::learn {

using nlohmann::json;

json TD3Config::to_json() const {
  return {{"gamma", gamma},
          {"lr_actor", lr_actor},
          {"lr_critic", lr_critic},
          {"buffer_E", buffer_E},
          {"batch_E", batch_E},
          {"batch_D", batch_D},
          {"sigma_explore", sigma_explore},
          {"sigma_target", sigma_target},
          {"noise_clip", noise_clip},
          {"lambda_RL", lambda_RL},
          {"lambda_BC", lambda_BC},
          {"n_ep", n_ep},
          {"warmup", warmup},
          {"policy_delay", policy_delay},
          {"tau", tau},
          {"hidden", hidden},
          {"critics_use_demos", critics_use_demos},
          {"q_abort", q_abort}};
}

TD3Config TD3Config::from_json(const json& j) {
  TD3Config c;
  const json defaults = c.to_json();
  for (const auto& [key, _] : j.items())
    if (!defaults.contains(key)) throw Error("unknown TD3 option '" + key + "'");
  json merged = defaults;
  merged.update(j);
  c.gamma = merged.at("gamma").get<double>();
  c.lr_actor = merged.at("lr_actor").get<double>();
  c.lr_critic = merged.at("lr_critic").get<double>();
  c.buffer_E = merged.at("buffer_E").get<std::size_t>();
  c.batch_E = merged.at("batch_E").get<std::size_t>();
  c.batch_D = merged.at("batch_D").get<std::size_t>();
  c.sigma_explore = merged.at("sigma_explore").get<double>();
  c.sigma_target = merged.at("sigma_target").get<double>();
  c.noise_clip = merged.at("noise_clip").get<double>();
  c.lambda_RL = merged.at("lambda_RL").get<double>();
  c.lambda_BC = merged.at("lambda_BC").get<double>();
  c.n_ep = merged.at("n_ep").get<int>();
  c.warmup = merged.at("warmup").get<std::size_t>();
  c.policy_delay = merged.at("policy_delay").get<int>();
  c.tau = merged.at("tau").get<double>();
  c.hidden = merged.at("hidden").get<std::vector<int>>();
  c.critics_use_demos = merged.at("critics_use_demos").get<bool>();
  c.q_abort = merged.at("q_abort").get<double>();
  c.validate();
  return c;
}

void TD3Config::validate() const {
  const auto positive = [](double x, const char* name) {
    if (!(x > 0.0)) throw Error(std::string("TD3 option '") + name + "' must be positive");
  };
  positive(gamma, "gamma");
  if (gamma > 1.0) throw Error("TD3 option 'gamma' must not exceed 1");
  positive(lr_actor, "lr_actor");
  positive(lr_critic, "lr_critic");
  positive(static_cast<double>(buffer_E), "buffer_E");
  positive(static_cast<double>(batch_E), "batch_E");
  positive(sigma_explore, "sigma_explore");
  positive(sigma_target, "sigma_target");
  positive(noise_clip, "noise_clip");
  positive(n_ep, "n_ep");
  positive(policy_delay, "policy_delay");
  positive(tau, "tau");
  if (tau > 1.0) throw Error("TD3 option 'tau' must not exceed 1");
  if (lambda_RL < 0.0 || lambda_BC < 0.0) throw Error("TD3 lambdas must be non-negative");
  if (batch_E > buffer_E) throw Error("batch_E exceeds buffer_E");
  if (hidden.empty()) throw Error("TD3 networks need at least one hidden layer");
}

Eigen::Vector2d normalize_action(const sim::Action& a) noexcept {
  return {2.0 * a.v / sim::Limits::kVMax - 1.0, a.omega / sim::Limits::kOmegaMax};
}

sim::Action denormalize_action(const Eigen::Vector2d& a) noexcept {
  const double av = std::clamp(a[0], -1.0, 1.0);
  const double aw = std::clamp(a[1], -1.0, 1.0);
  return {0.5 * (av + 1.0) * sim::Limits::kVMax, aw * sim::Limits::kOmegaMax};
}

PolicyBundle::PolicyBundle(int dim, const TD3Config& cfg, Rng& rng) : state_dim(dim) {
  using nn::Activation;
  actor = nn::Mlp::make(dim, cfg.hidden, 2, Activation::kRelu, Activation::kTanh, rng);
  critic1 = nn::Mlp::make(dim + 2, cfg.hidden, 1, Activation::kRelu, Activation::kLinear, rng);
  critic2 = nn::Mlp::make(dim + 2, cfg.hidden, 1, Activation::kRelu, Activation::kLinear, rng);
  actor_target = actor;
  critic1_target = critic1;
  critic2_target = critic2;
  actor_opt = nn::Adam(actor.parameter_count(), {cfg.lr_actor});
  critic1_opt = nn::Adam(critic1.parameter_count(), {cfg.lr_critic});
  critic2_opt = nn::Adam(critic2.parameter_count(), {cfg.lr_critic});
}

nn::Checkpoint PolicyBundle::to_checkpoint() const {
  nn::Checkpoint c;
  c.model_kind = "policy";
  c.train_steps = static_cast<std::uint64_t>(updates);
  c.config = {{"state_dim", state_dim}};
  c.put("actor", actor);
  c.put("critic1", critic1);
  c.put("critic2", critic2);
  c.put("actor_target", actor_target);
  c.put("critic1_target", critic1_target);
  c.put("critic2_target", critic2_target);
  return c;
}

PolicyBundle PolicyBundle::from_checkpoint(const nn::Checkpoint& ckpt, const TD3Config& cfg) {
  if (ckpt.model_kind != "policy") throw Error("checkpoint is a '" + ckpt.model_kind + "', expected 'policy'");
  PolicyBundle b;
  b.state_dim = ckpt.config.at("state_dim").get<int>();
  b.actor = ckpt.get_mlp("actor");
  if (b.actor.input_dim() != b.state_dim || b.actor.output_dim() != 2) throw Error("policy checkpoint: actor shape");
  const auto optional_mlp = [&](const char* name, const nn::Mlp& fallback) {
    return ckpt.has(name) ? ckpt.get_mlp(name) : fallback;
  };
  b.actor_target = optional_mlp("actor_target", b.actor);
  if (ckpt.has("critic1")) {
    b.critic1 = ckpt.get_mlp("critic1");
    b.critic2 = ckpt.get_mlp("critic2");
    b.critic1_target = optional_mlp("critic1_target", b.critic1);
    b.critic2_target = optional_mlp("critic2_target", b.critic2);
  }
  b.actor_opt = nn::Adam(b.actor.parameter_count(), {cfg.lr_actor});
  b.critic1_opt = nn::Adam(b.critic1.parameter_count(), {cfg.lr_critic});
  b.critic2_opt = nn::Adam(b.critic2.parameter_count(), {cfg.lr_critic});
  b.updates = static_cast<long>(ckpt.train_steps);
  return b;
}

sim::Action select_action(const nn::Mlp& actor, const Eigen::VectorXd& s, bool explore, Rng& rng, double sigma) {
  Eigen::Vector2d a = actor.predict(s).col(0);
  if (!a.allFinite()) throw Error("policy divergence");
  if (explore) {
    a[0] += gaussian(rng, 0.0, sigma);
    a[1] += gaussian(rng, 0.0, sigma);
  }
  return denormalize_action(a.cwiseMax(-1.0).cwiseMin(1.0));
}

namespace {

Matrix stack(const Matrix& s, const Matrix& a) {
  Matrix x(s.rows() + a.rows(), s.cols());
  x << s, a;
  return x;
}

}  // namespace

Vector bellman_targets(const PolicyBundle& b, const Batch& batch, const Matrix& noise, const TD3Config& cfg) {
  const Matrix clipped = noise.cwiseMax(-cfg.noise_clip).cwiseMin(cfg.noise_clip);
  const Matrix a_next = (b.actor_target.predict(batch.s_next) + clipped).cwiseMax(-1.0).cwiseMin(1.0);
  const Matrix x = stack(batch.s_next, a_next);
  const Vector q1 = b.critic1_target.predict(x).row(0).transpose();
  const Vector q2 = b.critic2_target.predict(x).row(0).transpose();
  return batch.r + (cfg.gamma * (1.0 - batch.done.array()) * q1.cwiseMin(q2).array()).matrix();
}

CriticStats critic_gradients(PolicyBundle& b, const Batch& batch, const Vector& targets) {
  const Matrix x = stack(batch.s, batch.a);
  const double n = static_cast<double>(batch.size());
  CriticStats st;
  st.targets = targets;
  const auto one = [&](nn::Mlp& critic, double& loss) {
    critic.zero_grad();
    const Vector q = critic.forward(x).row(0).transpose();
    const Vector diff = q - targets;
    loss = diff.squaredNorm() / n;
    critic.backward((2.0 / n) * diff.transpose());
    return q;
  };
  const Vector q1 = one(b.critic1, st.loss1);
  one(b.critic2, st.loss2);
  st.q_mean = q1.mean();
  st.q_abs_max = q1.cwiseAbs().maxCoeff();
  return st;
}

CriticStats critic_update(PolicyBundle& b, const Batch& batch, const TD3Config& cfg, Rng& rng) {
  Matrix noise(2, batch.size());
  for (Eigen::Index k = 0; k < noise.size(); ++k) noise.data()[k] = gaussian(rng, 0.0, cfg.sigma_target);
  CriticStats st = critic_gradients(b, batch, bellman_targets(b, batch, noise, cfg));
  b.critic1_opt.step(b.critic1.params(), b.critic1.grads());
  b.critic2_opt.step(b.critic2.params(), b.critic2.grads());
  ++b.updates;
  return st;
}

namespace {

/// dLoss/dOutput of -mean Q1(s, pi(s)) for actor outputs `pi_s`.
Matrix rl_output_grad(PolicyBundle& b, const Matrix& s, const Matrix& pi_s, double& loss) {
  const double n = static_cast<double>(s.cols());
  loss = -b.critic1.forward(stack(s, pi_s)).mean();
  const Matrix dx = b.critic1.backward(Matrix::Constant(1, s.cols(), -1.0 / n), false);
  return dx.bottomRows(2);
}

void check_demo(const Batch& demo, const TD3Config& cfg) {
  if (cfg.lambda_BC > 0.0 && demo.empty()) throw Error("no demonstrations loaded");
}

/// Descent gradient of lambda_RL (-J) + lambda_BC L_BC from one backward
/// pass over the concatenated batch; left in actor.grads().
void combined_gradient(PolicyBundle& b, const Batch& exp, const Batch& demo, const TD3Config& cfg, double& actor_loss,
                       double& bc_loss) {
  const bool use_bc = cfg.lambda_BC > 0.0 && !demo.empty();
  const Eigen::Index ne = exp.size();
  const Eigen::Index nd = use_bc ? demo.size() : 0;
  Matrix s(b.state_dim, ne + nd);
  s.leftCols(ne) = exp.s;
  if (use_bc) s.rightCols(nd) = demo.s;
  b.actor.zero_grad();
  const Matrix out = b.actor.forward(s);
  Matrix dout(2, ne + nd);
  dout.leftCols(ne) = cfg.lambda_RL * rl_output_grad(b, exp.s, out.leftCols(ne), actor_loss);
  bc_loss = 0.0;
  if (use_bc) {
    const Matrix diff = out.rightCols(nd) - demo.a;
    bc_loss = diff.squaredNorm();
    dout.rightCols(nd) = cfg.lambda_BC * 2.0 * diff;
  }
  b.actor.backward(dout);
}

}  // namespace

ActorStats actor_gradients(PolicyBundle& b, const Batch& exp, const Batch& demo, const TD3Config& cfg) {
  check_demo(demo, cfg);
  ActorStats st;
  b.actor.zero_grad();
  const Matrix pi_e = b.actor.forward(exp.s);
  b.actor.backward(-rl_output_grad(b, exp.s, pi_e, st.actor_loss));
  st.grad_J = b.actor.grads();

  st.grad_BC = Vector::Zero(b.actor.parameter_count());
  if (!demo.empty()) {
    b.actor.zero_grad();
    const Matrix diff = b.actor.forward(demo.s) - demo.a;
    st.bc_loss = diff.squaredNorm();
    b.actor.backward(2.0 * diff);
    st.grad_BC = b.actor.grads();
  }

  double unused_a = 0.0, unused_bc = 0.0;
  combined_gradient(b, exp, demo, cfg, unused_a, unused_bc);
  st.ascent = -b.actor.grads();
  return st;
}

void soft_update(nn::Mlp& target, const nn::Mlp& main, double tau) {
  if (target.parameter_count() != main.parameter_count()) throw Error("soft_update: shape mismatch");
  target.params() = (1.0 - tau) * target.params() + tau * main.params();
}

ActorStats actor_update(PolicyBundle& b, const Batch& exp, const Batch& demo, const TD3Config& cfg) {
  check_demo(demo, cfg);
  ActorStats st;
  combined_gradient(b, exp, demo, cfg, st.actor_loss, st.bc_loss);
  b.actor_opt.step(b.actor.params(), b.actor.grads());
  soft_update(b.actor_target, b.actor, cfg.tau);
  soft_update(b.critic1_target, b.critic1, cfg.tau);
  soft_update(b.critic2_target, b.critic2, cfg.tau);
  return st;
}

}  // namespace prefnav::learn
