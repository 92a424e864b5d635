#include <prefnav/learn/trainer.hpp>

#include <prefnav/error.hpp>

#include <cmath>
#include <sstream>

namespace prefnav::learn {

using nlohmann::json;

json TrainConfig::to_json() const {
  return {{"td3", td3.to_json()},
          {"total_steps", total_steps},
          {"scene_rotation", scene_rotation},
          {"demo_scenario_prob", demo_scenario_prob},
          {"mode_weights", weights.w},
          {"eval_every", eval_every},
          {"stop_score", stop_score},
          {"seed", seed}};
}

TrainConfig TrainConfig::from_json(const json& j) {
  TrainConfig c;
  const json defaults = c.to_json();
  for (const auto& [key, _] : j.items())
    if (!defaults.contains(key)) throw Error("unknown training option '" + key + "'");
  if (j.contains("td3")) c.td3 = TD3Config::from_json(j.at("td3"));
  c.total_steps = j.value("total_steps", c.total_steps);
  c.scene_rotation = j.value("scene_rotation", c.scene_rotation);
  c.demo_scenario_prob = j.value("demo_scenario_prob", c.demo_scenario_prob);
  if (j.contains("mode_weights")) c.weights.w = j.at("mode_weights").get<std::array<double, 4>>();
  c.eval_every = j.value("eval_every", c.eval_every);
  c.stop_score = j.value("stop_score", c.stop_score);
  c.seed = j.value("seed", c.seed);
  if (c.scene_rotation <= 0) throw Error("scene_rotation must be positive");
  if (c.demo_scenario_prob < 0.0 || c.demo_scenario_prob > 1.0) throw Error("demo_scenario_prob must lie in [0, 1]");
  return c;
}

void write_csv_row(std::ostream& os, const TrainLogRow& r) {
  os << r.step << ',' << r.episode << ',' << r.return_ << ',' << sim::to_string(r.outcome) << ',' << r.critic_loss
     << ',' << r.actor_loss << ',' << r.bc_loss << ',' << r.q_mean << '\n';
}

std::size_t scene_index(int episode, int rotation, std::size_t n_scenes) noexcept {
  return static_cast<std::size_t>(episode / rotation) % n_scenes;
}

TrainResult train(const TrainConfig& cfg, std::span<const geom::Scene> scenes, const DemoSet& demos,
                  const ObserverFactory& make_observer, const TrainHooks& hooks) {
  const TD3Config& td3 = cfg.td3;
  td3.validate();
  if (scenes.empty()) throw Error("train: no scenes");
  if (td3.lambda_BC > 0.0 && demos.transitions.empty()) throw Error("no demonstrations loaded");

  Rng rng(cfg.seed);
  const std::unique_ptr<sim::StateObserver> observer = make_observer();
  const int dim = static_cast<int>(observer->state_dim());

  TrainResult res;
  PolicyBundle& bundle = res.final;
  bundle = PolicyBundle(dim, td3, rng);

  ReplayBuffer exp(td3.buffer_E, sim::Source::kExperience);
  ReplayBuffer demo(std::max<std::size_t>(1, demos.transitions.size()), sim::Source::kDemo);
  for (const auto& t : demos.transitions) {
    if (t.s.size() != dim) throw Error("demonstration states do not match the perception configuration");
    demo.push(t);
  }
  demo.freeze();

  std::size_t& steps = res.steps;
  bool stop = false;
  struct Accum {
    double critic = 0.0, actor = 0.0, bc = 0.0, q = 0.0;
    int n_critic = 0, n_actor = 0;
  } acc;

  const sim::Policy policy = [&](const Eigen::VectorXd& s) {
    if (steps < td3.warmup) {
      return denormalize_action({uniform(rng, -1.0, 1.0), uniform(rng, -1.0, 1.0)});
    }
    return select_action(bundle.actor, s, true, rng, td3.sigma_explore);
  };

  const sim::TransitionHook on_step = [&](const sim::Transition& t) {
    exp.push(t);
    ++steps;
    if (stop || steps <= td3.warmup || steps > cfg.total_steps) return;

    const Batch be = exp.sample(td3.batch_E, rng);
    const Batch critic_batch =
        td3.critics_use_demos && !demos.transitions.empty() ? concat(be, demo.sample(td3.batch_D, rng)) : be;
    const CriticStats cs = critic_update(bundle, critic_batch, td3, rng);
    if (!(cs.q_abs_max <= td3.q_abort)) {
      std::ostringstream msg;
      msg << "training diverged: |Q| = " << cs.q_abs_max << " exceeds " << td3.q_abort << " at step " << steps;
      throw Error(msg.str());
    }
    acc.critic += 0.5 * (cs.loss1 + cs.loss2);
    acc.q += cs.q_mean;
    ++acc.n_critic;
    if (bundle.updates % td3.policy_delay == 0) {
      const Batch bd = td3.lambda_BC > 0.0 ? demo.sample(td3.batch_D, rng) : Batch{};
      const ActorStats as = actor_update(bundle, be, bd, td3);
      acc.actor += as.actor_loss;
      acc.bc += as.bc_loss;
      ++acc.n_actor;
    }

    if (hooks.evaluate && cfg.eval_every > 0 && steps % cfg.eval_every == 0) {
      const double score = hooks.evaluate(bundle, steps);
      res.evaluations.push_back({steps, score});
      if (score > res.best_score) {
        res.best_score = score;
        res.best_step = steps;
        res.best = bundle;
      }
      if (score >= cfg.stop_score) stop = true;
    }
  };

  int& episode = res.episodes;
  while (!stop && steps + static_cast<std::size_t>(sim::Limits::kMaxSteps) <= cfg.total_steps) {
    const geom::Scene& scene = scenes[scene_index(episode, cfg.scene_rotation, scenes.size())];
    sim::EpisodeInit init;
    bool demo_episode = false;
    if (!demos.demos.empty() && uniform(rng, 0.0, 1.0) < cfg.demo_scenario_prob) {
      std::vector<const sim::Demonstration*> here;
      for (const auto& d : demos.demos)
        if (d.scene_id == scene.id()) here.push_back(&d);
      if (!here.empty()) {
        std::uniform_int_distribution<std::size_t> pick(0, here.size() - 1);
        init = sim::demo_scenario_init(*here[pick(rng)], scene, rng);
        demo_episode = true;
      }
    }
    if (!demo_episode) init = sim::sample_episode(scene, rng, cfg.weights);
    init.seed = rng();

    acc = {};
    const sim::EpisodeRun run = sim::run_episode(policy, init, scene, *observer, on_step);
    TrainLogRow row;
    row.step = steps;
    row.episode = episode;
    row.return_ = run.result.return_;
    row.outcome = run.result.outcome;
    row.scene_id = scene.id();
    if (acc.n_critic > 0) {
      row.critic_loss = acc.critic / acc.n_critic;
      row.q_mean = acc.q / acc.n_critic;
    }
    if (acc.n_actor > 0) {
      row.actor_loss = acc.actor / acc.n_actor;
      row.bc_loss = acc.bc / acc.n_actor;
    }
    res.log.push_back(row);
    res.scene_schedule.push_back(scene.id());
    if (hooks.on_episode) hooks.on_episode(row);
    ++episode;
  }
  if (res.evaluations.empty()) {
    res.best = res.final;
    res.best_step = steps;
  }
  return res;
}

}  // namespace prefnav::learn
