#pragma once
/**
 * @file  trainer.hpp
 * @brief Episodic TD3+BC training loop.
 *
 * The experience buffer is first filled with `warmup` random-action
 * transitions; afterwards every environment step performs one critic
 * update and every policy_delay-th step one actor update. Scenes rotate
 * every `scene_rotation` episodes. With demonstrations loaded, a fraction
 * of episodes replays a demonstration scenario (human track included).
 */

#include <prefnav/learn/td3.hpp>
#include <prefnav/sim/demo.hpp>

#include <functional>
#include <memory>
#include <ostream>

namespace prefnav::learn {

struct TrainConfig {
  TD3Config td3;
  /// Hard cap on environment steps, warmup included. An episode starts only
  /// while a full-length episode still fits.
  std::size_t total_steps = 200000;
  int scene_rotation = 50;
  double demo_scenario_prob = 0.2;
  sim::ModeWeights weights;
  /// Evaluation hook period in environment steps (0 disables it).
  std::size_t eval_every = 10000;
  /// Stop once an evaluation score reaches this value (disabled when > 1).
  double stop_score = 2.0;
  std::uint64_t seed = 1;

  [[nodiscard]] nlohmann::json to_json() const;
  static TrainConfig from_json(const nlohmann::json& j);
};

struct TrainLogRow {
  std::size_t step = 0;
  int episode = 0;
  double return_ = 0.0;
  sim::Outcome outcome = sim::Outcome::kTimeout;
  double critic_loss = 0.0;
  double actor_loss = 0.0;
  double bc_loss = 0.0;
  double q_mean = 0.0;
  std::string scene_id;
};

inline constexpr const char* kTrainLogHeader = "step,episode,return,outcome,critic_loss,actor_loss,bc_loss,q_mean";
void write_csv_row(std::ostream& os, const TrainLogRow& row);

struct EvalPoint {
  std::size_t step = 0;
  double score = 0.0;
};

struct TrainResult {
  PolicyBundle final;
  PolicyBundle best;  // highest evaluation score; equals `final` without evaluations
  double best_score = -1.0;
  std::size_t best_step = 0;
  std::size_t steps = 0;
  int episodes = 0;
  std::vector<TrainLogRow> log;
  std::vector<EvalPoint> evaluations;
  std::vector<std::string> scene_schedule;  // scene id of every episode
};

using ObserverFactory = std::function<std::unique_ptr<sim::StateObserver>()>;

struct TrainHooks {
  /// Scores a snapshot (higher is better), e.g. a success rate.
  std::function<double(const PolicyBundle&, std::size_t step)> evaluate;
  /// Receives each finished episode's log row.
  std::function<void(const TrainLogRow&)> on_episode;
};

struct DemoSet {
  std::vector<sim::Demonstration> demos;  // used for demo-scenario episodes
  std::vector<sim::Transition> transitions;
};

/// Scene to use for episode `episode` under the rotation schedule.
[[nodiscard]] std::size_t scene_index(int episode, int rotation, std::size_t n_scenes) noexcept;

/// Runs the full training loop. `demos` may be empty only when lambda_BC = 0.
/// Throws Error on divergence (|Q| above q_abort).
[[nodiscard]] TrainResult train(const TrainConfig& cfg, std::span<const geom::Scene> scenes, const DemoSet& demos,
                                const ObserverFactory& make_observer, const TrainHooks& hooks = {});

}  // namespace prefnav::learn
