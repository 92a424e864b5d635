#pragma once
/**
 * @file  world.hpp
 * @brief Differential-drive episode engine.
 */

#include <prefnav/geom/scene.hpp>
#include <prefnav/rng.hpp>
#include <prefnav/sim/types.hpp>

#include <array>
#include <functional>
#include <span>

namespace prefnav::sim {

/// Exact unicycle integration over `dt`; straight motion when |omega| < 1e-9.
[[nodiscard]] Pose2 step_kinematics(const Pose2& pose, const Action& a, double dt);

/// Sparse reward table with c_rew = 10; demo-sourced transitions earn an
/// extra c_rew / 100.
[[nodiscard]] double compute_reward(RewardEvent event, Source source) noexcept;

/// Discounted return sum_i gamma^i r_i, evaluated backwards (Horner).
[[nodiscard]] double discounted_return(std::span<const double> rewards, double gamma = Limits::kGamma) noexcept;

/// Mutable simulation state of one episode. Single-threaded by contract.
class World {
 public:
  World(const geom::Scene& scene, EpisodeInit init);

  [[nodiscard]] const geom::Scene& scene() const noexcept { return *scene_; }
  [[nodiscard]] const EpisodeInit& init() const noexcept { return init_; }
  [[nodiscard]] const Pose2& robot() const noexcept { return robot_; }
  [[nodiscard]] std::optional<Pose2> human() const { return init_.human.pose_at(time_); }
  [[nodiscard]] const Vec2& goal() const noexcept { return init_.goal; }
  [[nodiscard]] double time() const noexcept { return time_; }
  [[nodiscard]] int steps() const noexcept { return steps_; }
  [[nodiscard]] const Action& last_action() const noexcept { return last_action_; }

  /// Robot disc touches an obstacle, a wall or the human disc.
  [[nodiscard]] bool robot_collides() const;
  [[nodiscard]] bool goal_reached() const noexcept;

  /// Advances one control period. Returns kCollision, kGoalTraining,
  /// kTimeout or kNone, checked in that priority order.
  RewardEvent step(const Action& a);

 private:
  const geom::Scene* scene_;
  EpisodeInit init_;
  Pose2 robot_;
  double time_ = 0.0;
  int steps_ = 0;
  Action last_action_;
};

/// Snapshot handed to a state observer.
struct WorldView {
  const geom::Scene& scene;
  Pose2 robot;
  std::optional<Pose2> human;
  Vec2 goal;
  Action last_action;
};

struct Observation {
  Eigen::VectorXd state;
  bool human_in_fov = false;
};

/// Turns world snapshots into policy states (implemented by the perception pipeline).
class StateObserver {
 public:
  virtual ~StateObserver() = default;
  /// Starts a new episode; `seed` drives any stochastic perception step.
  virtual void reset(std::uint64_t seed) = 0;
  virtual Observation observe(const WorldView& view) = 0;
  [[nodiscard]] virtual std::size_t state_dim() const = 0;
};

using Policy = std::function<Action(const Eigen::VectorXd&)>;

/// Relative weights of human modes 1-4 used when sampling episodes.
struct ModeWeights {
  std::array<double, 4> w{1.0, 1.0, 1.0, 1.0};
};

/// Truncated Normal(0.5, 0.3) human walking speed on [0.1, 1.5] m/s.
[[nodiscard]] double sample_human_speed(Rng& rng);

/// Rejection-samples a collision-free start/goal pair with 1.5 < d_G < 6 and
/// a scripted human. Throws Error("scene too constrained") after 1000 rejections.
[[nodiscard]] EpisodeInit sample_episode(const geom::Scene& scene, Rng& rng, const ModeWeights& weights = {});

/// Builds the human track of a given mode for fixed robot start and goal.
/// Returns nullopt when the mode cannot be realised in this draw.
[[nodiscard]] std::optional<HumanTrack> sample_human(const geom::Scene& scene, const Pose2& start, const Vec2& goal,
                                                     HumanMode mode, Rng& rng);

struct EpisodeRun {
  EpisodeResult result;
  std::vector<Transition> transitions;
};

using TransitionHook = std::function<void(const Transition&)>;

/// Rolls `policy` out from `init` until goal, collision or N_ep steps.
/// `on_step` sees every transition as soon as it exists.
/// Throws Error("policy divergence") on a non-finite action.
[[nodiscard]] EpisodeRun run_episode(const Policy& policy, const EpisodeInit& init, const geom::Scene& scene,
                                     StateObserver& observer, const TransitionHook& on_step = {});

}  // namespace prefnav::sim
