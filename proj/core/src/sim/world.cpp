#include <prefnav/sim/world.hpp>

#include <prefnav/error.hpp>

#include <cmath>

namespace prefnav::sim {

using geom::distance;

Pose2 step_kinematics(const Pose2& pose, const Action& a, double dt) {
  const double th = pose.theta;
  if (std::abs(a.omega) < 1e-9) return {pose.x + a.v * dt * std::cos(th), pose.y + a.v * dt * std::sin(th), th};
  const double r = a.v / a.omega;
  const double th1 = th + a.omega * dt;
  return {pose.x + r * (std::sin(th1) - std::sin(th)), pose.y - r * (std::cos(th1) - std::cos(th)), th1};
}

double compute_reward(RewardEvent event, Source source) noexcept {
  constexpr double c_rew = 10.0;
  double r = 0.0;
  switch (event) {
    case RewardEvent::kCollision: r = -0.5 * c_rew; break;
    case RewardEvent::kGoalTraining: r = 0.5 * c_rew; break;
    case RewardEvent::kGoalDemo: r = c_rew; break;
    case RewardEvent::kTimeout: r = -0.25 * c_rew; break;
    case RewardEvent::kNone: break;
  }
  if (source == Source::kDemo) r += c_rew / 100.0;
  return r;
}

double discounted_return(std::span<const double> rewards, double gamma) noexcept {
  double g = 0.0;
  for (auto it = rewards.rbegin(); it != rewards.rend(); ++it) g = *it + gamma * g;
  return g;
}

World::World(const geom::Scene& scene, EpisodeInit init)
    : scene_(&scene), init_(std::move(init)), robot_(init_.robot_start) {
  init_.human.validate();
}

bool World::robot_collides() const {
  const Vec2 p = robot_.position();
  if (!scene_->disc_free(p, Limits::kRobotRadius)) return true;
  if (const auto h = human()) return distance(p, h->position()) <= Limits::kRobotRadius + Limits::kHumanRadius;
  return false;
}

bool World::goal_reached() const noexcept { return distance(robot_.position(), init_.goal) < Limits::kGoalRadius; }

RewardEvent World::step(const Action& a) {
  robot_ = step_kinematics(robot_, a, Limits::kDt);
  last_action_ = a;
  time_ += Limits::kDt;
  ++steps_;
  if (robot_collides()) return RewardEvent::kCollision;
  if (goal_reached()) return RewardEvent::kGoalTraining;
  if (steps_ >= Limits::kMaxSteps) return RewardEvent::kTimeout;
  return RewardEvent::kNone;
}

double sample_human_speed(Rng& rng) {
  for (;;) {
    const double s = gaussian(rng, 0.5, 0.3);
    if (s >= 0.1 && s <= 1.5) return s;
  }
}

namespace {

constexpr double kSpawnMargin = 0.05;
constexpr double kHumanKeepout = 1.0;  // human spawn/rest points keep this far from robot start and goal

std::optional<Vec2> sample_free_point(const geom::Scene& scene, Rng& rng, double radius, int tries = 200) {
  const auto& b = scene.bounds();
  for (int i = 0; i < tries; ++i) {
    const Vec2 p{uniform(rng, b.xmin, b.xmax), uniform(rng, b.ymin, b.ymax)};
    if (scene.in_spawn_region(p) && scene.clearance(p) > radius + kSpawnMargin) return p;
  }
  return std::nullopt;
}

std::optional<Trajectory> walk(const geom::Scene& scene, const Vec2& from, const Vec2& to, double speed) {
  try {
    const auto path = geom::astar_path(scene, from, to, 0.1, Limits::kHumanRadius);
    if (geom::polyline_length(path) < 1e-6) return std::nullopt;
    return Trajectory::from_points(path, speed);
  } catch (const Error&) {
    return std::nullopt;
  }
}

}  // namespace

std::optional<HumanTrack> sample_human(const geom::Scene& scene, const Pose2& start, const Vec2& goal,
                                       HumanMode mode, Rng& rng) {
  HumanTrack h;
  h.mode = mode;
  const Vec2 s = start.position();
  switch (mode) {
    case HumanMode::kAbsent: return h;
    case HumanMode::kStatic: {
      const auto p = sample_free_point(scene, rng, Limits::kHumanRadius);
      if (!p || distance(*p, s) < kHumanKeepout || distance(*p, goal) < kHumanKeepout) return std::nullopt;
      h.static_pose = Pose2(*p, uniform(rng, -geom::kPi, geom::kPi));
      return h;
    }
    case HumanMode::kOppositeAStar: {
      if (scene.clearance(goal) <= Limits::kHumanRadius || scene.clearance(s) <= Limits::kHumanRadius)
        return std::nullopt;
      h.speed = sample_human_speed(rng);
      h.path = walk(scene, goal, s, h.speed);
      if (!h.path) return std::nullopt;
      return h;
    }
    case HumanMode::kRandomAStar: {
      const auto a = sample_free_point(scene, rng, Limits::kHumanRadius);
      const auto b = sample_free_point(scene, rng, Limits::kHumanRadius);
      if (!a || !b || distance(*a, s) < kHumanKeepout || distance(*b, goal) < kHumanKeepout ||
          distance(*b, s) < kHumanKeepout || distance(*a, *b) < 1.0)
        return std::nullopt;
      h.speed = sample_human_speed(rng);
      h.path = walk(scene, *a, *b, h.speed);
      if (!h.path) return std::nullopt;
      return h;
    }
    case HumanMode::kDemoReplay: throw Error("demo replay humans come from a demonstration, not from sampling");
  }
  return std::nullopt;
}

EpisodeInit sample_episode(const geom::Scene& scene, Rng& rng, const ModeWeights& weights) {
  double total = 0.0;
  for (double w : weights.w) {
    if (w < 0.0) throw Error("mode weights must be non-negative");
    total += w;
  }
  if (!(total > 0.0)) throw Error("mode weights sum to zero");

  for (int attempt = 0; attempt < 1000; ++attempt) {
    const auto s = sample_free_point(scene, rng, Limits::kRobotRadius, 1);
    const auto g = sample_free_point(scene, rng, Limits::kRobotRadius, 1);
    if (!s || !g) continue;
    const double d = distance(*s, *g);
    if (!(d > Limits::kMinGoalDistance && d < Limits::kMaxGoalDistance)) continue;

    const int mode = std::discrete_distribution<int>(weights.w.begin(), weights.w.end())(rng);

    EpisodeInit init;
    init.scene_id = scene.id();
    init.robot_start = Pose2(*s, uniform(rng, -geom::kPi, geom::kPi));
    init.goal = *g;
    auto human = sample_human(scene, init.robot_start, init.goal, static_cast<HumanMode>(mode + 1), rng);
    if (!human) continue;
    init.human = std::move(*human);
    init.seed = rng();
    return init;
  }
  throw Error("scene too constrained");
}

EpisodeRun run_episode(const Policy& policy, const EpisodeInit& init, const geom::Scene& scene,
                       StateObserver& observer, const TransitionHook& on_step) {
  World world(scene, init);
  if (world.robot_collides()) throw Error("episode start is in collision");
  observer.reset(init.seed);

  const auto view = [&world]() {
    return WorldView{world.scene(), world.robot(), world.human(), world.goal(), world.last_action()};
  };

  EpisodeRun run;
  std::vector<geom::TimedPose> robot_samples{{0.0, world.robot()}};
  std::vector<geom::TimedPose> human_samples;
  if (const auto h = world.human()) human_samples.push_back({0.0, *h});

  Observation obs = observer.observe(view());
  RewardEvent event = RewardEvent::kNone;
  while (event == RewardEvent::kNone) {
    const Action raw = policy(obs.state);
    if (!std::isfinite(raw.v) || !std::isfinite(raw.omega)) throw Error("policy divergence");
    const Action a(raw.v, raw.omega);
    run.result.human_in_fov_mask.push_back(obs.human_in_fov);

    event = world.step(a);
    const double r = compute_reward(event, Source::kExperience);
    Observation next = observer.observe(view());
    run.transitions.push_back({obs.state, a, r, next.state, event != RewardEvent::kNone, Source::kExperience});
    if (on_step) on_step(run.transitions.back());
    run.result.rewards.push_back(r);
    robot_samples.push_back({world.time(), world.robot()});
    if (const auto h = world.human()) human_samples.push_back({world.time(), *h});
    obs = std::move(next);
  }

  auto& res = run.result;
  res.outcome = event == RewardEvent::kCollision      ? Outcome::kCollision
                : event == RewardEvent::kGoalTraining ? Outcome::kSuccess
                                                      : Outcome::kTimeout;
  res.steps = world.steps();
  res.return_ = discounted_return(res.rewards);
  res.robot_traj = Trajectory(std::move(robot_samples));
  if (human_samples.size() >= 2) res.human_traj = Trajectory(std::move(human_samples));
  return run;
}

}  // namespace prefnav::sim
