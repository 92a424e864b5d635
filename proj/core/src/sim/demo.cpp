#include <prefnav/sim/demo.hpp>

#include <cmath>
#include <fstream>

namespace prefnav::sim {

using geom::distance;

namespace {

constexpr double kMaxDeviation = 0.2;
constexpr double kPathSpacing = 0.02;

std::vector<Vec2> dense_path(const std::vector<Vec2>& pts) {
  const double len = geom::polyline_length(pts);
  if (!(len > 0.0)) throw Error("zero-length trajectory");
  const auto n = static_cast<std::size_t>(std::ceil(len / kPathSpacing)) + 1;
  return geom::resample_points(pts, std::max<std::size_t>(n, 2));
}

}  // namespace

std::vector<Vec2> Demonstration::robot_points() const {
  std::vector<Vec2> pts;
  pts.reserve(robot.size());
  for (const auto& r : robot) pts.push_back({r[1], r[2]});
  return pts;
}

Vec2 Demonstration::goal() const {
  if (robot.empty()) throw Error("demonstration has no robot track");
  return {robot.back()[1], robot.back()[2]};
}

nlohmann::json Demonstration::to_json() const {
  nlohmann::json j;
  j["scene_id"] = scene_id;
  j["robot"] = robot;
  j["human"] = human ? nlohmann::json(*human) : nlohmann::json(nullptr);
  j["meta"] = {{"author", author}, {"note", note}};
  return j;
}

Demonstration Demonstration::from_json(const nlohmann::json& j) {
  Demonstration d;
  try {
    d.scene_id = j.at("scene_id").get<std::string>();
    d.robot = j.at("robot").get<std::vector<std::array<double, 3>>>();
    if (j.contains("human") && !j.at("human").is_null())
      d.human = j.at("human").get<std::vector<std::array<double, 4>>>();
    if (j.contains("meta")) {
      const auto& m = j.at("meta");
      d.author = m.value("author", "");
      d.note = m.value("note", "");
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("demonstration: malformed JSON: ") + e.what());
  }
  if (d.robot.size() < 2) throw Error("demonstration: robot track needs at least 2 points");
  for (std::size_t i = 1; i < d.robot.size(); ++i)
    if (!(d.robot[i][0] > d.robot[i - 1][0])) throw Error("demonstration: robot timestamps must increase");
  if (d.human) {
    if (d.human->size() < 2) throw Error("demonstration: human track needs at least 2 points");
    for (std::size_t i = 1; i < d.human->size(); ++i)
      if (!((*d.human)[i][0] > (*d.human)[i - 1][0])) throw Error("demonstration: human timestamps must increase");
  }
  return d;
}

Demonstration Demonstration::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open demonstration " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error("demonstration " + path.string() + ": " + e.what());
  }
  return from_json(j);
}

void Demonstration::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw Error("cannot write demonstration " + path.string());
  out << to_json().dump(2) << '\n';
}

DemoRejected::DemoRejected(Kind kind, Vec2 location, const std::string& detail)
    : Error(std::string(kind == Kind::kInvalid ? "invalid demonstration" : "untrackable demonstration") + ": " +
            detail),
      kind_(kind),
      location_(location),
      detail_(detail) {}

PurePursuit::PurePursuit(std::vector<Vec2> path, double lookahead)
    : path_(std::move(path)), cum_(geom::cumulative_length(path_)), lookahead_(lookahead) {
  if (path_.size() < 2) throw Error("pure pursuit needs a path");
}

Action PurePursuit::command(const Pose2& pose) {
  const Vec2 p = pose.position();
  // Monotone projection: only look a short distance ahead of the last match.
  std::size_t best = progress_;
  double best_d = distance(p, path_[progress_]);
  for (std::size_t i = progress_; i < path_.size() && cum_[i] <= cum_[progress_] + 1.0; ++i) {
    const double d = distance(p, path_[i]);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  progress_ = best;

  std::size_t target = progress_;
  while (target + 1 < path_.size() && cum_[target] - cum_[progress_] < lookahead_) ++target;
  const auto ref = geom::to_polar(path_[target], pose);
  if (ref.distance < 1e-9) return {0.0, 0.0};
  if (std::abs(ref.bearing) > geom::kPi / 2) return {0.0, std::copysign(Limits::kOmegaMax, ref.bearing)};

  const double curvature = 2.0 * std::sin(ref.bearing) / ref.distance;
  double v = Limits::kVMax;
  double omega = v * curvature;
  if (std::abs(omega) > Limits::kOmegaMax) {
    v = Limits::kOmegaMax / std::abs(curvature);
    omega = std::copysign(Limits::kOmegaMax, curvature);
  }
  return {v, omega};
}

EpisodeInit demo_episode_init(const Demonstration& demo, std::uint64_t seed) {
  const auto pts = demo.robot_points();
  double heading = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    const Vec2 d = pts[i] - pts[0];
    if (d.norm() > 0.05 || i + 1 == pts.size()) {
      heading = std::atan2(d.y, d.x);
      break;
    }
  }
  EpisodeInit init;
  init.scene_id = demo.scene_id;
  init.robot_start = Pose2(pts.front(), heading);
  init.goal = demo.goal();
  init.seed = seed;
  if (demo.human) {
    const double t0 = demo.robot.front()[0];
    std::vector<geom::TimedPose> track;
    for (const auto& h : *demo.human) track.push_back({h[0] - t0, Pose2(h[1], h[2], h[3])});
    init.human.mode = HumanMode::kDemoReplay;
    init.human.path = Trajectory(std::move(track));
  }
  return init;
}

EpisodeInit demo_scenario_init(const Demonstration& demo, const geom::Scene& scene, Rng& rng, double position_sd,
                               double heading_sd) {
  EpisodeInit init = demo_episode_init(demo, rng());
  const Pose2 exact = init.robot_start;
  for (int attempt = 0; attempt < 20; ++attempt) {
    const Pose2 p(exact.x + gaussian(rng, 0.0, position_sd), exact.y + gaussian(rng, 0.0, position_sd),
                  exact.theta + gaussian(rng, 0.0, heading_sd));
    EpisodeInit candidate = init;
    candidate.robot_start = p;
    if (!World(scene, candidate).robot_collides()) return candidate;
  }
  return init;
}

void check_drawn_path(const Demonstration& demo, const geom::Scene& scene) {
  const auto path = dense_path(demo.robot_points());
  for (const auto& p : path)
    if (!scene.disc_free(p, Limits::kRobotRadius))
      throw DemoRejected(DemoRejected::Kind::kInvalid, p, "drawn path collides with the scene");
}

DemoReplay demo_to_transitions(const Demonstration& demo, const geom::Scene& scene, StateObserver& observer) {
  check_drawn_path(demo, scene);
  const auto drawn = demo.robot_points();
  PurePursuit tracker(dense_path(drawn));

  World world(scene, demo_episode_init(demo));
  if (world.robot_collides())
    throw DemoRejected(DemoRejected::Kind::kInvalid, world.robot().position(), "start pose in collision");
  observer.reset(0);
  const auto view = [&world]() {
    return WorldView{world.scene(), world.robot(), world.human(), world.goal(), world.last_action()};
  };

  DemoReplay out{{}, Trajectory({{0.0, world.robot()}, {1.0, world.robot()}}), std::nullopt, 0.0};
  std::vector<geom::TimedPose> robot_samples{{0.0, world.robot()}};
  std::vector<geom::TimedPose> human_samples;
  if (const auto h = world.human()) human_samples.push_back({0.0, *h});

  Observation obs = observer.observe(view());
  for (;;) {
    const Action a = tracker.command(world.robot());
    RewardEvent event = world.step(a);
    const Vec2 p = world.robot().position();
    out.max_deviation = std::max(out.max_deviation, geom::distance_to_polyline(p, drawn));
    if (event == RewardEvent::kCollision)
      throw DemoRejected(DemoRejected::Kind::kInvalid, p, "collision during replay");
    if (out.max_deviation > kMaxDeviation)
      throw DemoRejected(DemoRejected::Kind::kUntrackable, p, "replay leaves the drawn path by more than 0.2 m");
    if (event == RewardEvent::kTimeout)
      throw DemoRejected(DemoRejected::Kind::kUntrackable, p, "goal not reached within the episode limit");
    if (event == RewardEvent::kGoalTraining) event = RewardEvent::kGoalDemo;

    Observation next = observer.observe(view());
    const bool done = event != RewardEvent::kNone;
    out.transitions.push_back({obs.state, a, compute_reward(event, Source::kDemo), next.state, done, Source::kDemo});
    robot_samples.push_back({world.time(), world.robot()});
    if (const auto h = world.human()) human_samples.push_back({world.time(), *h});
    obs = std::move(next);
    if (done) break;
  }
  out.robot_traj = Trajectory(std::move(robot_samples));
  if (human_samples.size() >= 2) out.human_traj = Trajectory(std::move(human_samples));
  return out;
}

}  // namespace prefnav::sim
