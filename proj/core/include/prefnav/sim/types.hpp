#pragma once

#include <prefnav/geom/pose.hpp>
#include <prefnav/geom/trajectory.hpp>

#include <Eigen/Core>

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace prefnav::sim {

using geom::Pose2;
using geom::Trajectory;
using geom::Vec2;

/// Fixed constants of the episode engine.
struct Limits {
  static constexpr double kDt = 0.2;            // s
  static constexpr int kMaxSteps = 150;         // N_ep
  static constexpr double kVMax = 0.5;          // m/s, no reverse
  static constexpr double kOmegaMax = geom::kPi;  // rad/s
  static constexpr double kGoalRadius = 0.3;    // m
  static constexpr double kRobotRadius = 0.18;  // m
  static constexpr double kHumanRadius = 0.3;   // m
  static constexpr double kGamma = 0.99;
  static constexpr double kSensorRange = 6.0;   // m
  static constexpr double kMinGoalDistance = 1.5;
  static constexpr double kMaxGoalDistance = 6.0;
};

/// Velocity command, clamped into the control limits on construction.
struct Action {
  double v = 0.0;
  double omega = 0.0;

  Action() = default;
  Action(double v_, double omega_)
      : v(std::clamp(v_, 0.0, Limits::kVMax)), omega(std::clamp(omega_, -Limits::kOmegaMax, Limits::kOmegaMax)) {}

  friend bool operator==(const Action&, const Action&) = default;
};

enum class HumanMode { kOppositeAStar = 1, kRandomAStar = 2, kStatic = 3, kAbsent = 4, kDemoReplay = 5 };

[[nodiscard]] std::string to_string(HumanMode m);
[[nodiscard]] HumanMode human_mode_from_string(const std::string& s);

/// Scripted human behaviour for one episode.
struct HumanTrack {
  HumanMode mode = HumanMode::kAbsent;
  std::optional<Trajectory> path;   // A* modes: spatial path; demo replay: timed track
  double speed = 0.0;               // m/s along `path` for the A* modes
  std::optional<Pose2> static_pose;  // mode kStatic

  [[nodiscard]] bool present() const noexcept { return mode != HumanMode::kAbsent; }
  /// Human pose at simulation time t; nullopt when absent.
  [[nodiscard]] std::optional<Pose2> pose_at(double t) const;
  /// Throws Error if the mode/path/speed combination is inconsistent.
  void validate() const;
};

struct EpisodeInit {
  std::string scene_id;
  Pose2 robot_start;
  Vec2 goal;
  HumanTrack human;
  std::uint64_t seed = 0;
};

enum class Source { kExperience, kDemo };
enum class RewardEvent { kNone, kCollision, kGoalTraining, kGoalDemo, kTimeout };
enum class Outcome { kSuccess, kCollision, kTimeout };

[[nodiscard]] std::string to_string(Source s);
[[nodiscard]] std::string to_string(RewardEvent e);
[[nodiscard]] std::string to_string(Outcome o);
[[nodiscard]] Outcome outcome_from_string(const std::string& s);

struct Transition {
  Eigen::VectorXd s;
  Action a;
  double r = 0.0;
  Eigen::VectorXd s_next;
  bool done = false;
  Source source = Source::kExperience;
};

struct EpisodeResult {
  Outcome outcome = Outcome::kTimeout;
  Trajectory robot_traj{{{0.0, {}}, {1.0, {}}}};
  std::optional<Trajectory> human_traj;
  double return_ = 0.0;
  int steps = 0;
  std::vector<bool> human_in_fov_mask;
  std::vector<double> rewards;
};

}  // namespace prefnav::sim
