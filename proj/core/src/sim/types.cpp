#include <prefnav/sim/types.hpp>

#include <prefnav/error.hpp>

namespace prefnav::sim {

std::string to_string(HumanMode m) {
  switch (m) {
    case HumanMode::kOppositeAStar: return "opposite_astar";
    case HumanMode::kRandomAStar: return "random_astar";
    case HumanMode::kStatic: return "static";
    case HumanMode::kAbsent: return "absent";
    case HumanMode::kDemoReplay: return "demo_replay";
  }
  return "absent";
}

HumanMode human_mode_from_string(const std::string& s) {
  if (s == "opposite_astar" || s == "1") return HumanMode::kOppositeAStar;
  if (s == "random_astar" || s == "2") return HumanMode::kRandomAStar;
  if (s == "static" || s == "3") return HumanMode::kStatic;
  if (s == "absent" || s == "4") return HumanMode::kAbsent;
  if (s == "demo_replay" || s == "5") return HumanMode::kDemoReplay;
  throw Error("unknown human mode '" + s + "'");
}

std::string to_string(Source s) { return s == Source::kDemo ? "DEMO" : "EXPERIENCE"; }

std::string to_string(RewardEvent e) {
  switch (e) {
    case RewardEvent::kNone: return "NONE";
    case RewardEvent::kCollision: return "COLLISION";
    case RewardEvent::kGoalTraining: return "GOAL_TRAINING";
    case RewardEvent::kGoalDemo: return "GOAL_DEMO";
    case RewardEvent::kTimeout: return "TIMEOUT";
  }
  return "NONE";
}

std::string to_string(Outcome o) {
  switch (o) {
    case Outcome::kSuccess: return "SUCCESS";
    case Outcome::kCollision: return "COLLISION";
    case Outcome::kTimeout: return "TIMEOUT";
  }
  return "TIMEOUT";
}

Outcome outcome_from_string(const std::string& s) {
  if (s == "SUCCESS") return Outcome::kSuccess;
  if (s == "COLLISION") return Outcome::kCollision;
  if (s == "TIMEOUT") return Outcome::kTimeout;
  throw Error("unknown outcome '" + s + "'");
}

std::optional<Pose2> HumanTrack::pose_at(double t) const {
  switch (mode) {
    case HumanMode::kAbsent: return std::nullopt;
    case HumanMode::kStatic: return static_pose;
    default: return path ? std::optional<Pose2>(path->at_time(t)) : std::nullopt;
  }
}

void HumanTrack::validate() const {
  const bool needs_path =
      mode == HumanMode::kOppositeAStar || mode == HumanMode::kRandomAStar || mode == HumanMode::kDemoReplay;
  if (needs_path != path.has_value()) throw Error("human track: path must be present iff the mode walks a path");
  if (needs_path && mode != HumanMode::kDemoReplay && !(speed > 0.0))
    throw Error("human track: speed must be positive");
  if (mode == HumanMode::kStatic && !static_pose) throw Error("human track: static mode needs a pose");
}

}  // namespace prefnav::sim
