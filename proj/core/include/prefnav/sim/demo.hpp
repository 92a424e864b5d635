#pragma once
/**
 * @file  demo.hpp
 * @brief Demonstrations: file format, tracking replay and conversion into
 *        reward-annotated demonstration transitions.
 *
 * Demonstration file:
 *   {"scene_id": str, "robot": [[t, x, y], ...],
 *    "human": [[t, x, y, theta], ...] | null,
 *    "meta": {"author": str, "note": str}}
 * Both tracks share one clock. The goal is the last robot point.
 */

#include <prefnav/error.hpp>
#include <prefnav/rng.hpp>
#include <prefnav/sim/world.hpp>

#include <nlohmann/json.hpp>

#include <filesystem>

namespace prefnav::sim {

struct Demonstration {
  std::string scene_id;
  std::vector<std::array<double, 3>> robot;  // [t, x, y]
  std::optional<std::vector<std::array<double, 4>>> human;  // [t, x, y, theta]
  std::string author;
  std::string note;

  [[nodiscard]] std::vector<Vec2> robot_points() const;
  [[nodiscard]] Vec2 goal() const;

  [[nodiscard]] nlohmann::json to_json() const;
  static Demonstration from_json(const nlohmann::json& j);
  static Demonstration load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;
};

/// Why a demonstration could not be turned into transitions.
class DemoRejected : public Error {
 public:
  enum class Kind { kInvalid, kUntrackable };
  DemoRejected(Kind kind, Vec2 location, const std::string& detail);

  [[nodiscard]] Kind kind() const noexcept { return kind_; }
  [[nodiscard]] const Vec2& location() const noexcept { return location_; }
  [[nodiscard]] const std::string& detail() const noexcept { return detail_; }

 private:
  Kind kind_;
  Vec2 location_;
  std::string detail_;
};

/// Pure-pursuit path tracker respecting the velocity limits.
class PurePursuit {
 public:
  explicit PurePursuit(std::vector<Vec2> path, double lookahead = 0.4);

  /// Command for the current pose; advances the internal progress marker.
  Action command(const Pose2& pose);
  [[nodiscard]] const std::vector<Vec2>& path() const noexcept { return path_; }

 private:
  std::vector<Vec2> path_;
  std::vector<double> cum_;
  double lookahead_;
  std::size_t progress_ = 0;
};

struct DemoReplay {
  std::vector<Transition> transitions;
  Trajectory robot_traj;
  std::optional<Trajectory> human_traj;
  double max_deviation = 0.0;  // worst distance from the drawn path, meters
};

/// Episode setup that replays a demonstration: start at the first drawn
/// point facing along the stroke, goal at its end, human replaying the
/// recorded track (absent when none).
[[nodiscard]] EpisodeInit demo_episode_init(const Demonstration& demo, std::uint64_t seed = 0);

/// demo_episode_init with the start position and heading perturbed by
/// Gaussian noise; falls back to the exact start when 20 draws all collide.
[[nodiscard]] EpisodeInit demo_scenario_init(const Demonstration& demo, const geom::Scene& scene, Rng& rng,
                                             double position_sd = 0.1, double heading_sd = 0.15);

/// Throws DemoRejected(kInvalid) at the first drawn point whose robot disc
/// touches an obstacle.
void check_drawn_path(const Demonstration& demo, const geom::Scene& scene);

/// Tracks the demonstration with pure pursuit and records DEMO transitions.
/// Rejects strokes that collide ("invalid demonstration") or that the
/// tracker cannot follow within 0.2 m ("untrackable demonstration").
[[nodiscard]] DemoReplay demo_to_transitions(const Demonstration& demo, const geom::Scene& scene,
                                             StateObserver& observer);

}  // namespace prefnav::sim
