#pragma once
/**
 * @file  io.hpp
 * @brief JSON encodings of episode records and the JSON-lines rollout log.
 *
 * Rollout log: first line {"type": "header", "init": <EpisodeInit>}, then
 * one {"type": "transition", ...} line per step. Trajectories are encoded
 * as [[t, x, y, theta], ...].
 */

#include <prefnav/sim/world.hpp>

#include <nlohmann/json.hpp>

#include <iosfwd>

namespace prefnav::sim {

[[nodiscard]] nlohmann::json trajectory_to_json(const Trajectory& traj);
[[nodiscard]] Trajectory trajectory_from_json(const nlohmann::json& j);

[[nodiscard]] nlohmann::json to_json(const HumanTrack& h);
[[nodiscard]] HumanTrack human_track_from_json(const nlohmann::json& j);

[[nodiscard]] nlohmann::json to_json(const EpisodeInit& init);
[[nodiscard]] EpisodeInit episode_init_from_json(const nlohmann::json& j);

[[nodiscard]] nlohmann::json to_json(const Transition& tr);
[[nodiscard]] nlohmann::json to_json(const EpisodeResult& res);

/// Writes the header line followed by one line per transition.
void write_rollout_log(std::ostream& out, const EpisodeInit& init, const std::vector<Transition>& transitions);

}  // namespace prefnav::sim
