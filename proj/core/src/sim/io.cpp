#include <prefnav/sim/io.hpp>

#include <prefnav/error.hpp>

#include <ostream>

namespace prefnav::sim {

namespace {

nlohmann::json vec_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

}  // namespace

nlohmann::json trajectory_to_json(const Trajectory& traj) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& s : traj.samples()) arr.push_back({s.t, s.pose.x, s.pose.y, s.pose.theta});
  return arr;
}

Trajectory trajectory_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw Error("trajectory must be an array of [t, x, y(, theta)]");
  std::vector<geom::TimedPose> samples;
  for (const auto& row : j) {
    if (!row.is_array() || row.size() < 3) throw Error("trajectory sample must be [t, x, y(, theta)]");
    const double theta = row.size() >= 4 ? row.at(3).get<double>() : 0.0;
    samples.push_back({row.at(0).get<double>(), Pose2(row.at(1).get<double>(), row.at(2).get<double>(), theta)});
  }
  // Three-column tracks carry no heading; use the path tangent.
  if (!j.empty() && j.at(0).size() < 4) {
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const std::size_t a = i + 1 < samples.size() ? i : i - 1;
      const Vec2 d = samples[a + 1].pose.position() - samples[a].pose.position();
      if (d.norm() > 0.0) samples[i].pose = Pose2(samples[i].pose.position(), std::atan2(d.y, d.x));
    }
  }
  return Trajectory(std::move(samples));
}

nlohmann::json to_json(const HumanTrack& h) {
  nlohmann::json j;
  j["mode"] = to_string(h.mode);
  j["speed"] = h.speed;
  j["path"] = h.path ? trajectory_to_json(*h.path) : nlohmann::json(nullptr);
  j["static_pose"] = h.static_pose ? nlohmann::json{h.static_pose->x, h.static_pose->y, h.static_pose->theta}
                                   : nlohmann::json(nullptr);
  return j;
}

HumanTrack human_track_from_json(const nlohmann::json& j) {
  HumanTrack h;
  h.mode = human_mode_from_string(j.at("mode").get<std::string>());
  h.speed = j.value("speed", 0.0);
  if (j.contains("path") && !j.at("path").is_null()) h.path = trajectory_from_json(j.at("path"));
  if (j.contains("static_pose") && !j.at("static_pose").is_null()) {
    const auto& p = j.at("static_pose");
    h.static_pose = Pose2(p.at(0).get<double>(), p.at(1).get<double>(), p.size() > 2 ? p.at(2).get<double>() : 0.0);
  }
  h.validate();
  return h;
}

nlohmann::json to_json(const EpisodeInit& init) {
  return {{"scene_id", init.scene_id},
          {"robot_start", {init.robot_start.x, init.robot_start.y, init.robot_start.theta}},
          {"goal", {init.goal.x, init.goal.y}},
          {"human", to_json(init.human)},
          {"seed", init.seed}};
}

EpisodeInit episode_init_from_json(const nlohmann::json& j) {
  try {
    EpisodeInit init;
    init.scene_id = j.at("scene_id").get<std::string>();
    const auto& s = j.at("robot_start");
    init.robot_start = Pose2(s.at(0).get<double>(), s.at(1).get<double>(), s.size() > 2 ? s.at(2).get<double>() : 0.0);
    init.goal = {j.at("goal").at(0).get<double>(), j.at("goal").at(1).get<double>()};
    if (j.contains("human")) init.human = human_track_from_json(j.at("human"));
    init.seed = j.value("seed", std::uint64_t{0});
    return init;
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("episode init: malformed JSON: ") + e.what());
  }
}

nlohmann::json to_json(const Transition& tr) {
  return {{"s", vec_json(tr.s)},     {"a", {tr.a.v, tr.a.omega}}, {"r", tr.r},
          {"s_next", vec_json(tr.s_next)}, {"done", tr.done},  {"source", to_string(tr.source)}};
}

nlohmann::json to_json(const EpisodeResult& res) {
  nlohmann::json j;
  j["outcome"] = to_string(res.outcome);
  j["return_"] = res.return_;
  j["steps"] = res.steps;
  j["robot_traj"] = trajectory_to_json(res.robot_traj);
  j["human_traj"] = res.human_traj ? trajectory_to_json(*res.human_traj) : nlohmann::json(nullptr);
  j["human_in_fov_mask"] = res.human_in_fov_mask;
  j["rewards"] = res.rewards;
  return j;
}

void write_rollout_log(std::ostream& out, const EpisodeInit& init, const std::vector<Transition>& transitions) {
  out << nlohmann::json{{"type", "header"}, {"init", to_json(init)}}.dump() << '\n';
  for (const auto& tr : transitions) {
    auto j = to_json(tr);
    j["type"] = "transition";
    out << j.dump() << '\n';
  }
}

}  // namespace prefnav::sim
