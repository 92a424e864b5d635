#include <prefnav/service/app.hpp>

#include <prefnav/error.hpp>
#include <prefnav/eval/frechet.hpp>
#include <prefnav/sim/io.hpp>

#include <cmath>
#include <fstream>

namespace prefnav::service {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

Response error(int status, const std::string& message, json extra = json::object()) {
  extra["error"] = message;
  return {status, std::move(extra)};
}

/// Demo validation only needs kinematics, so states stay empty.
class NullObserver final : public sim::StateObserver {
 public:
  void reset(std::uint64_t) override {}
  sim::Observation observe(const sim::WorldView&) override { return {}; }
  [[nodiscard]] std::size_t state_dim() const override { return 0; }
};

json violation(const std::string& kind, const geom::Vec2& at, const std::string& detail) {
  return {{"kind", kind}, {"location", {at.x, at.y}}, {"detail", detail}};
}

/// Drawn stroke resampled to ~5 cm spacing, timestamps re-interpolated.
std::vector<std::array<double, 3>> resample_stroke(const std::vector<std::array<double, 3>>& robot) {
  std::vector<geom::TimedPose> samples;
  for (const auto& p : robot) samples.push_back({p[0], geom::Pose2(p[1], p[2], 0.0)});
  const geom::Trajectory traj(std::move(samples));
  const auto n = static_cast<std::size_t>(std::max(2.0, std::ceil(traj.arc_length() / 0.05) + 1.0));
  const geom::Trajectory r = geom::resample(traj, n);
  std::vector<std::array<double, 3>> out;
  for (const auto& s : r.samples()) out.push_back({s.t, s.pose.x, s.pose.y});
  return out;
}

}  // namespace

json occupancy_preview(const geom::Scene& scene, double cell) {
  if (!(cell > 0.0)) throw Error("occupancy preview: cell must be positive");
  const auto& b = scene.bounds();
  const int cols = static_cast<int>(std::ceil((b.xmax - b.xmin) / cell));
  const int rows = static_cast<int>(std::ceil((b.ymax - b.ymin) / cell));
  json grid = json::array();
  for (int r = 0; r < rows; ++r) {
    std::vector<int> row(static_cast<std::size_t>(cols));
    for (int c = 0; c < cols; ++c) {
      const geom::Vec2 centre{b.xmin + (c + 0.5) * cell, b.ymin + (r + 0.5) * cell};
      row[static_cast<std::size_t>(c)] = scene.inside_obstacle(centre) ? 1 : 0;
    }
    grid.push_back(std::move(row));
  }
  return {{"cell", cell}, {"origin", {b.xmin, b.ymin}}, {"cols", cols}, {"rows", rows}, {"cells", std::move(grid)}};
}

App::App(AppConfig cfg) : cfg_(std::move(cfg)), store_(cfg_.demos_dir) {
  if (!fs::is_directory(cfg_.scenes_dir)) throw Error("scene directory '" + cfg_.scenes_dir.string() + "' not found");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(cfg_.scenes_dir))
    if (entry.path().extension() == ".json") files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    std::ifstream is(f);
    json j = json::parse(is);
    geom::Scene s = geom::Scene::from_json(j);
    scene_files_[s.id()] = std::move(j);
    scenes_.emplace(s.id(), std::move(s));
  }
}

Response App::handle(const Request& req) {
  try {
    const std::string& p = req.path;
    if (req.method == "GET" && p == "/scenes") return get_scenes();
    if (req.method == "GET" && p.starts_with("/scenes/")) return get_scene(p.substr(8));
    if (req.method == "POST" && p == "/demos") return post_demo(req.body);
    if (req.method == "GET" && p == "/demos") return get_demos(req);
    if (req.method == "POST" && p == "/rollouts") return post_rollout(req.body);
    if (req.method == "GET" && p == "/policies") return get_policies();
    return error(404, "no route for " + req.method + " " + p);
  } catch (const std::exception& e) {
    return error(500, e.what());
  }
}

Response App::get_scenes() const {
  json out = json::array();
  for (const auto& [id, s] : scenes_) {
    const auto& b = s.bounds();
    out.push_back({{"id", id}, {"bounds", {b.xmin, b.ymin, b.xmax, b.ymax}}});
  }
  return {200, out};
}

Response App::get_scene(const std::string& id) const {
  const auto it = scenes_.find(id);
  if (it == scenes_.end()) return error(404, "unknown scene '" + id + "'");
  return {200, {{"scene", scene_files_.at(id)}, {"occupancy", occupancy_preview(it->second, cfg_.occupancy_cell)}}};
}

Response App::post_demo(const std::string& body) {
  sim::Demonstration demo;
  try {
    demo = sim::Demonstration::from_json(json::parse(body));
  } catch (const std::exception& e) {
    return error(400, std::string("malformed demonstration: ") + e.what());
  }
  const auto it = scenes_.find(demo.scene_id);
  if (it == scenes_.end())
    return error(422, "validation failed", {{"valid", false},
                                            {"violations", json::array({{{"kind", "unknown_scene"},
                                                                         {"detail", demo.scene_id}}})}});
  const geom::Scene& scene = it->second;
  const auto& b = scene.bounds();
  for (const auto& p : demo.robot)
    if (p[1] < b.xmin || p[1] > b.xmax || p[2] < b.ymin || p[2] > b.ymax)
      return error(422, "validation failed",
                   {{"valid", false},
                    {"violations", json::array({violation("out_of_bounds", {p[1], p[2]}, "point outside the scene")})}});
  try {
    demo.robot = resample_stroke(demo.robot);
  } catch (const Error& e) {
    return error(422, "validation failed",
                 {{"valid", false}, {"violations", json::array({{{"kind", "degenerate"}, {"detail", e.what()}}})}});
  }

  json violations = json::array();
  json replay = nullptr, human_replay = nullptr, tracking = nullptr;
  try {
    sim::check_drawn_path(demo, scene);
    NullObserver observer;
    const sim::DemoReplay r = sim::demo_to_transitions(demo, scene, observer);
    replay = sim::trajectory_to_json(r.robot_traj);
    if (r.human_traj) human_replay = sim::trajectory_to_json(*r.human_traj);
    const auto rep = eval::deviation_aware_frechet(r.robot_traj.points(), demo.robot_points());
    tracking = {{"max_deviation", r.max_deviation}, {"f_at_t_star", rep.f_at_t_star}, {"F_full", rep.F_full}};
  } catch (const sim::DemoRejected& e) {
    const bool collision = e.kind() == sim::DemoRejected::Kind::kInvalid;
    violations.push_back(violation(collision ? "collision" : "untrackable", e.location(), e.detail()));
  }
  const bool valid = violations.empty();
  const DemoIndexEntry entry = store_.add(demo, valid, violations);
  json out = {{"id", entry.id},
              {"valid", valid},
              {"replay", replay},
              {"human_replay", human_replay},
              {"violations", violations},
              {"tracking", tracking}};
  if (!valid) out["error"] = "validation failed";
  return {valid ? 200 : 422, std::move(out)};
}

Response App::get_demos(const Request& req) const {
  std::optional<std::string> scene;
  if (const auto it = req.query.find("scene"); it != req.query.end() && !it->second.empty()) scene = it->second;
  json out = json::array();
  for (const auto& e : store_.list(scene)) out.push_back(e.to_json());
  return {200, out};
}

std::shared_ptr<const learn::PolicyPackage> App::policy(const std::string& id) {
  if (id.empty() || id.find('/') != std::string::npos || id.find("..") != std::string::npos) return nullptr;
  std::lock_guard lock(policy_mu_);
  if (const auto it = policies_.find(id); it != policies_.end()) return it->second;
  const fs::path dir = cfg_.policies_dir / id;
  if (!fs::exists(dir / "package.json")) return nullptr;
  auto pkg = std::make_shared<const learn::PolicyPackage>(learn::PolicyPackage::load(dir));
  policies_[id] = pkg;
  return pkg;
}

Response App::post_rollout(const std::string& body) {
  json j;
  try {
    j = json::parse(body);
  } catch (const json::exception& e) {
    return error(400, std::string("malformed body: ") + e.what());
  }
  if (!j.contains("policy_id") || !j.at("policy_id").is_string()) return error(400, "policy_id is required");
  const auto pkg = policy(j.at("policy_id").get<std::string>());
  if (!pkg) return error(404, "unknown policy '" + j.at("policy_id").get<std::string>() + "'");
  const std::uint64_t seed = j.value("seed", std::uint64_t{0});

  sim::EpisodeInit init;
  try {
    if (j.contains("init") && !j.at("init").is_null()) {
      init = sim::episode_init_from_json(j.at("init"));
    } else {
      const std::string scene_id = j.value("scene_id", std::string());
      const auto it = scenes_.find(scene_id);
      if (it == scenes_.end()) return error(404, "unknown scene '" + scene_id + "'");
      Rng rng(seed);
      init = sim::sample_episode(it->second, rng);
      init.seed = seed;
    }
  } catch (const Error& e) {
    return error(400, e.what());
  }
  const auto it = scenes_.find(init.scene_id);
  if (it == scenes_.end()) return error(404, "unknown scene '" + init.scene_id + "'");
  const auto observer = pkg->make_observer(true);
  const sim::EpisodeRun run = sim::run_episode(pkg->make_policy(), init, it->second, *observer);
  json out = sim::to_json(run.result);
  out["init"] = sim::to_json(init);
  out["policy_id"] = pkg->id;
  return {200, std::move(out)};
}

Response App::get_policies() const {
  json out = json::array();
  if (!fs::is_directory(cfg_.policies_dir)) return {200, out};
  std::vector<fs::path> dirs;
  for (const auto& entry : fs::directory_iterator(cfg_.policies_dir))
    if (fs::exists(entry.path() / "package.json")) dirs.push_back(entry.path());
  std::sort(dirs.begin(), dirs.end());
  for (const auto& d : dirs) {
    std::ifstream is(d / "package.json");
    try {
      const json m = json::parse(is);
      out.push_back({{"id", d.filename().string()},
                     {"variant", m.value("variant", std::string())},
                     {"meta", m.value("meta", json::object())}});
    } catch (const json::exception&) {
      continue;  // half-written package
    }
  }
  return {200, out};
}

}  // namespace prefnav::service
