#pragma once
/**
 * @file  app.hpp
 * @brief Request handling of the local HTTP facade, independent of the
 *        transport so it can be exercised directly.
 *
 * Endpoints:
 *   GET  /scenes               [{id, bounds}]
 *   GET  /scenes/{id}          {scene, occupancy}
 *   POST /demos                {id, valid, replay, violations, tracking}
 *   GET  /demos?scene=<id>     [{id, scene_id, created_at, valid, violations}]
 *   POST /rollouts             {policy_id, seed, init?, scene_id?} -> EpisodeResult
 *   GET  /policies             [{id, variant, ...}]
 */

#include <prefnav/geom/scene.hpp>
#include <prefnav/learn/package.hpp>
#include <prefnav/service/demo_store.hpp>

#include <nlohmann/json.hpp>

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>

namespace prefnav::service {

struct Request {
  std::string method;
  std::string path;
  std::map<std::string, std::string> query;
  std::string body;
};

struct Response {
  int status = 200;
  nlohmann::json body;
};

struct AppConfig {
  std::filesystem::path scenes_dir;
  std::filesystem::path demos_dir;
  std::filesystem::path policies_dir;
  double occupancy_cell = 0.25;  // preview resolution, meters
};

/// Coarse grid for rendering: a cell is occupied when its centre lies inside
/// an obstacle. Row r covers y in [ymin + r cell, ymin + (r + 1) cell).
[[nodiscard]] nlohmann::json occupancy_preview(const geom::Scene& scene, double cell);

class App {
 public:
  /// Loads every *.json scene in scenes_dir; scenes are read-only afterwards.
  explicit App(AppConfig cfg);

  [[nodiscard]] Response handle(const Request& req);

  [[nodiscard]] const std::map<std::string, geom::Scene>& scenes() const noexcept { return scenes_; }
  [[nodiscard]] DemoStore& demos() noexcept { return store_; }

 private:
  Response get_scenes() const;
  Response get_scene(const std::string& id) const;
  Response post_demo(const std::string& body);
  Response get_demos(const Request& req) const;
  Response post_rollout(const std::string& body);
  Response get_policies() const;

  std::shared_ptr<const learn::PolicyPackage> policy(const std::string& id);

  AppConfig cfg_;
  std::map<std::string, geom::Scene> scenes_;
  std::map<std::string, nlohmann::json> scene_files_;
  DemoStore store_;
  std::mutex policy_mu_;
  std::map<std::string, std::shared_ptr<const learn::PolicyPackage>> policies_;
};

}  // namespace prefnav::service
