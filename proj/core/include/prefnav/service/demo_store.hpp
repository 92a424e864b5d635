#pragma once
/**
 * @file  demo_store.hpp
 * @brief Directory-backed demonstration collection.
 *
 *   <dir>/index.json   {"demos": [{id, scene_id, created_at, valid, violations}]}
 *   <dir>/<id>.json    demonstration file
 *
 * Every write goes to a temporary file that is renamed into place; writers
 * are serialised by an internal mutex.
 */

#include <prefnav/sim/demo.hpp>

#include <nlohmann/json.hpp>

#include <filesystem>
#include <mutex>
#include <optional>

namespace prefnav::service {

struct DemoIndexEntry {
  std::string id;
  std::string scene_id;
  std::string created_at;  // ISO-8601 UTC
  bool valid = false;
  nlohmann::json violations = nlohmann::json::array();

  [[nodiscard]] nlohmann::json to_json() const;
  static DemoIndexEntry from_json(const nlohmann::json& j);
};

/// Writes `text` to `path` through a sibling temporary file and rename.
void write_atomically(const std::filesystem::path& path, const std::string& text);

class DemoStore {
 public:
  /// Opens (creating if needed) the store; reads an existing index.
  explicit DemoStore(std::filesystem::path dir);

  /// Stores the demonstration and returns its index entry.
  DemoIndexEntry add(const sim::Demonstration& demo, bool valid, const nlohmann::json& violations);

  /// Entries in insertion order, optionally restricted to one scene.
  [[nodiscard]] std::vector<DemoIndexEntry> list(const std::optional<std::string>& scene = std::nullopt) const;
  [[nodiscard]] std::optional<sim::Demonstration> get(const std::string& id) const;
  /// Only demonstrations marked valid; these are what training may use.
  [[nodiscard]] std::vector<sim::Demonstration> valid_demos() const;

  [[nodiscard]] const std::filesystem::path& dir() const noexcept { return dir_; }

 private:
  void write_index() const;

  std::filesystem::path dir_;
  mutable std::mutex mu_;
  std::vector<DemoIndexEntry> index_;
  int next_ = 1;
};

}  // namespace prefnav::service
