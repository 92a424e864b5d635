#include <prefnav/service/demo_store.hpp>

#include <prefnav/error.hpp>

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace prefnav::service {

namespace fs = std::filesystem;
using nlohmann::json;

json DemoIndexEntry::to_json() const {
  return {{"id", id}, {"scene_id", scene_id}, {"created_at", created_at}, {"valid", valid}, {"violations", violations}};
}

DemoIndexEntry DemoIndexEntry::from_json(const json& j) {
  DemoIndexEntry e;
  e.id = j.at("id").get<std::string>();
  e.scene_id = j.at("scene_id").get<std::string>();
  e.created_at = j.value("created_at", std::string());
  e.valid = j.at("valid").get<bool>();
  e.violations = j.value("violations", json::array());
  return e;
}

void write_atomically(const fs::path& path, const std::string& text) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    os << text;
    if (!os) throw Error("cannot write '" + tmp.string() + "'");
  }
  fs::rename(tmp, path);
}

namespace {

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

}  // namespace

DemoStore::DemoStore(fs::path dir) : dir_(std::move(dir)) {
  fs::create_directories(dir_);
  const fs::path index = dir_ / "index.json";
  if (!fs::exists(index)) return;
  std::ifstream is(index);
  json j;
  try {
    j = json::parse(is);
  } catch (const json::exception& e) {
    throw Error("malformed demo index '" + index.string() + "': " + e.what());
  }
  for (const auto& e : j.at("demos")) index_.push_back(DemoIndexEntry::from_json(e));
  for (const auto& e : index_) {
    int n = 0;
    if (std::sscanf(e.id.c_str(), "demo-%d", &n) == 1) next_ = std::max(next_, n + 1);
  }
}

void DemoStore::write_index() const {
  json arr = json::array();
  for (const auto& e : index_) arr.push_back(e.to_json());
  write_atomically(dir_ / "index.json", json{{"demos", arr}}.dump(2) + "\n");
}

DemoIndexEntry DemoStore::add(const sim::Demonstration& demo, bool valid, const json& violations) {
  std::lock_guard lock(mu_);
  char id[32];
  std::snprintf(id, sizeof id, "demo-%04d", next_++);
  DemoIndexEntry e{id, demo.scene_id, utc_now(), valid, violations};
  write_atomically(dir_ / (e.id + ".json"), demo.to_json().dump(2) + "\n");
  index_.push_back(e);
  write_index();
  return e;
}

std::vector<DemoIndexEntry> DemoStore::list(const std::optional<std::string>& scene) const {
  std::lock_guard lock(mu_);
  std::vector<DemoIndexEntry> out;
  for (const auto& e : index_)
    if (!scene || e.scene_id == *scene) out.push_back(e);
  return out;
}

std::optional<sim::Demonstration> DemoStore::get(const std::string& id) const {
  {
    std::lock_guard lock(mu_);
    const bool known = std::any_of(index_.begin(), index_.end(), [&](const auto& e) { return e.id == id; });
    if (!known) return std::nullopt;
  }
  return sim::Demonstration::load(dir_ / (id + ".json"));
}

std::vector<sim::Demonstration> DemoStore::valid_demos() const {
  std::vector<std::string> ids;
  {
    std::lock_guard lock(mu_);
    for (const auto& e : index_)
      if (e.valid) ids.push_back(e.id);
  }
  std::vector<sim::Demonstration> out;
  for (const auto& id : ids) out.push_back(sim::Demonstration::load(dir_ / (id + ".json")));
  return out;
}

}  // namespace prefnav::service
