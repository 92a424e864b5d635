#include <prefnav/learn/workflow.hpp>

#include <prefnav/error.hpp>

#include <algorithm>
#include <fstream>
#include <set>

namespace prefnav::learn {

namespace fs = std::filesystem;

namespace {

std::vector<fs::path> json_files(const fs::path& dir) {
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".json") out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<perception::DatasetRecord> split(std::span<const perception::DatasetRecord> records, bool test) {
  std::vector<perception::DatasetRecord> out;
  for (const auto& r : records)
    if (perception::is_test_episode(r.episode) == test) out.push_back(r);
  return out;
}

}  // namespace

SceneMap load_scenes(const fs::path& path) {
  SceneMap out;
  if (fs::is_directory(path)) {
    for (const auto& f : json_files(path)) {
      geom::Scene s = geom::Scene::load(f);
      const std::string id = s.id();
      if (!out.emplace(id, std::move(s)).second) throw Error("duplicate scene id '" + id + "'");
    }
  } else {
    geom::Scene s = geom::Scene::load(path);
    out.emplace(s.id(), std::move(s));
  }
  if (out.empty()) throw Error("no scenes found at '" + path.string() + "'");
  return out;
}

std::vector<sim::Demonstration> load_demonstrations(const fs::path& path) {
  std::vector<sim::Demonstration> out;
  if (!fs::is_directory(path)) {
    out.push_back(sim::Demonstration::load(path));
    return out;
  }
  std::set<std::string> rejected;
  const fs::path index = path / "index.json";
  if (fs::exists(index)) {
    std::ifstream is(index);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(is);
    } catch (const nlohmann::json::exception& e) {
      throw Error("malformed demo index '" + index.string() + "': " + e.what());
    }
    for (const auto& e : j.at("demos"))
      if (!e.value("valid", false)) rejected.insert(e.at("id").get<std::string>() + ".json");
  }
  for (const auto& f : json_files(path))
    if (f.filename() != "index.json" && !rejected.contains(f.filename().string()))
      out.push_back(sim::Demonstration::load(f));
  return out;
}

DemoSet build_demo_set(std::vector<sim::Demonstration> demos, const SceneMap& scenes,
                       const eval::ObserverFactory& make_observer) {
  DemoSet set;
  for (const auto& d : demos) {
    const auto it = scenes.find(d.scene_id);
    if (it == scenes.end()) throw Error("demonstration refers to unknown scene '" + d.scene_id + "'");
    auto observer = make_observer();
    sim::DemoReplay replay = sim::demo_to_transitions(d, it->second, *observer);
    set.transitions.insert(set.transitions.end(), replay.transitions.begin(), replay.transitions.end());
  }
  set.demos = std::move(demos);
  return set;
}

std::vector<eval::Scenario> mode_scenarios(const SceneMap& scenes, std::optional<sim::HumanMode> mode) {
  std::vector<eval::Scenario> out;
  for (const auto& [id, s] : scenes) out.push_back({id, id, mode, std::nullopt});
  return out;
}

std::vector<eval::Scenario> demo_scenarios(std::span<const sim::Demonstration> demos) {
  std::vector<eval::Scenario> out;
  for (std::size_t i = 0; i < demos.size(); ++i)
    out.push_back({"demo-" + std::to_string(i + 1), demos[i].scene_id, std::nullopt, demos[i]});
  return out;
}

std::vector<geom::Scene> scene_list(const SceneMap& scenes) {
  std::vector<geom::Scene> out;
  for (const auto& [id, s] : scenes) out.push_back(s);
  return out;
}

PerceptionModels train_perception(std::span<const geom::Scene> scenes, const PerceptionTrainConfig& cfg) {
  const auto records = perception::generate_dataset(scenes, cfg.dataset);
  const auto train = split(records, false);
  const auto test = split(records, true);
  if (train.empty() || test.empty()) throw Error("dataset too small for a train/test split");

  PerceptionModels out;
  Rng rng(cfg.vae_train.seed);
  perception::VaeConfig vc = cfg.vae;
  vc.rays = cfg.dataset.rays;
  auto vae = std::make_shared<perception::Vae>(vc, rng);
  const Matrix train_scans = perception::scan_matrix(train);
  const Matrix test_scans = perception::scan_matrix(test);
  (void)perception::train_vae(*vae, train_scans, cfg.vae_train);
  out.vae_test_mse = perception::reconstruction_mse(*vae, test_scans, test_scans);
  out.baseline_test_mse = perception::mean_scan_baseline_mse(train_scans, test_scans);
  out.vae = vae;

  if (cfg.with_predictor) {
    Rng prng(cfg.predictor_train.seed);
    perception::PredictorConfig pc = cfg.predictor;
    pc.latent = vc.latent;
    auto pred = std::make_shared<perception::Predictor>(pc, prng);
    const auto windows = perception::predictor_windows(train, *vae);
    if (windows.size() == 0) throw Error("dataset holds no predictor windows");
    (void)perception::train_predictor(*pred, windows, cfg.predictor_train);
    out.predictor = pred;
  }
  return out;
}

PolicyRun train_policy(const std::string& id, const perception::PerceptionConfig& perception,
                       const PerceptionModels& models, TrainConfig cfg, const SceneMap& scenes,
                       std::vector<sim::Demonstration> demos, const TrainHooks& hooks) {
  const auto tr = perception::traits(perception.variant);
  perception::PerceptionConfig pc = perception;
  pc.evaluation = false;
  auto make_observer = [&]() -> std::unique_ptr<sim::StateObserver> {
    return std::make_unique<perception::Pipeline>(pc, models.vae, models.predictor);
  };

  DemoSet demo_set;
  if (tr.uses_demos) {
    if (demos.empty()) throw Error("variant " + perception::to_string(pc.variant) + " requires demonstrations");
    demo_set = build_demo_set(std::move(demos), scenes, make_observer);
  } else {
    cfg.td3.lambda_BC = 0.0;
  }

  const auto list = scene_list(scenes);
  PolicyRun run{{}, train(cfg, list, demo_set, make_observer, hooks)};
  run.package.id = id;
  run.package.perception = pc;
  run.package.vae = models.vae;
  run.package.predictor = models.predictor;
  run.package.actor = std::make_shared<const nn::Mlp>(run.result.best.actor);
  run.package.meta = {{"steps", run.result.steps},
                      {"episodes", run.result.episodes},
                      {"best_step", run.result.best_step},
                      {"best_score", run.result.best_score},
                      {"demonstrations", demo_set.demos.size()}};
  return run;
}

}  // namespace prefnav::learn
