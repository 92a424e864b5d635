#pragma once
/**
 * @file  workflow.hpp
 * @brief File-level plumbing shared by the command line tool and the
 *        acceptance suite: scene and demonstration discovery, demo
 *        transition sets and the perception-model training chain.
 */

#include <prefnav/eval/evaluate.hpp>
#include <prefnav/learn/package.hpp>
#include <prefnav/learn/trainer.hpp>
#include <prefnav/perception/dataset.hpp>

#include <filesystem>
#include <map>

namespace prefnav::learn {

using SceneMap = std::map<std::string, geom::Scene>;

/// Loads one scene file, or every *.json in a directory (sorted by name).
[[nodiscard]] SceneMap load_scenes(const std::filesystem::path& path);

/// Loads one demonstration file or every *.json in a directory, skipping
/// the entries a demo-store index.json marks invalid.
[[nodiscard]] std::vector<sim::Demonstration> load_demonstrations(const std::filesystem::path& path);

/// Replays every demonstration through a fresh observer from `make_observer`.
/// Throws sim::DemoRejected for a colliding or untrackable stroke and Error
/// for an unknown scene.
[[nodiscard]] DemoSet build_demo_set(std::vector<sim::Demonstration> demos, const SceneMap& scenes,
                                     const eval::ObserverFactory& make_observer);

/// Scenario set of a policy evaluation: every scene with the human mode drawn
/// from all modes, optionally restricted to one mode.
[[nodiscard]] std::vector<eval::Scenario> mode_scenarios(const SceneMap& scenes,
                                                         std::optional<sim::HumanMode> mode = std::nullopt);

/// One scenario per demonstration, named after its index.
[[nodiscard]] std::vector<eval::Scenario> demo_scenarios(std::span<const sim::Demonstration> demos);

[[nodiscard]] std::vector<geom::Scene> scene_list(const SceneMap& scenes);

struct PerceptionModels {
  std::shared_ptr<const perception::Vae> vae;
  std::shared_ptr<const perception::Predictor> predictor;  // null unless requested
  double vae_test_mse = 0.0;
  double baseline_test_mse = 0.0;
};

struct PerceptionTrainConfig {
  perception::DatasetConfig dataset;
  perception::VaeConfig vae;
  perception::VaeTrainConfig vae_train;
  perception::PredictorConfig predictor;
  perception::PredictorTrainConfig predictor_train;
  bool with_predictor = false;
};

/// Generates a dataset on `scenes`, trains the VAE on its training split and,
/// when requested, the predictor on dynamic-human windows.
[[nodiscard]] PerceptionModels train_perception(std::span<const geom::Scene> scenes, const PerceptionTrainConfig& cfg);

struct PolicyRun {
  PolicyPackage package;
  TrainResult result;
};

/// Builds the demo set (when the variant uses demonstrations), trains the
/// policy and packages the best snapshot. Throws Error for a variant that
/// needs demonstrations when none are given.
[[nodiscard]] PolicyRun train_policy(const std::string& id, const perception::PerceptionConfig& perception,
                                     const PerceptionModels& models, TrainConfig cfg, const SceneMap& scenes,
                                     std::vector<sim::Demonstration> demos, const TrainHooks& hooks = {});

}  // namespace prefnav::learn
