#pragma once
/**
 * @file  dataset.hpp
 * @brief Depth-scan dataset generation and the batches derived from it.
 *
 * Record format (one JSON object per line):
 *   {scan:[R floats], k_H, d_H, dalpha_H, action:[v, omega], scene_id, t,
 *    episode, human_mode}
 * Records of one episode are contiguous and ordered by t.
 */

#include <prefnav/geom/scene.hpp>
#include <prefnav/perception/predictor.hpp>
#include <prefnav/perception/scan.hpp>
#include <prefnav/sim/world.hpp>

#include <nlohmann/json.hpp>

#include <filesystem>
#include <span>

namespace prefnav::perception {

struct DatasetRecord {
  Eigen::VectorXd scan;
  HumanObservation human;
  sim::Action action;
  std::string scene_id;
  double t = 0.0;
  int episode = 0;
  sim::HumanMode human_mode = sim::HumanMode::kAbsent;

  [[nodiscard]] nlohmann::json to_json() const;
  static DatasetRecord from_json(const nlohmann::json& j);
};

struct DatasetConfig {
  int n_frames = 1000;
  int rays = 64;
  double fov = kDefaultFov;
  std::uint64_t seed = 1;
  sim::ModeWeights weights;
  /// Gaussian perturbation of the driver's commands.
  double v_noise = 0.08;
  double omega_noise = 0.6;
};

/// Gap-seeking controller on the raw scan: steers toward the free ray best
/// aligned with the goal and slows down in front of obstacles.
[[nodiscard]] sim::Action reactive_driver(const DepthScan& scan, const geom::PolarRef& goal);

/// Drives the reactive controller through sampled episodes, cycling over
/// `scenes`, until `n_frames` records exist.
[[nodiscard]] std::vector<DatasetRecord> generate_dataset(std::span<const geom::Scene> scenes,
                                                          const DatasetConfig& cfg);

void write_dataset(const std::filesystem::path& path, std::span<const DatasetRecord> records);
[[nodiscard]] std::vector<DatasetRecord> read_dataset(const std::filesystem::path& path);

/// Episodes with id % 5 == 4 form the held-out split.
[[nodiscard]] bool is_test_episode(int episode) noexcept;

/// Scans as columns.
[[nodiscard]] Matrix scan_matrix(std::span<const DatasetRecord> records);

/// MSE of predicting every test scan by the mean training scan.
[[nodiscard]] double mean_scan_baseline_mse(const Matrix& train, const Matrix& test);

struct DatasetStats {
  int frames = 0;
  int episodes = 0;
  double human_visible_fraction = 0.0;
  double mean_scan_baseline_mse = 0.0;  // train mean vs held-out split
  [[nodiscard]] nlohmann::json to_json() const;
};

[[nodiscard]] DatasetStats dataset_stats(std::span<const DatasetRecord> records);

enum class WindowFilter { kAll, kDynamicHuman };

/// Sliding five-step windows with their next-step targets, latents taken
/// from the VAE mean. The action in entry j is the one executed just before
/// frame j (zero at episode start), matching what the live pipeline sees.
/// kDynamicHuman keeps windows from walking-human episodes in which the
/// human is visible in the window or the target frame.
[[nodiscard]] PredictorBatch predictor_windows(std::span<const DatasetRecord> records, const Vae& vae,
                                               WindowFilter filter = WindowFilter::kAll);

}  // namespace prefnav::perception
