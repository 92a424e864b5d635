#pragma once
/**
 * @file  pipeline.hpp
 * @brief Controller variants and the scan -> state observer used by the simulator.
 */

#include <prefnav/perception/predictor.hpp>
#include <prefnav/perception/state.hpp>
#include <prefnav/perception/vae.hpp>
#include <prefnav/sim/world.hpp>

#include <memory>
#include <string>

namespace prefnav::perception {

enum class Variant { kVaeHa, kVaeHu, kVaeNd, kLstmHp, kVaeFov120, kVaeNg };

[[nodiscard]] std::string to_string(Variant v);
/// Accepts "vae-ha", "vae-hu", "vae-nd", "lstm-hp", "vae-fov-120", "vae-ng".
[[nodiscard]] Variant variant_from_string(const std::string& s);

struct VariantTraits {
  double fov = kDefaultFov;
  StateVariant state = StateVariant::kVae;
  bool include_goal_distance = true;
  bool uses_demos = true;
  /// Human detection is switched off when the policy is evaluated.
  bool mask_human_at_eval = false;
};

[[nodiscard]] VariantTraits traits(Variant v) noexcept;

struct PerceptionConfig {
  Variant variant = Variant::kVaeHa;
  int rays = 64;
  int latent = 8;
  bool evaluation = false;

  [[nodiscard]] StateLayout layout() const;
  [[nodiscard]] double fov() const noexcept { return traits(variant).fov; }
};

/// Renders a scan, encodes it to the VAE mean, detects the human and, for
/// S_LSTM, runs the predictor over the perception window. Models are shared
/// read-only; the window is per instance, so each worker owns its pipeline.
class Pipeline final : public sim::StateObserver {
 public:
  Pipeline(PerceptionConfig cfg, std::shared_ptr<const Vae> vae, std::shared_ptr<const Predictor> predictor = {});

  void reset(std::uint64_t seed) override;
  sim::Observation observe(const sim::WorldView& view) override;
  [[nodiscard]] std::size_t state_dim() const override { return static_cast<std::size_t>(layout_.size()); }

  [[nodiscard]] const PerceptionConfig& config() const noexcept { return cfg_; }
  [[nodiscard]] const StateLayout& layout() const noexcept { return layout_; }
  [[nodiscard]] std::shared_ptr<const Vae> vae() const noexcept { return vae_; }
  [[nodiscard]] std::shared_ptr<const Predictor> predictor() const noexcept { return predictor_; }

 private:
  PerceptionConfig cfg_;
  StateLayout layout_;
  std::shared_ptr<const Vae> vae_;
  std::shared_ptr<const Predictor> predictor_;
  PerceptionWindow window_;
};

}  // namespace prefnav::perception
