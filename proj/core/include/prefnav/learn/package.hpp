#pragma once
/**
 * @file  package.hpp
 * @brief Self-contained trained controller on disk.
 *
 * Directory layout:
 *   package.json        {id, variant, rays, latent, meta}
 *   vae.ckpt.json       VAE checkpoint
 *   predictor.ckpt.json predictor checkpoint (S_LSTM variants only)
 *   policy.ckpt.json    actor/critic checkpoint
 */

#include <prefnav/learn/td3.hpp>
#include <prefnav/perception/pipeline.hpp>

#include <filesystem>
#include <memory>

namespace prefnav::learn {

struct PolicyPackage {
  std::string id;
  perception::PerceptionConfig perception;
  std::shared_ptr<const perception::Vae> vae;
  std::shared_ptr<const perception::Predictor> predictor;
  std::shared_ptr<const nn::Mlp> actor;
  nlohmann::json meta = nlohmann::json::object();

  /// Throws Error when a file is missing or shapes disagree.
  static PolicyPackage load(const std::filesystem::path& dir);
  /// Writes every file; `bundle` (when given) replaces the stored actor and
  /// keeps the critics for later inspection.
  void save(const std::filesystem::path& dir, const PolicyBundle* bundle = nullptr) const;

  [[nodiscard]] std::unique_ptr<perception::Pipeline> make_observer(bool evaluation) const;
  /// Deterministic actor (no exploration noise).
  [[nodiscard]] sim::Policy make_policy() const;
};

/// Deterministic policy closure over a shared actor.
[[nodiscard]] sim::Policy greedy_policy(std::shared_ptr<const nn::Mlp> actor);

}  // namespace prefnav::learn
