#pragma once
/**
 * @file  predictor.hpp
 * @brief Next-step predictor over the last five perception tuples.
 *
 * Each window entry (d_H, dalpha_H, v, omega, l) is scaled to roughly unit
 * range and fed through two stacked GRU layers. From the final hidden state
 * a Gaussian head predicts the next latent and a two-layer dense head the
 * next human pose. Both heads are residual: they predict the change from
 * the newest window entry, so an untrained head reproduces the copy-last
 * baseline.
 */

#include <prefnav/nn/checkpoint.hpp>
#include <prefnav/nn/gru.hpp>
#include <prefnav/nn/mlp.hpp>
#include <prefnav/perception/human.hpp>
#include <prefnav/perception/vae.hpp>

#include <array>
#include <deque>

namespace prefnav::perception {

inline constexpr int kWindowLength = 5;

struct WindowEntry {
  double d_H = -1.0;
  double dalpha_H = 0.0;
  double v = 0.0;
  double omega = 0.0;
  Vector latent;
};

/// Ring of the last five entries. The first push of an episode fills every
/// slot with that entry.
class PerceptionWindow {
 public:
  void clear() noexcept { entries_.clear(); }
  void push(WindowEntry e);
  [[nodiscard]] bool warm() const noexcept { return entries_.size() == kWindowLength; }
  /// Oldest first. Throws Error("window not warm") when empty.
  [[nodiscard]] const std::deque<WindowEntry>& entries() const;

 private:
  std::deque<WindowEntry> entries_;
};

struct PredictorConfig {
  int latent = 8;
  int hidden = 64;
  int pose_hidden = 32;
  double logvar_clamp = 10.0;
};

struct Prediction {
  LatentState latent;
  double d_H = -1.0;
  double dalpha_H = 0.0;
};

/// Column-per-sample training batch: `inputs[k]` is step k of every window.
struct PredictorBatch {
  std::vector<Matrix> inputs;  // kWindowLength x (L+4, B), already scaled
  Matrix last_latent;          // (L, B) latent of the newest entry
  Matrix last_pose;            // (2, B) pose of the newest entry
  Matrix target_latent;        // (L, B)
  Matrix target_pose;          // (2, B)
  [[nodiscard]] Eigen::Index size() const noexcept { return target_pose.cols(); }
};

struct PredictorLoss {
  double total = 0.0;
  double latent = 0.0;  // mean squared error per latent dimension
  double pose = 0.0;    // mean squared error per pose component
};

/// Scaled network input for one entry.
[[nodiscard]] Vector window_input(const WindowEntry& e);

class Predictor {
 public:
  Predictor(PredictorConfig cfg, Rng& rng);
  Predictor(PredictorConfig cfg, nn::Gru g1, nn::Gru g2, nn::Mlp mu, nn::Mlp logvar, nn::Mlp pose);

  [[nodiscard]] const PredictorConfig& config() const noexcept { return cfg_; }

  /// Throws Error("window not warm") for an empty window. The latent sample
  /// uses `eps` (zeros when omitted).
  [[nodiscard]] Prediction predict_next(const PerceptionWindow& window, const Vector* eps = nullptr) const;

  /// Loss of the sampled latent (mu + sigma * eps) plus pose MSE.
  [[nodiscard]] PredictorLoss loss(const PredictorBatch& batch, const Matrix& eps) const;
  /// Same loss; gradients land in the modules' grads() (zeroed first).
  PredictorLoss loss_and_grad(const PredictorBatch& batch, const Matrix& eps);

  /// Every trainable parameter vector, in a fixed order.
  [[nodiscard]] std::vector<Vector*> parameter_blocks();
  [[nodiscard]] std::vector<Vector*> gradient_blocks();

  [[nodiscard]] nn::Checkpoint to_checkpoint() const;
  static Predictor from_checkpoint(const nn::Checkpoint& ckpt);

 private:
  struct Heads {
    Matrix mu, logvar, pose;
  };
  [[nodiscard]] Heads evaluate(const PredictorBatch& batch) const;

  PredictorConfig cfg_;
  nn::Gru g1_, g2_;
  nn::Mlp mu_, logvar_, pose_;
};

/// Losses of the copy-last-frame baseline: predicted latent and pose equal
/// the newest window entry.
[[nodiscard]] PredictorLoss copy_last_loss(const PredictorBatch& batch);

struct PredictorTrainConfig {
  int epochs = 20;
  int batch = 64;
  double lr = 1e-3;
  std::uint64_t seed = 1;
};

/// Trains on `data`; returns the mean loss of every epoch.
std::vector<double> train_predictor(Predictor& model, const PredictorBatch& data, const PredictorTrainConfig& cfg,
                                    const std::function<void(int, double)>& on_epoch = {});

/// Selects columns `idx` of a batch.
[[nodiscard]] PredictorBatch subset(const PredictorBatch& data, std::span<const Eigen::Index> idx);

}  // namespace prefnav::perception
