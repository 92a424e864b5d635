#pragma once
/**
 * @file  vae.hpp
 * @brief beta-VAE over 1D depth scans.
 *
 * Encoder: R -> 32 -> 16 -> 2L (relu, linear head split into mu and
 * log-variance clamped to [-10, 10]). Decoder: L -> 16 -> 32 -> R with a
 * sigmoid output. Training reconstructs the clean scan from a corrupted one.
 *
 * Loss per batch: w * mean((x_hat - x)^2) + beta * KL. With w = 1 this is the
 * plain MSE form. The default w = R / (2 sigma_x^2) with sigma_x = 0.1 (in
 * normalised range units) makes the first term the Gaussian negative
 * log-likelihood of the scan; with w = 1 and beta = 3 every latent
 * collapses onto the prior for 64-ray scans.
 */

#include <prefnav/nn/adam.hpp>
#include <prefnav/nn/checkpoint.hpp>
#include <prefnav/nn/mlp.hpp>
#include <prefnav/perception/scan.hpp>

#include <functional>

namespace prefnav::perception {

using nn::Matrix;
using nn::Vector;

struct VaeConfig {
  int rays = 64;
  int latent = 8;
  std::vector<int> hidden{32, 16};
  double beta = 3.0;
  double recon_weight = 3200.0;
  double logvar_clamp = 10.0;
};

/// Encoder output for one scan; sample = mu + sigma * eps.
struct LatentState {
  Vector mu;
  Vector sigma;
  Vector eps;
  Vector sample;
};

struct VaeLoss {
  double total = 0.0;
  double recon = 0.0;  // mean squared error per ray
  double kl = 0.0;     // unweighted KL(N(mu, sigma^2) || N(0, I)), summed over latent dims
};

/// Batch-averaged loss terms: recon = mean((x_hat - x)^2),
/// total = recon_weight * recon + beta * kl. Columns are samples.
[[nodiscard]] VaeLoss vae_loss_terms(const Matrix& recon, const Matrix& clean, const Matrix& mu,
                                     const Matrix& logvar, double beta, double recon_weight = 1.0);

class Vae {
 public:
  Vae(VaeConfig cfg, Rng& rng);
  Vae(VaeConfig cfg, nn::Mlp encoder, nn::Mlp decoder);

  [[nodiscard]] const VaeConfig& config() const noexcept { return cfg_; }
  [[nodiscard]] int latent_dim() const noexcept { return cfg_.latent; }

  /// Deterministic mu/sigma; the sample uses `eps` (zeros when omitted).
  [[nodiscard]] LatentState encode(const DepthScan& scan, const Vector* eps = nullptr) const;
  /// Batch of posterior means.
  [[nodiscard]] Matrix encode_mean(const Matrix& scans) const;
  [[nodiscard]] DepthScan decode(const Vector& latent) const;
  [[nodiscard]] Matrix decode_batch(const Matrix& latents) const;

  /// Loss for a batch with fixed reparameterisation noise `eps` (L x B).
  [[nodiscard]] VaeLoss loss(const Matrix& clean, const Matrix& corrupted, const Matrix& eps) const;
  /// Same loss; leaves its gradient in encoder().grads() / decoder().grads()
  /// (zeroed first).
  VaeLoss loss_and_grad(const Matrix& clean, const Matrix& corrupted, const Matrix& eps);

  nn::Mlp& encoder() noexcept { return enc_; }
  nn::Mlp& decoder() noexcept { return dec_; }
  [[nodiscard]] const nn::Mlp& encoder() const noexcept { return enc_; }
  [[nodiscard]] const nn::Mlp& decoder() const noexcept { return dec_; }

  [[nodiscard]] nn::Checkpoint to_checkpoint() const;
  static Vae from_checkpoint(const nn::Checkpoint& ckpt);

 private:
  void split_head(const Matrix& head, Matrix& mu, Matrix& logvar) const;

  VaeConfig cfg_;
  nn::Mlp enc_;
  nn::Mlp dec_;
};

struct VaeTrainConfig {
  int epochs = 30;
  int batch = 128;
  double lr = 1e-3;
  double dropout = 0.05;
  std::uint64_t seed = 1;
};

struct VaeTrainLog {
  std::vector<double> epoch_loss;
  std::vector<double> epoch_recon;
};

/// Trains on the columns of `scans` (R x N). `on_epoch` is called after each
/// epoch with (epoch, mean loss).
VaeTrainLog train_vae(Vae& vae, const Matrix& scans, const VaeTrainConfig& cfg,
                      const std::function<void(int, double)>& on_epoch = {});

/// Zeroes every entry independently with probability p (ray dropout).
[[nodiscard]] Matrix corrupt_columns(const Matrix& scans, double p, Rng& rng);

/// Mean squared reconstruction error of decode(mu(encode(input))) against `clean`.
[[nodiscard]] double reconstruction_mse(const Vae& vae, const Matrix& clean, const Matrix& input);

}  // namespace prefnav::perception
