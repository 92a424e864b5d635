#include <prefnav/perception/vae.hpp>

#include <prefnav/error.hpp>

#include <algorithm>
#include <numeric>

namespace prefnav::perception {

VaeLoss vae_loss_terms(const Matrix& recon, const Matrix& clean, const Matrix& mu, const Matrix& logvar,
                       double beta, double recon_weight) {
  if (recon.rows() != clean.rows() || recon.cols() != clean.cols()) throw Error("vae loss: reconstruction shape");
  const double batch = static_cast<double>(clean.cols());
  VaeLoss l;
  l.recon = (recon - clean).squaredNorm() / (static_cast<double>(clean.rows()) * batch);
  l.kl = 0.5 * (mu.array().square() + logvar.array().exp() - 1.0 - logvar.array()).sum() / batch;
  l.total = recon_weight * l.recon + beta * l.kl;
  return l;
}

Vae::Vae(VaeConfig cfg, Rng& rng) : cfg_(std::move(cfg)) {
  using nn::Activation;
  std::vector<int> rev(cfg_.hidden.rbegin(), cfg_.hidden.rend());
  enc_ = nn::Mlp::make(cfg_.rays, cfg_.hidden, 2 * cfg_.latent, Activation::kRelu, Activation::kLinear, rng);
  dec_ = nn::Mlp::make(cfg_.latent, rev, cfg_.rays, Activation::kRelu, Activation::kSigmoid, rng);
}

Vae::Vae(VaeConfig cfg, nn::Mlp encoder, nn::Mlp decoder)
    : cfg_(std::move(cfg)), enc_(std::move(encoder)), dec_(std::move(decoder)) {
  if (enc_.input_dim() != cfg_.rays || enc_.output_dim() != 2 * cfg_.latent || dec_.input_dim() != cfg_.latent ||
      dec_.output_dim() != cfg_.rays)
    throw Error("vae: encoder/decoder shapes do not match the configuration");
}

void Vae::split_head(const Matrix& head, Matrix& mu, Matrix& logvar) const {
  mu = head.topRows(cfg_.latent);
  logvar = head.bottomRows(cfg_.latent).cwiseMax(-cfg_.logvar_clamp).cwiseMin(cfg_.logvar_clamp);
}

LatentState Vae::encode(const DepthScan& scan, const Vector* eps) const {
  if (scan.rays.size() != cfg_.rays) throw Error("vae encode: scan has the wrong ray count");
  Matrix mu, lv;
  split_head(enc_.predict(scan.rays), mu, lv);
  LatentState s;
  s.mu = mu.col(0);
  s.sigma = (0.5 * lv.col(0).array()).exp().matrix();
  s.eps = eps ? *eps : Vector::Zero(cfg_.latent);
  if (s.eps.size() != cfg_.latent) throw Error("vae encode: eps has the wrong size");
  s.sample = s.mu + s.sigma.cwiseProduct(s.eps);
  return s;
}

Matrix Vae::encode_mean(const Matrix& scans) const { return enc_.predict(scans).topRows(cfg_.latent); }

DepthScan Vae::decode(const Vector& latent) const {
  DepthScan s;
  s.rays = dec_.predict(latent).col(0);
  return s;
}

Matrix Vae::decode_batch(const Matrix& latents) const { return dec_.predict(latents); }

VaeLoss Vae::loss(const Matrix& clean, const Matrix& corrupted, const Matrix& eps) const {
  Matrix mu, lv;
  split_head(enc_.predict(corrupted), mu, lv);
  const Matrix z = mu + ((0.5 * lv.array()).exp() * eps.array()).matrix();
  return vae_loss_terms(dec_.predict(z), clean, mu, lv, cfg_.beta, cfg_.recon_weight);
}

VaeLoss Vae::loss_and_grad(const Matrix& clean, const Matrix& corrupted, const Matrix& eps) {
  enc_.zero_grad();
  dec_.zero_grad();
  const Matrix head = enc_.forward(corrupted);
  const Matrix raw_lv = head.bottomRows(cfg_.latent);
  Matrix mu, lv;
  split_head(head, mu, lv);
  const Matrix sigma = (0.5 * lv.array()).exp().matrix();
  const Matrix z = mu + sigma.cwiseProduct(eps);
  const Matrix recon = dec_.forward(z);
  const VaeLoss l = vae_loss_terms(recon, clean, mu, lv, cfg_.beta, cfg_.recon_weight);

  const double batch = static_cast<double>(clean.cols());
  const Matrix d_recon = (2.0 * cfg_.recon_weight / (static_cast<double>(clean.rows()) * batch)) * (recon - clean);
  const Matrix dz = dec_.backward(d_recon);
  Matrix d_head(2 * cfg_.latent, clean.cols());
  d_head.topRows(cfg_.latent) = dz + (cfg_.beta / batch) * mu;
  Matrix d_lv = (dz.array() * 0.5 * sigma.array() * eps.array() +
                 (cfg_.beta / batch) * 0.5 * (sigma.array().square() - 1.0))
                    .matrix();
  // The clamp passes no gradient outside its range.
  d_lv = (raw_lv.array().abs() > cfg_.logvar_clamp).select(0.0, d_lv);
  d_head.bottomRows(cfg_.latent) = d_lv;
  enc_.backward(d_head);
  return l;
}

nn::Checkpoint Vae::to_checkpoint() const {
  nn::Checkpoint c;
  c.model_kind = "vae";
  c.config = {{"rays", cfg_.rays},
              {"latent", cfg_.latent},
              {"hidden", cfg_.hidden},
              {"beta", cfg_.beta},
              {"recon_weight", cfg_.recon_weight},
              {"logvar_clamp", cfg_.logvar_clamp},
              {"reduction_factor", static_cast<double>(cfg_.rays) / cfg_.latent},
              // Reference full-scale setup: 128x80 depth images into 32 latents.
              {"full_scale_reduction_factor", 128.0 * 80.0 / 32.0}};
  c.put("encoder", enc_);
  c.put("decoder", dec_);
  return c;
}

Vae Vae::from_checkpoint(const nn::Checkpoint& ckpt) {
  if (ckpt.model_kind != "vae") throw Error("checkpoint is a '" + ckpt.model_kind + "', expected 'vae'");
  VaeConfig cfg;
  cfg.rays = ckpt.config.at("rays").get<int>();
  cfg.latent = ckpt.config.at("latent").get<int>();
  cfg.hidden = ckpt.config.at("hidden").get<std::vector<int>>();
  cfg.beta = ckpt.config.value("beta", 3.0);
  cfg.recon_weight = ckpt.config.value("recon_weight", cfg.recon_weight);
  cfg.logvar_clamp = ckpt.config.value("logvar_clamp", 10.0);
  return Vae(cfg, ckpt.get_mlp("encoder"), ckpt.get_mlp("decoder"));
}

VaeTrainLog train_vae(Vae& vae, const Matrix& scans, const VaeTrainConfig& cfg,
                      const std::function<void(int, double)>& on_epoch) {
  if (scans.rows() != vae.config().rays) throw Error("train_vae: scan rows do not match the ray count");
  const Eigen::Index n = scans.cols();
  if (n == 0) throw Error("train_vae: empty dataset");
  Rng rng(cfg.seed);
  nn::Adam enc_opt(vae.encoder().parameter_count(), {cfg.lr});
  nn::Adam dec_opt(vae.decoder().parameter_count(), {cfg.lr});
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  const int L = vae.latent_dim();

  VaeTrainLog log;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double sum = 0.0, sum_recon = 0.0;
    int batches = 0;
    for (Eigen::Index start = 0; start < n; start += cfg.batch) {
      const Eigen::Index b = std::min<Eigen::Index>(cfg.batch, n - start);
      Matrix clean(scans.rows(), b);
      for (Eigen::Index k = 0; k < b; ++k) clean.col(k) = scans.col(order[static_cast<std::size_t>(start + k)]);
      const Matrix noisy = corrupt_columns(clean, cfg.dropout, rng);
      Matrix eps(L, b);
      for (Eigen::Index k = 0; k < eps.size(); ++k) eps.data()[k] = gaussian(rng);
      const VaeLoss l = vae.loss_and_grad(clean, noisy, eps);
      enc_opt.step(vae.encoder().params(), vae.encoder().grads());
      dec_opt.step(vae.decoder().params(), vae.decoder().grads());
      sum += l.total;
      sum_recon += l.recon;
      ++batches;
    }
    log.epoch_loss.push_back(sum / batches);
    log.epoch_recon.push_back(sum_recon / batches);
    if (on_epoch) on_epoch(epoch, log.epoch_loss.back());
  }
  return log;
}

Matrix corrupt_columns(const Matrix& scans, double p, Rng& rng) {
  std::bernoulli_distribution drop(p);
  Matrix out = scans;
  for (Eigen::Index k = 0; k < out.size(); ++k)
    if (drop(rng)) out.data()[k] = 0.0;
  return out;
}

double reconstruction_mse(const Vae& vae, const Matrix& clean, const Matrix& input) {
  const Matrix recon = vae.decode_batch(vae.encode_mean(input));
  return (recon - clean).squaredNorm() / static_cast<double>(clean.size());
}

}  // namespace prefnav::perception
