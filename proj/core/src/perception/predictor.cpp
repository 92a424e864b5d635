#include <prefnav/perception/predictor.hpp>

#include <prefnav/error.hpp>
#include <prefnav/nn/adam.hpp>
#include <prefnav/sim/types.hpp>

#include <algorithm>
#include <numeric>

namespace prefnav::perception {

void PerceptionWindow::push(WindowEntry e) {
  if (entries_.empty()) {
    entries_.assign(kWindowLength, e);
    return;
  }
  if (e.latent.size() != entries_.back().latent.size()) throw Error("window entry latent size changed");
  entries_.pop_front();
  entries_.push_back(std::move(e));
}

const std::deque<WindowEntry>& PerceptionWindow::entries() const {
  if (!warm()) throw Error("window not warm");
  return entries_;
}

Vector window_input(const WindowEntry& e) {
  Vector x(e.latent.size() + 4);
  x << e.d_H / sim::Limits::kSensorRange, e.dalpha_H / geom::kPi, e.v / sim::Limits::kVMax,
      e.omega / sim::Limits::kOmegaMax, e.latent;
  return x;
}

Predictor::Predictor(PredictorConfig cfg, Rng& rng) : cfg_(cfg) {
  using nn::Activation;
  g1_ = nn::Gru(cfg_.latent + 4, cfg_.hidden, rng);
  g2_ = nn::Gru(cfg_.hidden, cfg_.hidden, rng);
  mu_ = nn::Mlp::make(cfg_.hidden, {}, cfg_.latent, Activation::kRelu, Activation::kLinear, rng);
  logvar_ = nn::Mlp::make(cfg_.hidden, {}, cfg_.latent, Activation::kRelu, Activation::kLinear, rng);
  pose_ = nn::Mlp::make(cfg_.hidden, {cfg_.pose_hidden}, 2, Activation::kRelu, Activation::kLinear, rng);
}

Predictor::Predictor(PredictorConfig cfg, nn::Gru g1, nn::Gru g2, nn::Mlp mu, nn::Mlp logvar, nn::Mlp pose)
    : cfg_(cfg), g1_(std::move(g1)), g2_(std::move(g2)), mu_(std::move(mu)), logvar_(std::move(logvar)),
      pose_(std::move(pose)) {
  if (g1_.input_dim() != cfg_.latent + 4 || g1_.hidden_dim() != cfg_.hidden || g2_.input_dim() != cfg_.hidden ||
      g2_.hidden_dim() != cfg_.hidden || mu_.input_dim() != cfg_.hidden || mu_.output_dim() != cfg_.latent ||
      logvar_.output_dim() != cfg_.latent || pose_.input_dim() != cfg_.hidden || pose_.output_dim() != 2)
    throw Error("predictor: module shapes do not match the configuration");
}

Predictor::Heads Predictor::evaluate(const PredictorBatch& batch) const {
  if (batch.inputs.size() != kWindowLength) throw Error("predictor: batch must hold five steps");
  nn::Gru g1 = g1_, g2 = g2_;
  const auto& h1 = g1.forward(batch.inputs);
  const Matrix hT = g2.forward(h1).back();
  Heads out;
  out.mu = batch.last_latent + mu_.predict(hT);
  out.logvar = logvar_.predict(hT).cwiseMax(-cfg_.logvar_clamp).cwiseMin(cfg_.logvar_clamp);
  out.pose = batch.last_pose + pose_.predict(hT);
  return out;
}

Prediction Predictor::predict_next(const PerceptionWindow& window, const Vector* eps) const {
  const auto& entries = window.entries();
  PredictorBatch b;
  for (const auto& e : entries) {
    if (e.latent.size() != cfg_.latent) throw Error("predictor: window latent has the wrong size");
    b.inputs.push_back(window_input(e));
  }
  b.last_latent = entries.back().latent;
  b.last_pose = Eigen::Vector2d(entries.back().d_H, entries.back().dalpha_H);
  const Heads h = evaluate(b);
  Prediction p;
  p.latent.mu = h.mu.col(0);
  p.latent.sigma = (0.5 * h.logvar.col(0).array()).exp().matrix();
  p.latent.eps = eps ? *eps : Vector::Zero(cfg_.latent);
  if (p.latent.eps.size() != cfg_.latent) throw Error("predictor: eps has the wrong size");
  p.latent.sample = p.latent.mu + p.latent.sigma.cwiseProduct(p.latent.eps);
  p.d_H = h.pose(0, 0);
  p.dalpha_H = h.pose(1, 0);
  return p;
}

namespace {

PredictorLoss loss_terms(const Matrix& z, const Matrix& pose, const PredictorBatch& b) {
  PredictorLoss l;
  l.latent = (z - b.target_latent).squaredNorm() / static_cast<double>(z.size());
  l.pose = (pose - b.target_pose).squaredNorm() / static_cast<double>(pose.size());
  l.total = l.latent + l.pose;
  return l;
}

}  // namespace

PredictorLoss Predictor::loss(const PredictorBatch& batch, const Matrix& eps) const {
  const Heads h = evaluate(batch);
  const Matrix z = h.mu + ((0.5 * h.logvar.array()).exp() * eps.array()).matrix();
  return loss_terms(z, h.pose, batch);
}

PredictorLoss Predictor::loss_and_grad(const PredictorBatch& batch, const Matrix& eps) {
  if (batch.inputs.size() != kWindowLength) throw Error("predictor: batch must hold five steps");
  for (auto* g : gradient_blocks()) g->setZero();
  const auto& h1 = g1_.forward(batch.inputs);
  const Matrix hT = g2_.forward(h1).back();
  const Matrix mu = batch.last_latent + mu_.forward(hT);
  const Matrix raw_lv = logvar_.forward(hT);
  const Matrix lv = raw_lv.cwiseMax(-cfg_.logvar_clamp).cwiseMin(cfg_.logvar_clamp);
  const Matrix sigma = (0.5 * lv.array()).exp().matrix();
  const Matrix z = mu + sigma.cwiseProduct(eps);
  const Matrix pose = batch.last_pose + pose_.forward(hT);
  const PredictorLoss l = loss_terms(z, pose, batch);

  const Matrix dz = (2.0 / static_cast<double>(z.size())) * (z - batch.target_latent);
  Matrix dlv = (dz.array() * 0.5 * sigma.array() * eps.array()).matrix();
  dlv = (raw_lv.array().abs() > cfg_.logvar_clamp).select(0.0, dlv);
  const Matrix dpose = (2.0 / static_cast<double>(pose.size())) * (pose - batch.target_pose);

  Matrix dhT = mu_.backward(dz);
  dhT += logvar_.backward(dlv);
  dhT += pose_.backward(dpose);
  std::vector<Matrix> dh2(kWindowLength, Matrix::Zero(cfg_.hidden, hT.cols()));
  dh2.back() = dhT;
  const std::vector<Matrix> dh1 = g2_.backward(dh2);
  (void)g1_.backward(dh1);
  return l;
}

std::vector<Vector*> Predictor::parameter_blocks() {
  return {&g1_.params(), &g2_.params(), &mu_.params(), &logvar_.params(), &pose_.params()};
}

std::vector<Vector*> Predictor::gradient_blocks() {
  return {&g1_.grads(), &g2_.grads(), &mu_.grads(), &logvar_.grads(), &pose_.grads()};
}

nn::Checkpoint Predictor::to_checkpoint() const {
  nn::Checkpoint c;
  c.model_kind = "predictor";
  c.config = {{"latent", cfg_.latent},
              {"hidden", cfg_.hidden},
              {"pose_hidden", cfg_.pose_hidden},
              {"logvar_clamp", cfg_.logvar_clamp},
              {"window", kWindowLength}};
  c.put("gru1", g1_);
  c.put("gru2", g2_);
  c.put("mu", mu_);
  c.put("logvar", logvar_);
  c.put("pose", pose_);
  return c;
}

Predictor Predictor::from_checkpoint(const nn::Checkpoint& ckpt) {
  if (ckpt.model_kind != "predictor")
    throw Error("checkpoint is a '" + ckpt.model_kind + "', expected 'predictor'");
  PredictorConfig cfg;
  cfg.latent = ckpt.config.at("latent").get<int>();
  cfg.hidden = ckpt.config.at("hidden").get<int>();
  cfg.pose_hidden = ckpt.config.at("pose_hidden").get<int>();
  cfg.logvar_clamp = ckpt.config.value("logvar_clamp", 10.0);
  return Predictor(cfg, ckpt.get_gru("gru1"), ckpt.get_gru("gru2"), ckpt.get_mlp("mu"), ckpt.get_mlp("logvar"),
                   ckpt.get_mlp("pose"));
}

PredictorLoss copy_last_loss(const PredictorBatch& batch) { return loss_terms(batch.last_latent, batch.last_pose, batch); }

PredictorBatch subset(const PredictorBatch& data, std::span<const Eigen::Index> idx) {
  const auto pick = [&idx](const Matrix& m) {
    Matrix out(m.rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) out.col(static_cast<Eigen::Index>(k)) = m.col(idx[k]);
    return out;
  };
  PredictorBatch b;
  for (const auto& x : data.inputs) b.inputs.push_back(pick(x));
  b.last_latent = pick(data.last_latent);
  b.last_pose = pick(data.last_pose);
  b.target_latent = pick(data.target_latent);
  b.target_pose = pick(data.target_pose);
  return b;
}

std::vector<double> train_predictor(Predictor& model, const PredictorBatch& data, const PredictorTrainConfig& cfg,
                                    const std::function<void(int, double)>& on_epoch) {
  const Eigen::Index n = data.size();
  if (n == 0) throw Error("train_predictor: empty dataset");
  Rng rng(cfg.seed);
  std::vector<nn::Adam> opts;
  for (auto* p : model.parameter_blocks()) opts.emplace_back(p->size(), nn::AdamConfig{cfg.lr});
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  const int L = model.config().latent;

  std::vector<double> history;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double sum = 0.0;
    int batches = 0;
    for (Eigen::Index start = 0; start < n; start += cfg.batch) {
      const auto len = static_cast<std::size_t>(std::min<Eigen::Index>(cfg.batch, n - start));
      const std::span<const Eigen::Index> idx(order.data() + start, len);
      const PredictorBatch b = subset(data, idx);
      Matrix eps(L, b.size());
      for (Eigen::Index k = 0; k < eps.size(); ++k) eps.data()[k] = gaussian(rng);
      sum += model.loss_and_grad(b, eps).total;
      ++batches;
      auto params = model.parameter_blocks();
      auto grads = model.gradient_blocks();
      for (std::size_t k = 0; k < opts.size(); ++k) opts[k].step(*params[k], *grads[k]);
    }
    history.push_back(sum / batches);
    if (on_epoch) on_epoch(epoch, history.back());
  }
  return history;
}

}  // namespace prefnav::perception
