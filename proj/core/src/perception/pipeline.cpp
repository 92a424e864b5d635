#include <prefnav/perception/pipeline.hpp>

#include <prefnav/error.hpp>

#include <array>

namespace prefnav::perception {

namespace {

constexpr std::array<std::pair<Variant, const char*>, 6> kNames{{{Variant::kVaeHa, "vae-ha"},
                                                                  {Variant::kVaeHu, "vae-hu"},
                                                                  {Variant::kVaeNd, "vae-nd"},
                                                                  {Variant::kLstmHp, "lstm-hp"},
                                                                  {Variant::kVaeFov120, "vae-fov-120"},
                                                                  {Variant::kVaeNg, "vae-ng"}}};

}  // namespace

std::string to_string(Variant v) {
  for (const auto& [k, name] : kNames)
    if (k == v) return name;
  throw Error("unknown variant");
}

Variant variant_from_string(const std::string& s) {
  for (const auto& [k, name] : kNames)
    if (s == name) return k;
  throw Error("unknown variant '" + s + "'");
}

VariantTraits traits(Variant v) noexcept {
  VariantTraits t;
  switch (v) {
    case Variant::kVaeHa: break;
    case Variant::kVaeHu: t.mask_human_at_eval = true; break;
    case Variant::kVaeNd: t.uses_demos = false; break;
    case Variant::kLstmHp: t.state = StateVariant::kLstm; break;
    case Variant::kVaeFov120: t.fov = kWideFov; break;
    case Variant::kVaeNg: t.include_goal_distance = false; break;
  }
  return t;
}

StateLayout PerceptionConfig::layout() const {
  const VariantTraits t = traits(variant);
  StateLayout l;
  l.variant = t.state;
  l.latent = latent;
  l.include_goal_distance = t.include_goal_distance;
  l.mask_human = evaluation && t.mask_human_at_eval;
  return l;
}

Pipeline::Pipeline(PerceptionConfig cfg, std::shared_ptr<const Vae> vae, std::shared_ptr<const Predictor> predictor)
    : cfg_(cfg), layout_(cfg.layout()), vae_(std::move(vae)), predictor_(std::move(predictor)) {
  if (!vae_) throw Error("pipeline: a VAE is required");
  if (vae_->config().rays != cfg_.rays || vae_->latent_dim() != cfg_.latent)
    throw Error("pipeline: VAE does not match the perception configuration");
  if (layout_.variant == StateVariant::kLstm) {
    if (!predictor_) throw Error("pipeline: variant " + to_string(cfg_.variant) + " needs a predictor");
    if (predictor_->config().latent != cfg_.latent) throw Error("pipeline: predictor latent size mismatch");
  }
}

void Pipeline::reset(std::uint64_t) { window_.clear(); }

sim::Observation Pipeline::observe(const sim::WorldView& view) {
  const double fov = cfg_.fov();
  const DepthScan scan = render_scan(view.scene, view.robot, view.human, fov, cfg_.rays);
  const Vector latent = vae_->encode(scan).mu;
  const HumanObservation seen = detect_human(view.scene, view.robot, view.human, fov);
  const HumanObservation obs = layout_.mask_human ? HumanObservation::none() : seen;
  const geom::PolarRef goal = geom::to_polar(view.goal, view.robot);

  std::optional<PosePrediction> pred;
  if (layout_.variant == StateVariant::kLstm) {
    window_.push({obs.d_H, obs.dalpha_H, view.last_action.v, view.last_action.omega, latent});
    const Prediction p = predictor_->predict_next(window_);
    pred = PosePrediction{p.d_H, p.dalpha_H};
  }
  return {assemble_state(layout_, latent, goal, obs, pred), seen.visible()};
}

}  // namespace prefnav::perception
