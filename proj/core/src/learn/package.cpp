#include <prefnav/learn/package.hpp>

#include <prefnav/error.hpp>

#include <fstream>

namespace prefnav::learn {

namespace fs = std::filesystem;
using nlohmann::json;

sim::Policy greedy_policy(std::shared_ptr<const nn::Mlp> actor) {
  if (!actor) throw Error("greedy_policy: no actor");
  return [actor = std::move(actor)](const Eigen::VectorXd& s) {
    Eigen::Vector2d a = actor->predict(s).col(0);
    if (!a.allFinite()) throw Error("policy divergence");
    return denormalize_action(a);
  };
}

PolicyPackage PolicyPackage::load(const fs::path& dir) {
  const fs::path manifest = dir / "package.json";
  std::ifstream is(manifest);
  if (!is) throw Error("no policy package at '" + dir.string() + "'");
  json j;
  try {
    j = json::parse(is);
  } catch (const json::exception& e) {
    throw Error("malformed '" + manifest.string() + "': " + e.what());
  }
  PolicyPackage p;
  p.id = j.value("id", dir.filename().string());
  p.perception.variant = perception::variant_from_string(j.at("variant").get<std::string>());
  p.perception.rays = j.at("rays").get<int>();
  p.perception.latent = j.at("latent").get<int>();
  p.meta = j.value("meta", json::object());
  p.vae = std::make_shared<const perception::Vae>(
      perception::Vae::from_checkpoint(nn::Checkpoint::load(dir / "vae.ckpt.json")));
  if (fs::exists(dir / "predictor.ckpt.json"))
    p.predictor = std::make_shared<const perception::Predictor>(
        perception::Predictor::from_checkpoint(nn::Checkpoint::load(dir / "predictor.ckpt.json")));
  const nn::Checkpoint ckpt = nn::Checkpoint::load(dir / "policy.ckpt.json");
  if (ckpt.model_kind != "policy") throw Error("policy.ckpt.json is not a policy checkpoint");
  p.actor = std::make_shared<const nn::Mlp>(ckpt.get_mlp("actor"));
  if (static_cast<std::size_t>(p.actor->input_dim()) != static_cast<std::size_t>(p.perception.layout().size()))
    throw Error("policy package '" + p.id + "': actor input does not match the state layout");
  (void)p.make_observer(false);  // validates VAE/predictor against the variant
  return p;
}

void PolicyPackage::save(const fs::path& dir, const PolicyBundle* bundle) const {
  if (!vae) throw Error("policy package has no VAE");
  fs::create_directories(dir);
  json j = {{"id", id},
            {"variant", perception::to_string(perception.variant)},
            {"rays", perception.rays},
            {"latent", perception.latent},
            {"meta", meta}};
  const fs::path tmp = dir / "package.json.tmp";
  {
    std::ofstream os(tmp);
    os << j.dump(2) << '\n';
    if (!os) throw Error("cannot write '" + tmp.string() + "'");
  }
  vae->to_checkpoint().save(dir / "vae.ckpt.json");
  if (predictor) predictor->to_checkpoint().save(dir / "predictor.ckpt.json");
  if (bundle) {
    bundle->to_checkpoint().save(dir / "policy.ckpt.json");
  } else {
    if (!actor) throw Error("policy package has no actor");
    nn::Checkpoint c;
    c.model_kind = "policy";
    c.config = {{"state_dim", actor->input_dim()}};
    c.put("actor", *actor);
    c.save(dir / "policy.ckpt.json");
  }
  fs::rename(tmp, dir / "package.json");
}

std::unique_ptr<perception::Pipeline> PolicyPackage::make_observer(bool evaluation) const {
  perception::PerceptionConfig cfg = perception;
  cfg.evaluation = evaluation;
  return std::make_unique<perception::Pipeline>(cfg, vae, predictor);
}

sim::Policy PolicyPackage::make_policy() const { return greedy_policy(actor); }

}  // namespace prefnav::learn
