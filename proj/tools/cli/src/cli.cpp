#include <prefnav/cli/cli.hpp>

#include <prefnav/error.hpp>
#include <prefnav/eval/evaluate.hpp>
#include <prefnav/learn/workflow.hpp>
#include <prefnav/service/server.hpp>
#include <prefnav/sim/io.hpp>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <set>

#ifndef PREFNAV_DEFAULT_DATA_DIR
#define PREFNAV_DEFAULT_DATA_DIR "data"
#endif

namespace prefnav::cli {

namespace fs = std::filesystem;
using nlohmann::json;
using nn::Matrix;

namespace {

class UsageError : public Error {
 public:
  using Error::Error;
};

/// Flag bindings of one subcommand, resolvable into a JSON parameter set.
class Params {
 public:
  explicit Params(CLI::App* app) : app_(app) {}

  template <class T>
  CLI::Option* option(const std::string& flag, const std::string& key, T& var, const std::string& help) {
    CLI::Option* o = app_->add_option(flag, var, help)->capture_default_str();
    entries_.push_back({key, o, [&var] { return json(var); }});
    defaults_[key] = var;
    return o;
  }

  CLI::Option* flag(const std::string& flag, const std::string& key, bool& var, const std::string& help) {
    CLI::Option* o = app_->add_flag(flag, var, help);
    entries_.push_back({key, o, [&var] { return json(var); }});
    defaults_[key] = var;
    return o;
  }

  /// Key settable only through the config file.
  void nested(const std::string& key, json value) { defaults_[key] = std::move(value); }

  [[nodiscard]] json resolve(const std::string& config_path) const {
    json p = defaults_;
    if (!config_path.empty()) {
      std::ifstream is(config_path);
      if (!is) throw UsageError("cannot open config file '" + config_path + "'");
      json file;
      try {
        file = json::parse(is);
      } catch (const json::exception& e) {
        throw UsageError("config file '" + config_path + "': " + e.what());
      }
      if (!file.is_object()) throw UsageError("config file '" + config_path + "' must hold a JSON object");
      for (const auto& [k, v] : file.items()) {
        if (!p.contains(k)) throw UsageError("config file: unknown key '" + k + "'");
        if (p[k].is_object() && v.is_object())
          p[k].merge_patch(v);
        else
          p[k] = v;
      }
    }
    for (const auto& e : entries_)
      if (e.opt->count() > 0) p[e.key] = e.get();
    return p;
  }

 private:
  struct Entry {
    std::string key;
    CLI::Option* opt;
    std::function<json()> get;
  };
  CLI::App* app_;
  std::vector<Entry> entries_;
  json defaults_ = json::object();
};

void write_json(const fs::path& path, const json& j) {
  std::ofstream os(path);
  os << j.dump(2) << '\n';
  if (!os) throw Error("cannot write '" + path.string() + "'");
}

fs::path prepare_out(const json& p) {
  const fs::path out = p.at("out").get<std::string>();
  fs::create_directories(out);
  return out;
}

fs::path data_path(const std::string& value, const char* sub) {
  return value.empty() ? fs::path(data_root()) / sub : fs::path(value);
}

/// Scenes from a file or directory path, or a scene id in the data root.
learn::SceneMap resolve_scenes(const std::string& spec) {
  if (spec.empty() || fs::exists(spec)) return learn::load_scenes(data_path(spec, "scenes"));
  const fs::path file = fs::path(data_root()) / "scenes" / (spec + ".json");
  if (fs::exists(file)) return learn::load_scenes(file);
  auto all = learn::load_scenes(fs::path(data_root()) / "scenes");
  const auto it = all.find(spec);
  if (it == all.end()) throw Error("unknown scene '" + spec + "'");
  return {{it->first, it->second}};
}

perception::Variant parse_variant(const std::string& s) {
  try {
    return perception::variant_from_string(s);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
}

std::optional<sim::HumanMode> parse_mode(int mode) {
  if (mode == 0) return std::nullopt;
  if (mode < 1 || mode > 4) throw UsageError("--mode must be 0 (all) or 1-4");
  return static_cast<sim::HumanMode>(mode);
}

std::vector<perception::DatasetRecord> split(const std::vector<perception::DatasetRecord>& records, bool test) {
  std::vector<perception::DatasetRecord> out;
  for (const auto& r : records)
    if (perception::is_test_episode(r.episode) == test) out.push_back(r);
  return out;
}

std::vector<geom::Vec2> load_points(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open '" + path.string() + "'");
  std::vector<geom::Vec2> pts;
  if (path.extension() == ".jsonl") {
    // Rollout log: poses are not logged per transition, only the header init.
    throw Error("'" + path.string() + "': use the rollout result JSON, not the transition log");
  }
  json j;
  try {
    j = json::parse(is);
  } catch (const json::exception& e) {
    throw Error("'" + path.string() + "': " + e.what());
  }
  if (j.is_object() && j.contains("robot")) return sim::Demonstration::from_json(j).robot_points();
  if (j.is_object() && j.contains("robot_traj")) return sim::trajectory_from_json(j.at("robot_traj")).points();
  if (!j.is_array()) throw Error("'" + path.string() + "' holds no trajectory");
  // [[x, y]], [[t, x, y]] or [[t, x, y, theta]]
  for (const auto& e : j) {
    const std::size_t n = e.size();
    if (n == 2)
      pts.emplace_back(e[0].get<double>(), e[1].get<double>());
    else if (n == 3 || n == 4)
      pts.emplace_back(e[1].get<double>(), e[2].get<double>());
    else
      throw Error("'" + path.string() + "': trajectory entries need 2-4 numbers");
  }
  return pts;
}

// ---------------------------------------------------------------- commands

int run_gen_dataset(const json& p, std::ostream& out) {
  const auto scenes = resolve_scenes(p.at("scene"));
  perception::DatasetConfig dc;
  dc.n_frames = p.at("frames");
  dc.rays = p.at("rays");
  dc.fov = perception::traits(parse_variant(p.at("variant"))).fov;
  dc.seed = p.at("seed");
  if (dc.n_frames <= 0 || dc.rays <= 0) throw UsageError("--frames and --rays must be positive");
  const auto records = perception::generate_dataset(learn::scene_list(scenes), dc);
  const fs::path dir = prepare_out(p);
  perception::write_dataset(dir / "dataset.jsonl", records);
  json stats = perception::dataset_stats(records).to_json();
  stats["rays"] = dc.rays;
  stats["fov"] = dc.fov;
  write_json(dir / "dataset_stats.json", stats);
  write_json(dir / "config.json", p);
  out << "dataset: " << records.size() << " frames -> " << (dir / "dataset.jsonl").string() << '\n'
      << stats.dump(2) << '\n';
  return kExitOk;
}

int run_train_vae(const json& p, std::ostream& out) {
  const auto records = perception::read_dataset(p.at("dataset").get<std::string>());
  const auto train = split(records, false);
  const auto test = split(records, true);
  if (train.empty() || test.empty()) throw Error("dataset too small for a train/test split");
  const Matrix train_scans = perception::scan_matrix(train);
  const Matrix test_scans = perception::scan_matrix(test);

  perception::VaeConfig vc;
  vc.rays = static_cast<int>(train_scans.rows());
  vc.latent = p.at("latent");
  vc.beta = p.at("beta");
  vc.recon_weight = p.at("recon_weight");
  perception::VaeTrainConfig tc;
  tc.epochs = p.at("epochs");
  tc.batch = p.at("batch");
  tc.lr = p.at("lr");
  tc.dropout = p.at("dropout");
  tc.seed = p.at("seed");

  Rng rng(tc.seed);
  perception::Vae vae(vc, rng);
  const auto log = perception::train_vae(vae, train_scans, tc, [&](int epoch, double loss) {
    out << "epoch " << epoch + 1 << "/" << tc.epochs << " loss " << loss << '\n';
  });
  Rng crng(derive_seed(tc.seed, 1));
  const Matrix noisy = perception::corrupt_columns(test_scans, tc.dropout, crng);
  const double mse = perception::reconstruction_mse(vae, test_scans, test_scans);
  const double noisy_mse = perception::reconstruction_mse(vae, test_scans, noisy);
  const double baseline = perception::mean_scan_baseline_mse(train_scans, test_scans);

  const fs::path dir = prepare_out(p);
  vae.to_checkpoint().save(dir / "vae.ckpt.json");
  const json metrics = {{"test_mse", mse},
                        {"corrupted_test_mse", noisy_mse},
                        {"baseline_mse", baseline},
                        {"ratio", mse / baseline},
                        {"epoch_loss", log.epoch_loss},
                        {"epoch_recon", log.epoch_recon}};
  write_json(dir / "vae_metrics.json", metrics);
  write_json(dir / "config.json", p);
  out << "held-out MSE " << mse << " (corrupted input " << noisy_mse << ", mean-scan baseline " << baseline << ")\n";
  return kExitOk;
}

int run_train_predictor(const json& p, std::ostream& out) {
  const auto records = perception::read_dataset(p.at("dataset").get<std::string>());
  const auto vae = perception::Vae::from_checkpoint(nn::Checkpoint::load(p.at("vae").get<std::string>()));
  const auto train = split(records, false);
  const auto test = split(records, true);
  const auto train_w = perception::predictor_windows(train, vae);
  const auto test_w = perception::predictor_windows(test, vae, perception::WindowFilter::kDynamicHuman);
  if (train_w.size() == 0) throw Error("dataset holds no training windows");

  perception::PredictorConfig pc;
  pc.latent = vae.latent_dim();
  perception::PredictorTrainConfig tc;
  tc.epochs = p.at("epochs");
  tc.batch = p.at("batch");
  tc.lr = p.at("lr");
  tc.seed = p.at("seed");
  Rng rng(tc.seed);
  perception::Predictor model(pc, rng);
  const auto losses = perception::train_predictor(model, train_w, tc, [&](int epoch, double loss) {
    out << "epoch " << epoch + 1 << "/" << tc.epochs << " loss " << loss << '\n';
  });

  json metrics = {{"epoch_loss", losses}, {"train_windows", train_w.size()}, {"test_windows", test_w.size()}};
  if (test_w.size() > 0) {
    const Matrix eps = Matrix::Zero(pc.latent, static_cast<Eigen::Index>(test_w.size()));
    const auto l = model.loss(test_w, eps);
    const auto c = perception::copy_last_loss(test_w);
    metrics["test"] = {{"total", l.total}, {"latent", l.latent}, {"pose", l.pose}};
    metrics["copy_last"] = {{"total", c.total}, {"latent", c.latent}, {"pose", c.pose}};
    out << "dynamic-human test loss " << l.total << " (copy-last baseline " << c.total << ")\n";
  }
  const fs::path dir = prepare_out(p);
  model.to_checkpoint().save(dir / "predictor.ckpt.json");
  write_json(dir / "predictor_metrics.json", metrics);
  write_json(dir / "config.json", p);
  return kExitOk;
}

int run_train_policy(json p, std::ostream& out) {
  const auto variant = parse_variant(p.at("variant"));
  const auto tr = perception::traits(variant);
  const bool no_demos = p.at("no_demos");
  if (tr.uses_demos && no_demos)
    throw UsageError("variant " + perception::to_string(variant) + " learns from demonstrations; drop --no-demos");

  learn::TrainConfig tc;
  tc.td3 = learn::TD3Config::from_json(p.at("td3"));
  tc.total_steps = p.at("steps");
  tc.eval_every = p.at("eval_every");
  tc.stop_score = p.at("stop_score");
  tc.seed = p.at("seed");
  tc.scene_rotation = p.at("scene_rotation");
  tc.demo_scenario_prob = p.at("demo_scenario_prob");
  if (p.at("lambda_bc").is_number()) tc.td3.lambda_BC = p.at("lambda_bc");
  tc.td3.validate();

  const auto scenes = resolve_scenes(p.at("scene"));
  std::vector<sim::Demonstration> demos;
  if (tr.uses_demos) {
    const fs::path dpath = data_path(p.at("demos"), "demos");
    demos = learn::load_demonstrations(dpath);
    if (demos.empty()) throw Error("no demonstrations found at '" + dpath.string() + "'");
    p["demos"] = dpath.string();
  }
  p["scene"] = p.at("scene").get<std::string>().empty() ? (fs::path(data_root()) / "scenes").string()
                                                        : p.at("scene").get<std::string>();

  perception::PerceptionConfig pc;
  pc.variant = variant;
  learn::PerceptionModels models;
  const std::string vae_path = p.at("vae");
  if (!vae_path.empty()) {
    models.vae = std::make_shared<const perception::Vae>(perception::Vae::from_checkpoint(nn::Checkpoint::load(vae_path)));
    const std::string pred_path = p.at("predictor");
    if (!pred_path.empty())
      models.predictor = std::make_shared<const perception::Predictor>(
          perception::Predictor::from_checkpoint(nn::Checkpoint::load(pred_path)));
    if (tr.state == perception::StateVariant::kLstm && !models.predictor)
      throw UsageError("variant " + perception::to_string(variant) + " needs --predictor alongside --vae");
  } else {
    learn::PerceptionTrainConfig ptc;
    ptc.dataset.n_frames = p.at("frames");
    ptc.dataset.fov = tr.fov;
    ptc.dataset.seed = derive_seed(tc.seed, 11);
    ptc.vae_train.seed = derive_seed(tc.seed, 12);
    ptc.predictor_train.seed = derive_seed(tc.seed, 13);
    ptc.with_predictor = tr.state == perception::StateVariant::kLstm;
    out << "training perception models on " << ptc.dataset.n_frames << " generated frames\n";
    models = learn::train_perception(learn::scene_list(scenes), ptc);
    out << "VAE held-out MSE " << models.vae_test_mse << " (baseline " << models.baseline_test_mse << ")\n";
  }
  pc.rays = models.vae->config().rays;
  pc.latent = models.vae->latent_dim();

  const int eval_n = p.at("eval_n");
  const auto scenarios = learn::mode_scenarios(scenes);
  learn::TrainHooks hooks;
  if (tc.eval_every > 0 && eval_n > 0) {
    hooks.evaluate = [&](const learn::PolicyBundle& b, std::size_t step) {
      auto actor = std::make_shared<const nn::Mlp>(b.actor);
      perception::PerceptionConfig epc = pc;
      epc.evaluation = true;
      eval::EvalConfig ec;
      ec.n = eval_n;
      ec.seed = derive_seed(tc.seed, 21);
      ec.workers = p.at("workers");
      const auto rep = eval::evaluate_controller(
          "snapshot", [&] { return learn::greedy_policy(actor); },
          [&]() -> std::unique_ptr<sim::StateObserver> {
            return std::make_unique<perception::Pipeline>(epc, models.vae, models.predictor);
          },
          scenarios, scenes, ec);
      out << "step " << step << ": success " << rep.success_rate << " collision " << rep.collision_rate << " timeout "
          << rep.timeout_rate << std::endl;
      return rep.success_rate;
    };
  }
  const std::string id = p.at("id").get<std::string>().empty() ? perception::to_string(variant) : p.at("id").get<std::string>();
  auto run = learn::train_policy(id, pc, models, tc, scenes, std::move(demos), hooks);

  const fs::path dir = prepare_out(p);
  run.package.save(dir, &run.result.best);
  {
    std::ofstream os(dir / "train_log.csv");
    os << learn::kTrainLogHeader << '\n';
    for (const auto& row : run.result.log) learn::write_csv_row(os, row);
  }
  {
    std::ofstream os(dir / "evaluations.csv");
    os << "step,success_rate\n";
    for (const auto& e : run.result.evaluations) os << e.step << ',' << e.score << '\n';
  }
  json resolved = p;
  resolved["td3"] = tc.td3.to_json();
  resolved["train"] = tc.to_json();
  write_json(dir / "config.json", resolved);
  out << "trained " << run.result.steps << " steps over " << run.result.episodes << " episodes; package -> "
      << dir.string() << '\n';
  return kExitOk;
}

int run_rollout(const json& p, std::ostream& out) {
  const auto pkg = learn::PolicyPackage::load(p.at("policy").get<std::string>());
  const std::string demo_path = p.at("demo");
  eval::Scenario sc;
  if (!demo_path.empty()) {
    sc.demo = sim::Demonstration::load(demo_path);
    sc.scene_id = sc.demo->scene_id;
  }
  const std::string scene_arg = p.at("scene");
  const std::string scene_spec = scene_arg.empty() && sc.demo ? sc.scene_id : scene_arg;
  const auto scenes = resolve_scenes(scene_spec);
  if (!sc.demo) {
    if (scenes.size() != 1) throw UsageError("rollout needs a single scene (--scene) or a demonstration (--demo)");
    sc.scene_id = scenes.begin()->first;
    sc.mode = parse_mode(p.at("mode"));
  }
  const auto it = scenes.find(sc.scene_id);
  if (it == scenes.end()) throw Error("unknown scene '" + sc.scene_id + "'");

  Rng rng(p.at("seed").get<std::uint64_t>());
  const sim::EpisodeInit init = eval::scenario_init(sc, it->second, rng);
  auto observer = pkg.make_observer(true);
  const sim::EpisodeRun run = sim::run_episode(pkg.make_policy(), init, it->second, *observer);

  const fs::path dir = prepare_out(p);
  json result = sim::to_json(run.result);
  result["policy_id"] = pkg.id;
  result["scene_id"] = sc.scene_id;
  result["init"] = sim::to_json(init);
  write_json(dir / "rollout.json", result);
  {
    std::ofstream os(dir / "rollout.jsonl");
    sim::write_rollout_log(os, init, run.transitions);
  }
  write_json(dir / "config.json", p);
  out << "outcome " << sim::to_string(run.result.outcome) << " after " << run.result.steps << " steps, return "
      << run.result.return_ << '\n';
  return kExitOk;
}

int run_evaluate(json p, std::ostream& out) {
  const auto policies = p.at("policy").get<std::vector<std::string>>();
  if (policies.empty()) throw UsageError("evaluate needs at least one --policy");
  const auto scenes = resolve_scenes(p.at("scenarios"));
  std::vector<eval::Scenario> scenarios;
  if (!p.at("demo_only").get<bool>()) scenarios = learn::mode_scenarios(scenes, parse_mode(p.at("mode")));
  const std::string demos_path = p.at("demos");
  if (!demos_path.empty()) {
    const auto demos = learn::load_demonstrations(demos_path);
    for (auto& s : learn::demo_scenarios(demos))
      if (scenes.contains(s.scene_id)) scenarios.push_back(std::move(s));
  }
  if (scenarios.empty()) throw UsageError("no scenarios to evaluate");

  eval::EvalConfig ec;
  ec.n = p.at("n");
  ec.seed = p.at("seed");
  ec.workers = p.at("workers");
  ec.resample = p.at("resample");
  ec.phi = p.at("phi");
  if (ec.n <= 0 || ec.workers <= 0) throw UsageError("--n and --workers must be positive");

  eval::EvalReport report;
  std::set<std::string> names;
  for (const auto& path : policies) {
    const auto pkg = learn::PolicyPackage::load(path);
    if (!names.insert(pkg.id).second) throw UsageError("policy id '" + pkg.id + "' given twice");
    report.configurations.push_back(eval::evaluate_controller(
        pkg.id, [&] { return pkg.make_policy(); },
        [&]() -> std::unique_ptr<sim::StateObserver> { return pkg.make_observer(true); }, scenarios, scenes, ec));
  }
  const fs::path dir = prepare_out(p);
  report.write(dir);
  write_json(dir / "config.json", p);
  out << std::fixed << std::setprecision(3);
  for (const auto& c : report.configurations) {
    out << c.name << ": success " << c.success_rate << " collision " << c.collision_rate << " timeout "
        << c.timeout_rate << '\n';
    for (const auto& s : c.scenarios) {
      out << "  " << s.name << ": success " << s.success_rate << " collision " << s.collision_rate << " timeout "
          << s.timeout_rate;
      if (s.f_at_t_star) out << " median f(t*) " << s.f_at_t_star->median;
      out << '\n';
    }
  }
  return kExitOk;
}

int run_frechet(const json& p, std::ostream& out) {
  const auto a = load_points(p.at("a").get<std::string>());
  const auto b = load_points(p.at("b").get<std::string>());
  eval::EndpointMode mode;
  try {
    mode = eval::endpoint_mode_from_string(p.at("mode"));
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  const auto rep = eval::deviation_aware_frechet(a, b, mode, p.at("resample"), p.at("phi"));
  out << std::setprecision(10) << "F_full " << rep.F_full << '\n'
      << "t_star " << rep.t_star << '\n'
      << "f_at_t_star " << rep.f_at_t_star << '\n';
  const std::string curve = p.at("curve");
  if (!curve.empty()) {
    std::ofstream os(curve);
    os << rep.curve_csv();
    if (!os) throw Error("cannot write '" + curve + "'");
  }
  const std::string report = p.at("report");
  if (!report.empty()) write_json(report, rep.to_json());
  return kExitOk;
}

int run_serve(const json& p, std::ostream& out) {
  service::AppConfig cfg;
  cfg.scenes_dir = data_path(p.at("scenes"), "scenes");
  cfg.demos_dir = data_path(p.at("demos"), "demos");
  cfg.policies_dir = data_path(p.at("policies"), "policies");
  service::App app(cfg);
  const std::string host = p.at("host");
  const bool ok = service::serve(app, host, p.at("port"), [&](int port, const service::StopFn&) {
    out << "serving " << app.scenes().size() << " scenes on http://" << host << ':' << port << std::endl;
  });
  if (!ok) throw Error("cannot bind " + host + ":" + std::to_string(p.at("port").get<int>()));
  return kExitOk;
}

}  // namespace

const char* data_root() {
  const char* env = std::getenv("PREFNAV_DATA_DIR");
  return env && *env ? env : PREFNAV_DEFAULT_DATA_DIR;
}

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"prefnav: preference-aware navigation from demonstrations"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "prefnav 0.1.0");

  struct Command {
    CLI::App* app;
    std::unique_ptr<Params> params;
    std::string config;
    std::function<int(const json&)> run;
  };
  std::vector<Command> commands;
  auto add = [&](const std::string& name, const std::string& help) -> Command& {
    Command& c = commands.emplace_back();
    c.app = app.add_subcommand(name, help);
    c.params = std::make_unique<Params>(c.app);
    c.app->add_option("--config", c.config, "JSON file with parameters (flags take precedence)");
    return c;
  };
  commands.reserve(8);

  // Flag storage; outlives parsing.
  std::string scene, out_dir = "out", variant = "vae-ha", dataset, vae, predictor, demos, policy, demo, id;
  std::string a, b, fmode = "auto", curve, report, scenarios, host = "127.0.0.1", scenes_dir, policies_dir;
  std::vector<std::string> policy_list;
  std::uint64_t seed = 1;
  int frames = 50000, rays = 64, latent = 8, epochs_vae = 30, epochs_pred = 20, batch_vae = 128, batch_pred = 64;
  int n = 50, workers = 1, mode = 0, eval_n = 20, port = 8080, scene_rotation = 50;
  std::size_t resample = eval::kDefaultResample, steps = 200000, eval_every = 10000;
  double beta = 3.0, recon_weight = 3200.0, lr_vae = 1e-3, lr_pred = 1e-3, dropout = 0.05;
  double phi = eval::kDefaultPhi, stop_score = 2.0, demo_prob = 0.2;
  bool no_demos = false, demo_only = false;

  {
    auto& c = add("gen-dataset", "Generate a depth-scan dataset with a reactive driver");
    auto& P = *c.params;
    P.option("--scene", "scene", scene, "Scene file, directory or id (default: all scenes in the data root)");
    P.option("--frames", "frames", frames, "Number of frames");
    P.option("--rays", "rays", rays, "Rays per scan");
    P.option("--variant", "variant", variant, "Variant whose field of view is rendered");
    P.option("--seed", "seed", seed, "Random seed");
    P.option("--out", "out", out_dir, "Output directory");
    c.run = [&](const json& p) { return run_gen_dataset(p, out); };
  }
  {
    auto& c = add("train-vae", "Train the scan VAE on a generated dataset");
    auto& P = *c.params;
    P.option("--dataset", "dataset", dataset, "dataset.jsonl from gen-dataset")->required();
    P.option("--epochs", "epochs", epochs_vae, "Training epochs");
    P.option("--batch", "batch", batch_vae, "Minibatch size");
    P.option("--lr", "lr", lr_vae, "Adam learning rate");
    P.option("--beta", "beta", beta, "KL weight");
    P.option("--recon-weight", "recon_weight", recon_weight, "Reconstruction weight");
    P.option("--latent", "latent", latent, "Latent dimension");
    P.option("--dropout", "dropout", dropout, "Ray dropout probability of the denoising input");
    P.option("--seed", "seed", seed, "Random seed");
    P.option("--out", "out", out_dir, "Output directory");
    c.run = [&](const json& p) { return run_train_vae(p, out); };
  }
  {
    auto& c = add("train-predictor", "Train the recurrent latent/pose predictor");
    auto& P = *c.params;
    P.option("--dataset", "dataset", dataset, "dataset.jsonl from gen-dataset")->required();
    P.option("--vae", "vae", vae, "VAE checkpoint")->required();
    P.option("--epochs", "epochs", epochs_pred, "Training epochs");
    P.option("--batch", "batch", batch_pred, "Minibatch size");
    P.option("--lr", "lr", lr_pred, "Adam learning rate");
    P.option("--seed", "seed", seed, "Random seed");
    P.option("--out", "out", out_dir, "Output directory");
    c.run = [&](const json& p) { return run_train_predictor(p, out); };
  }
  {
    auto& c = add("train-policy", "Train a TD3(+BC) navigation policy and write a policy package");
    auto& P = *c.params;
    P.option("--variant", "variant", variant, "vae-ha, vae-hu, vae-nd, lstm-hp, vae-fov-120 or vae-ng");
    P.option("--scene", "scene", scene, "Training scenes: file, directory or id (default: data root scenes)");
    P.option("--demos", "demos", demos, "Demonstration file or directory (default: data root demos)");
    P.flag("--no-demos", "no_demos", no_demos, "Train without demonstrations");
    P.option("--vae", "vae", vae, "Pretrained VAE checkpoint (trained inline when omitted)");
    P.option("--predictor", "predictor", predictor, "Pretrained predictor checkpoint (lstm-hp)");
    P.option("--frames", "frames", frames, "Dataset size for inline perception training");
    P.option("--steps", "steps", steps, "Environment steps including warmup");
    P.option("--eval-every", "eval_every", eval_every, "Snapshot evaluation period in steps (0 disables)");
    P.option("--eval-n", "eval_n", eval_n, "Rollouts per scene in snapshot evaluations");
    P.option("--stop-score", "stop_score", stop_score, "Stop once a snapshot reaches this success rate");
    P.option("--scene-rotation", "scene_rotation", scene_rotation, "Episodes per scene before rotating");
    P.option("--demo-scenario-prob", "demo_scenario_prob", demo_prob, "Share of episodes replaying a demo setup");
    P.option("--workers", "workers", workers, "Worker threads for snapshot evaluations");
    P.option("--id", "id", id, "Policy id (default: variant name)");
    P.option("--seed", "seed", seed, "Random seed");
    P.option("--out", "out", out_dir, "Output directory (policy package)");
    P.nested("td3", learn::TD3Config{}.to_json());
    P.nested("lambda_bc", nullptr);
    c.run = [&](const json& p) { return run_train_policy(p, out); };
  }
  {
    auto& c = add("rollout", "Run one seeded episode with a policy package");
    auto& P = *c.params;
    P.option("--policy", "policy", policy, "Policy package directory")->required();
    P.option("--scene", "scene", scene, "Scene file or id");
    P.option("--demo", "demo", demo, "Replay the start, goal and human of this demonstration");
    P.option("--mode", "mode", mode, "Human mode 1-4 (0: drawn from all)");
    P.option("--seed", "seed", seed, "Random seed");
    P.option("--out", "out", out_dir, "Output directory");
    c.run = [&](const json& p) { return run_rollout(p, out); };
  }
  {
    auto& c = add("evaluate", "Seeded batch evaluation of policy packages");
    auto& P = *c.params;
    P.option("--policy", "policy", policy_list, "Policy package directory (repeatable)")->required();
    P.option("--scenarios,--scene", "scenarios", scenarios, "Scene file, directory or id (default: data root scenes)");
    P.option("--demos", "demos", demos, "Also evaluate on these demonstration scenarios");
    P.flag("--demo-only", "demo_only", demo_only, "Skip the sampled scenarios");
    P.option("--mode", "mode", mode, "Human mode 1-4 (0: drawn from all)");
    P.option("--n", "n", n, "Rollouts per scenario");
    P.option("--workers", "workers", workers, "Worker threads");
    P.option("--resample", "resample", resample, "Frechet resampling density (0: raw vertices)");
    P.option("--phi", "phi", phi, "Deviation-point direction angle");
    P.option("--seed", "seed", seed, "Random seed");
    P.option("--out", "out", out_dir, "Output directory");
    c.run = [&](const json& p) { return run_evaluate(p, out); };
  }
  {
    auto& c = add("frechet", "Deviation-aware Frechet analysis of two trajectories");
    auto& P = *c.params;
    P.option("--a", "a", a, "Trajectory A (rollout.json, demonstration or point array)")->required();
    P.option("--b", "b", b, "Trajectory B")->required();
    P.option("--mode", "mode", fmode, "Endpoint alignment: auto, forward or reversed");
    P.option("--resample", "resample", resample, "Points per curve (0: raw vertices)");
    P.option("--phi", "phi", phi, "Deviation-point direction angle");
    P.option("--curve", "curve", curve, "Write the partial-distance curve as CSV");
    P.option("--report", "report", report, "Write the full report as JSON");
    c.run = [&](const json& p) { return run_frechet(p, out); };
  }
  {
    auto& c = add("serve", "Local HTTP service for demonstration authoring");
    auto& P = *c.params;
    P.option("--host", "host", host, "Bind address");
    P.option("--port", "port", port, "Port (0: any free port)");
    P.option("--scenes", "scenes", scenes_dir, "Scene directory (default: data root scenes)");
    P.option("--demos", "demos", demos, "Demonstration store (default: data root demos)");
    P.option("--policies", "policies", policies_dir, "Policy package directory (default: data root policies)");
    c.run = [&](const json& p) { return run_serve(p, out); };
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }
  try {
    for (auto& c : commands) {
      if (!c.app->parsed()) continue;
      const json p = c.params->resolve(c.config);
      return c.run(p);
    }
    return kExitUsage;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

}  // namespace prefnav::cli
