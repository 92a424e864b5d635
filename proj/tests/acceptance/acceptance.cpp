// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 when any
// selected criterion fails. `--only a,b` restricts the run.

#include "fixtures.hpp"
#include "frechet_oracle.hpp"
#include "gradchecks.hpp"

#include <prefnav/eval/evaluate.hpp>
#include <prefnav/learn/workflow.hpp>
#include <prefnav/perception/pipeline.hpp>
#include <prefnav/sim/demo.hpp>
#include <prefnav/sim/io.hpp>

#include <CLI11.hpp>

#include <chrono>
#include <iomanip>
#include <iostream>
#include <sstream>

using namespace prefnav;
using Clock = std::chrono::steady_clock;

namespace {

// Pinned tolerances and budgets.
constexpr double kExact = 1e-12;
constexpr double kGradTol = 1e-4;
constexpr double kOnsetTol = 0.05;
constexpr double kRecoveryRate = 0.90;
constexpr double kVaeRatio = 0.25;
constexpr double kDropout = 0.05;
constexpr int kDatasetFrames = 50000;
constexpr std::size_t kTrainSteps = 200000;
constexpr double kSuccessTarget = 0.90;
constexpr int kEndToEndEpisodes = 100;
constexpr int kPreferenceRolloutsPerDemo = 10;  // 3 demonstrations -> 30 rollouts
constexpr int kPartitionRollouts = 50;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, int precision = 4) {
  std::ostringstream os;
  os << std::setprecision(precision) << v;
  return os.str();
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

// Shared, lazily built artefacts of the learning criteria.
class Workbench {
 public:
  const learn::SceneMap& scenes() {
    if (scenes_.empty())
      for (const char* id : {"two_rooms_a", "two_rooms_b"})
        scenes_.emplace(id, geom::Scene::load(test::data_dir() / "scenes" / (std::string(id) + ".json")));
    return scenes_;
  }

  const std::vector<sim::Demonstration>& demos() {
    if (demos_.empty()) demos_ = learn::load_demonstrations(test::data_dir() / "demos");
    return demos_;
  }

  const std::vector<perception::DatasetRecord>& dataset() {
    if (records_.empty()) {
      perception::DatasetConfig dc;
      dc.n_frames = kDatasetFrames;
      dc.seed = 101;
      records_ = perception::generate_dataset(learn::scene_list(scenes()), dc);
      for (const auto& r : records_) (perception::is_test_episode(r.episode) ? test_ : train_).push_back(r);
    }
    return records_;
  }
  const std::vector<perception::DatasetRecord>& train_split() { return (void)dataset(), train_; }
  const std::vector<perception::DatasetRecord>& test_split() { return (void)dataset(), test_; }

  std::shared_ptr<const perception::Vae> vae() {
    if (!vae_) {
      Rng rng(102);
      auto v = std::make_shared<perception::Vae>(perception::VaeConfig{}, rng);
      perception::VaeTrainConfig tc;
      tc.seed = 103;
      (void)perception::train_vae(*v, perception::scan_matrix(train_split()), tc);
      vae_ = v;
    }
    return vae_;
  }

  const learn::PolicyRun& policy(const std::string& variant) {
    auto it = policies_.find(variant);
    if (it != policies_.end()) return it->second;
    perception::PerceptionConfig pc;
    pc.variant = perception::variant_from_string(variant);
    learn::PerceptionModels models;
    models.vae = vae();
    learn::TrainConfig tc;
    tc.total_steps = kTrainSteps;
    tc.seed = 104;
    learn::TrainHooks hooks;
    hooks.evaluate = [&](const learn::PolicyBundle& b, std::size_t step) {
      auto actor = std::make_shared<const nn::Mlp>(b.actor);
      eval::EvalConfig ec;
      ec.n = 20;
      ec.seed = 105;
      const auto rep = eval::evaluate_controller(
          "snapshot", [&] { return learn::greedy_policy(actor); }, observer_factory(variant),
          learn::mode_scenarios(scenes()), scenes(), ec);
      std::cerr << "  [" << variant << "] step " << step << " snapshot success " << rep.success_rate << std::endl;
      return rep.success_rate;
    };
    const auto t0 = Clock::now();
    auto run = learn::train_policy(variant, pc, models, tc, scenes(), pc.variant == perception::Variant::kVaeNd
                                                                      ? std::vector<sim::Demonstration>{}
                                                                      : demos(),
                                   hooks);
    std::cerr << "  [" << variant << "] trained " << run.result.steps << " steps in " << fmt(seconds_since(t0))
              << " s, best snapshot " << run.result.best_score << " at step " << run.result.best_step << std::endl;
    return policies_.emplace(variant, std::move(run)).first->second;
  }

  eval::ObserverFactory observer_factory(const std::string& variant) {
    perception::PerceptionConfig pc;
    pc.variant = perception::variant_from_string(variant);
    pc.evaluation = true;
    auto v = vae();
    return [pc, v]() -> std::unique_ptr<sim::StateObserver> { return std::make_unique<perception::Pipeline>(pc, v); };
  }

 private:
  learn::SceneMap scenes_;
  std::vector<sim::Demonstration> demos_;
  std::vector<perception::DatasetRecord> records_, train_, test_;
  std::shared_ptr<const perception::Vae> vae_;
  std::map<std::string, learn::PolicyRun> policies_;
};

Outcome frechet_oracle(Workbench&) {
  const auto t0 = Clock::now();
  Rng rng(201);
  double worst = 0.0;
  for (int i = 0; i < 500; ++i) {
    const auto a = test::random_polyline(rng, 1 + rng() % 8);
    const auto b = test::random_polyline(rng, 1 + rng() % 8);
    worst = std::max(worst, std::abs(eval::discrete_frechet(a, b, 0) - test::brute_force_frechet(a, b)));
  }
  const double secs = seconds_since(t0);
  return {worst <= kExact && secs < 10.0,
          "500 pairs, max |DP - exhaustive| " + fmt(worst) + " (tol 1e-12), " + fmt(secs, 3) + " s (< 10 s)"};
}

Outcome prefix_monotone(Workbench&) {
  Rng rng(202);
  int violations = 0;
  double worst_end = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const auto a = test::random_polyline(rng, 2 + rng() % 30);
    const auto b = test::random_polyline(rng, 2 + rng() % 30);
    const auto c = eval::partial_frechet_curve(a, b);
    for (std::size_t k = 1; k < c.f.size(); ++k) violations += c.f[k] < c.f[k - 1];
    worst_end = std::max(worst_end, std::abs(c.f.back() - eval::discrete_frechet(a, b)));
  }
  return {violations == 0 && worst_end <= kExact,
          "1000 pairs, " + std::to_string(violations) + " decreasing steps, max |f(1) - F| " + fmt(worst_end) +
              " (tol 1e-12)"};
}

Outcome deviation_recovery(Workbench&) {
  const auto t0 = Clock::now();
  Rng rng(203);
  const double onsets[] = {0.3, 0.5, 0.7, 0.9};
  int hits = 0;
  std::ostringstream per;
  for (double onset : onsets) {
    int h = 0;
    for (int i = 0; i < 25; ++i) {
      const auto p = test::make_deviation_pair(rng, onset);
      h += std::abs(eval::deviation_point(eval::partial_frechet_curve(p.rollout, p.demo)) - onset) <= kOnsetTol;
    }
    per << " t0=" << onset << ":" << h << "/25";
    hits += h;
  }
  const double secs = seconds_since(t0);
  return {hits >= kRecoveryRate * 100 && secs < 30.0,
          std::to_string(hits) + "/100 within +-0.05 (need >= 90)" + per.str() + ", " + fmt(secs, 3) + " s (< 30 s)"};
}

Outcome gradients(Workbench&) {
  std::vector<test::GradReport> all;
  for (auto&& group : {test::td3_gradchecks(204), test::vae_gradchecks(205), test::predictor_gradchecks(206)})
    all.insert(all.end(), group.begin(), group.end());
  bool ok = true;
  std::ostringstream os;
  for (const auto& r : all) {
    ok = ok && r.result.max_rel_error < kGradTol;
    os << (os.tellp() > 0 ? ", " : "") << r.name << " " << fmt(r.result.max_rel_error, 2);
  }
  return {ok, "max relative error (tol 1e-4): " + os.str()};
}

Outcome reward_accounting(Workbench& wb) {
  const double gamma = sim::Limits::kGamma;
  const auto forward = [gamma](const std::vector<double>& r) {
    double g = 1.0, sum = 0.0;
    for (double x : r) {
      sum += g * x;
      g *= gamma;
    }
    return sum;
  };
  double worst = 0.0;
  int bad_rewards = 0;
  std::map<sim::Outcome, int> outcomes;
  Rng rng(207);
  const auto& scenes = wb.scenes();
  for (int i = 0; i < 200; ++i) {
    const auto& scene = std::next(scenes.begin(), i % 2)->second;
    const auto init = sim::sample_episode(scene, rng);
    Rng prng(derive_seed(207, static_cast<std::uint64_t>(i)));
    // Alternate a random walker with a goal seeker so every outcome occurs.
    const sim::Policy policy = i % 2 == 0 ? sim::Policy([&](const Eigen::VectorXd&) {
      return sim::Action(uniform(prng, 0, 0.5), uniform(prng, -geom::kPi, geom::kPi));
    })
                                          : sim::Policy(test::steer_to_goal);
    test::PoseObserver obs;
    const auto run = sim::run_episode(policy, init, scene, obs);
    std::vector<double> r;
    for (const auto& t : run.transitions) r.push_back(t.r);
    worst = std::max(worst, std::abs(run.result.return_ - forward(r)));
    ++outcomes[run.result.outcome];
    const double terminal = run.result.outcome == sim::Outcome::kSuccess     ? 5.0
                            : run.result.outcome == sim::Outcome::kCollision ? -5.0
                                                                             : -2.5;
    for (std::size_t k = 0; k + 1 < r.size(); ++k) bad_rewards += r[k] != 0.0;
    bad_rewards += r.back() != terminal;
  }
  // Demonstration transitions: +0.1 per step, +10 + 0.1 at the goal.
  for (const auto& d : wb.demos()) {
    test::PoseObserver obs;
    const auto rep = sim::demo_to_transitions(d, wb.scenes().at(d.scene_id), obs);
    for (std::size_t k = 0; k < rep.transitions.size(); ++k) {
      const double expected = k + 1 == rep.transitions.size() ? 10.0 + 0.1 : 0.1;
      bad_rewards += std::abs(rep.transitions[k].r - expected) > kExact;
    }
  }
  const bool all_outcomes = outcomes.size() == 3;
  return {worst <= kExact && bad_rewards == 0 && all_outcomes,
          "200 episodes (" + std::to_string(outcomes[sim::Outcome::kSuccess]) + " goal, " +
              std::to_string(outcomes[sim::Outcome::kCollision]) + " collision, " +
              std::to_string(outcomes[sim::Outcome::kTimeout]) + " timeout), max |return - forward sum| " +
              fmt(worst) + " (tol 1e-12), " + std::to_string(bad_rewards) + " off-table rewards incl. 3 demos"};
}

Outcome vae_quality(Workbench& wb) {
  const auto t0 = Clock::now();
  const auto vae = wb.vae();
  const nn::Matrix train = perception::scan_matrix(wb.train_split());
  const nn::Matrix test = perception::scan_matrix(wb.test_split());
  const double baseline = perception::mean_scan_baseline_mse(train, test);
  const double clean = perception::reconstruction_mse(*vae, test, test);
  Rng rng(208);
  const double noisy = perception::reconstruction_mse(*vae, test, perception::corrupt_columns(test, kDropout, rng));
  const double r1 = clean / baseline, r2 = noisy / baseline;
  return {r1 < kVaeRatio && r2 < kVaeRatio,
          std::to_string(kDatasetFrames) + " frames, held-out MSE / mean baseline " + fmt(r1, 3) + " clean, " +
              fmt(r2, 3) + " under 5% dropout (need < 0.25), " + fmt(seconds_since(t0), 4) + " s"};
}

Outcome predictor_quality(Workbench& wb) {
  const auto vae = wb.vae();
  const auto train = perception::predictor_windows(wb.train_split(), *vae);
  const auto test = perception::predictor_windows(wb.test_split(), *vae, perception::WindowFilter::kDynamicHuman);
  Rng rng(209);
  perception::Predictor model(perception::PredictorConfig{}, rng);
  perception::PredictorTrainConfig tc;
  tc.seed = 210;
  (void)perception::train_predictor(model, train, tc);
  const auto mean = model.loss(test, nn::Matrix::Zero(vae->latent_dim(), test.size()));
  const auto base = perception::copy_last_loss(test);
  return {mean.total < base.total,
          std::to_string(test.size()) + " dynamic-human test windows, loss " + fmt(mean.total) + " (latent " +
              fmt(mean.latent) + ", pose " + fmt(mean.pose) + ") vs copy-last " + fmt(base.total) + " (latent " +
              fmt(base.latent) + ", pose " + fmt(base.pose) + ")"};
}

Outcome end_to_end(Workbench& wb) {
  const auto t0 = Clock::now();
  const auto& run = wb.policy("vae-ha");
  const double train_secs = seconds_since(t0);
  auto actor = run.package.actor;
  eval::EvalConfig ec;
  ec.n = kEndToEndEpisodes / static_cast<int>(wb.scenes().size());
  ec.seed = 211;
  const auto rep = eval::evaluate_controller("vae-ha", [&] { return learn::greedy_policy(actor); },
                                             wb.observer_factory("vae-ha"), learn::mode_scenarios(wb.scenes()),
                                             wb.scenes(), ec);
  return {rep.success_rate >= kSuccessTarget && run.result.steps <= kTrainSteps,
          "success " + fmt(rep.success_rate, 3) + " (collision " + fmt(rep.collision_rate, 3) + ", timeout " +
              fmt(rep.timeout_rate, 3) + ") over " + std::to_string(kEndToEndEpisodes) +
              " episodes, modes 1-4, need >= 0.90; " + std::to_string(run.result.steps) + " env steps, " +
              fmt(train_secs / 60.0, 3) + " min training"};
}

double median_f(const eval::ConfigReport& rep, std::size_t& count) {
  std::vector<double> f;
  for (const auto& s : rep.scenarios)
    for (const auto& r : s.rollouts)
      if (r.frechet) f.push_back(r.frechet->f_at_t_star);
  count = f.size();
  return eval::quartiles(f).median;
}

Outcome preference_ordering(Workbench& wb) {
  const auto scenarios = learn::demo_scenarios(wb.demos());
  eval::EvalConfig ec;
  ec.n = kPreferenceRolloutsPerDemo;
  ec.seed = 212;
  std::map<std::string, double> med;
  std::size_t counts[2] = {0, 0};
  int k = 0;
  for (const char* variant : {"vae-ha", "vae-nd"}) {
    auto actor = wb.policy(variant).package.actor;
    const auto rep = eval::evaluate_controller(variant, [&] { return learn::greedy_policy(actor); },
                                               wb.observer_factory(variant), scenarios, wb.scenes(), ec);
    med[variant] = median_f(rep, counts[k++]);
  }
  return {med["vae-ha"] < med["vae-nd"] && counts[0] >= 30 && counts[1] >= 30,
          "median f(t*) demo-trained " + fmt(med["vae-ha"]) + " vs no-demo " + fmt(med["vae-nd"]) + " over " +
              std::to_string(counts[0]) + " / " + std::to_string(counts[1]) + " rollouts on 3 demo scenarios"};
}

/// Untrained perception package: exercises the full observer without training.
struct RandomController {
  std::shared_ptr<const perception::Vae> vae;
  std::shared_ptr<const nn::Mlp> actor;
  explicit RandomController(std::uint64_t seed) {
    Rng rng(seed);
    vae = std::make_shared<const perception::Vae>(perception::VaeConfig{}, rng);
    learn::TD3Config td3;
    actor = std::make_shared<const nn::Mlp>(learn::PolicyBundle(13, td3, rng).actor);
  }
  eval::PolicyFactory policy() const {
    return [a = actor] { return learn::greedy_policy(a); };
  }
  eval::ObserverFactory observer() const {
    return [v = vae]() -> std::unique_ptr<sim::StateObserver> {
      perception::PerceptionConfig pc;
      pc.evaluation = true;
      return std::make_unique<perception::Pipeline>(pc, v);
    };
  }
};

Outcome rate_partition(Workbench& wb) {
  learn::SceneMap scenes = learn::load_scenes(test::data_dir() / "scenes");
  std::vector<eval::Scenario> scenarios;
  for (const auto& [id, s] : scenes)
    for (int m = 1; m <= 4; ++m)
      scenarios.push_back({id + "-mode" + std::to_string(m), id, static_cast<sim::HumanMode>(m), std::nullopt});
  for (const auto& d : learn::demo_scenarios(wb.demos())) scenarios.push_back(d);
  const RandomController random(213);
  eval::EvalConfig ec;
  ec.n = kPartitionRollouts;
  ec.seed = 214;
  std::vector<eval::ConfigReport> reps;
  reps.push_back(eval::evaluate_controller(
      "steer", [] { return sim::Policy(test::steer_to_goal); },
      [] { return std::make_unique<test::PoseObserver>(); }, scenarios, scenes, ec));
  reps.push_back(eval::evaluate_controller("random-actor", random.policy(), random.observer(), scenarios, scenes, ec));
  double worst = 0.0;
  int groups = 0;
  bool sizes = true;
  for (const auto& rep : reps) {
    worst = std::max(worst, std::abs(rep.success_rate + rep.collision_rate + rep.timeout_rate - 1.0));
    ++groups;
    for (const auto& s : rep.scenarios) {
      worst = std::max(worst, std::abs(s.success_rate + s.collision_rate + s.timeout_rate - 1.0));
      sizes = sizes && s.n == kPartitionRollouts && s.rollouts.size() == kPartitionRollouts;
      ++groups;
    }
  }
  return {worst <= kExact && sizes,
          std::to_string(groups) + " configuration/scenario groups of 50 rollouts, max |sum - 1| " + fmt(worst) +
              " (tol 1e-12)"};
}

Outcome determinism(Workbench& wb) {
  const auto& scene = wb.scenes().at("two_rooms_a");
  const RandomController random(215);
  // Rollout logs: same seed twice, fresh observers.
  auto log = [&](std::uint64_t seed) {
    Rng rng(seed);
    auto init = sim::sample_episode(scene, rng);
    init.seed = seed;
    auto obs = random.observer()();
    const auto run = sim::run_episode(random.policy()(), init, scene, *obs);
    std::ostringstream os;
    sim::write_rollout_log(os, init, run.transitions);
    os << sim::to_json(run.result).dump();
    return os.str();
  };
  const bool logs = log(31) == log(31) && log(31) != log(32);
  // Evaluation reports, including demo scenarios and worker counts 1 and 2.
  auto scenarios = learn::mode_scenarios(wb.scenes());
  for (const auto& d : learn::demo_scenarios(wb.demos())) scenarios.push_back(d);
  auto report = [&](int workers) {
    eval::EvalConfig ec;
    ec.n = 8;
    ec.seed = 216;
    ec.workers = workers;
    eval::EvalReport rep;
    rep.configurations.push_back(
        eval::evaluate_controller("random", random.policy(), random.observer(), scenarios, wb.scenes(), ec));
    return rep.to_json().dump() + rep.rates_csv();
  };
  const std::string r1 = report(1);
  const bool reports = r1 == report(1) && r1 == report(2);
  return {logs && reports, std::string("rollout logs ") + (logs ? "identical" : "differ") + ", evaluation reports " +
                               (reports ? "identical" : "differ") + " (workers 1 and 2)"};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, Outcome (*)(Workbench&)>> criteria{
      {"frechet_oracle", frechet_oracle},       {"prefix_monotone", prefix_monotone},
      {"deviation_recovery", deviation_recovery}, {"gradients", gradients},
      {"reward_accounting", reward_accounting}, {"vae_quality", vae_quality},
      {"predictor_quality", predictor_quality}, {"end_to_end", end_to_end},
      {"preference_ordering", preference_ordering}, {"rate_partition", rate_partition},
      {"determinism", determinism}};

  CLI::App app{"prefnav acceptance suite"};
  std::vector<std::string> only;
  bool list = false;
  app.add_option("--only", only, "Run only these criteria")->delimiter(',');
  app.add_flag("--list", list, "List criterion names");
  CLI11_PARSE(app, argc, argv);
  if (list) {
    for (const auto& [name, fn] : criteria) std::cout << name << '\n';
    return 0;
  }
  for (const auto& name : only)
    if (std::none_of(criteria.begin(), criteria.end(), [&](const auto& c) { return c.first == name; })) {
      std::cerr << "unknown criterion '" << name << "'\n";
      return 2;
    }

  Workbench wb;
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), name) == only.end()) continue;
    Outcome o;
    try {
      o = fn(wb);
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
