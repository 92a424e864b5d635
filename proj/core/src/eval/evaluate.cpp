#include <prefnav/eval/evaluate.hpp>

#include <prefnav/error.hpp>

#include <algorithm>
#include <atomic>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

namespace prefnav::eval {

using nlohmann::json;

Quantiles quartiles(std::vector<double> v) {
  if (v.empty()) throw Error("quartiles of an empty sample");
  std::sort(v.begin(), v.end());
  const auto at = [&v](double q) {
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
  };
  return {at(0.25), at(0.5), at(0.75)};
}

namespace {

json quartiles_json(const std::optional<Quantiles>& q) {
  if (!q) return nullptr;
  return {{"q1", q->q1}, {"median", q->median}, {"q3", q->q3}, {"iqr", q->iqr()}};
}

}  // namespace

json EvalReport::to_json() const {
  json configs = json::array();
  for (const auto& c : configurations) {
    json scenarios = json::array();
    for (const auto& s : c.scenarios) {
      json rollouts = json::array();
      for (const auto& r : s.rollouts) {
        json jr = {{"outcome", sim::to_string(r.outcome)}, {"steps", r.steps}, {"return", r.return_}};
        if (r.frechet) {
          jr["F_full"] = r.frechet->F_full;
          jr["t_star"] = r.frechet->t_star;
          jr["f_at_t_star"] = r.frechet->f_at_t_star;
          jr["reversed"] = r.frechet->reversed;
        }
        rollouts.push_back(std::move(jr));
      }
      scenarios.push_back({{"name", s.name},
                           {"scene_id", s.scene_id},
                           {"n", s.n},
                           {"success_rate", s.success_rate},
                           {"collision_rate", s.collision_rate},
                           {"timeout_rate", s.timeout_rate},
                           {"f_at_t_star", quartiles_json(s.f_at_t_star)},
                           {"t_star", quartiles_json(s.t_star)},
                           {"F_full", quartiles_json(s.F_full)},
                           {"rollouts", std::move(rollouts)}});
    }
    configs.push_back({{"name", c.name},
                       {"success_rate", c.success_rate},
                       {"collision_rate", c.collision_rate},
                       {"timeout_rate", c.timeout_rate},
                       {"scenarios", std::move(scenarios)}});
  }
  return {{"configurations", std::move(configs)}};
}

std::string EvalReport::rates_csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "configuration,scenario,scene_id,n,success_rate,collision_rate,timeout_rate,median_f_at_t_star\n";
  for (const auto& c : configurations)
    for (const auto& s : c.scenarios) {
      os << c.name << ',' << s.name << ',' << s.scene_id << ',' << s.n << ',' << s.success_rate << ','
         << s.collision_rate << ',' << s.timeout_rate << ',';
      if (s.f_at_t_star) os << s.f_at_t_star->median;
      os << '\n';
    }
  return os.str();
}

void EvalReport::write(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  std::ofstream js(dir / "eval_report.json");
  js << to_json().dump(2) << '\n';
  std::ofstream csv(dir / "eval_rates.csv");
  csv << rates_csv();
  if (!js || !csv) throw Error("failed writing evaluation report to '" + dir.string() + "'");
}

sim::EpisodeInit scenario_init(const Scenario& sc, const geom::Scene& scene, Rng& rng) {
  sim::EpisodeInit init;
  if (sc.demo) {
    init = sim::demo_scenario_init(*sc.demo, scene, rng);
  } else {
    sim::ModeWeights w;
    if (sc.mode) {
      const int m = static_cast<int>(*sc.mode);
      if (m < 1 || m > 4) throw Error("scenario '" + sc.name + "': sampled scenarios take human modes 1-4");
      w.w = {0.0, 0.0, 0.0, 0.0};
      w.w[static_cast<std::size_t>(m - 1)] = 1.0;
    }
    init = sim::sample_episode(scene, rng, w);
  }
  init.seed = rng();
  return init;
}

namespace {

ScenarioReport summarise(const Scenario& sc, std::vector<RolloutRecord> rollouts) {
  ScenarioReport r;
  r.name = sc.name;
  r.scene_id = sc.scene_id;
  r.n = static_cast<int>(rollouts.size());
  int succ = 0, coll = 0, tout = 0;
  std::vector<double> f, t, F;
  for (const auto& x : rollouts) {
    succ += x.outcome == sim::Outcome::kSuccess;
    coll += x.outcome == sim::Outcome::kCollision;
    tout += x.outcome == sim::Outcome::kTimeout;
    if (x.frechet) {
      f.push_back(x.frechet->f_at_t_star);
      t.push_back(x.frechet->t_star);
      F.push_back(x.frechet->F_full);
    }
  }
  if (r.n > 0) {
    r.success_rate = static_cast<double>(succ) / r.n;
    r.collision_rate = static_cast<double>(coll) / r.n;
    r.timeout_rate = static_cast<double>(tout) / r.n;
  }
  if (!f.empty()) {
    r.f_at_t_star = quartiles(f);
    r.t_star = quartiles(t);
    r.F_full = quartiles(F);
  }
  r.rollouts = std::move(rollouts);
  return r;
}

}  // namespace

ConfigReport evaluate_controller(const std::string& name, const PolicyFactory& make_policy,
                                 const ObserverFactory& make_observer, std::span<const Scenario> scenarios,
                                 const std::map<std::string, geom::Scene>& scenes, const EvalConfig& cfg) {
  if (cfg.n <= 0) throw Error("evaluation needs at least one rollout per scenario");
  struct Job {
    std::size_t scenario;
    int k;
  };
  std::vector<const geom::Scene*> scene_of;
  for (const auto& sc : scenarios) {
    const auto it = scenes.find(sc.scene_id);
    if (it == scenes.end()) throw Error("scenario '" + sc.name + "' references unknown scene '" + sc.scene_id + "'");
    scene_of.push_back(&it->second);
  }
  std::vector<Job> jobs;
  for (std::size_t s = 0; s < scenarios.size(); ++s)
    for (int k = 0; k < cfg.n; ++k) jobs.push_back({s, k});
  std::vector<RolloutRecord> out(jobs.size());

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  const auto worker = [&]() {
    try {
      const sim::Policy policy = make_policy();
      const std::unique_ptr<sim::StateObserver> observer = make_observer();
      for (std::size_t j = next++; j < jobs.size(); j = next++) {
        const Scenario& sc = scenarios[jobs[j].scenario];
        const geom::Scene& scene = *scene_of[jobs[j].scenario];
        Rng rng(derive_seed(derive_seed(cfg.seed, jobs[j].scenario), static_cast<std::uint64_t>(jobs[j].k)));
        const sim::EpisodeInit init = scenario_init(sc, scene, rng);
        const sim::EpisodeRun run = sim::run_episode(policy, init, scene, *observer);
        RolloutRecord rec{run.result.outcome, run.result.steps, run.result.return_, std::nullopt};
        if (sc.demo) {
          const auto rollout = run.result.robot_traj.points();
          const auto demo_pts = sc.demo->robot_points();
          if (geom::polyline_length(rollout) > 0.0)
            rec.frechet = deviation_aware_frechet(rollout, demo_pts, EndpointMode::kAuto, cfg.resample, cfg.phi);
        }
        out[j] = std::move(rec);
      }
    } catch (...) {
      std::lock_guard lock(failure_mu);
      if (!failure) failure = std::current_exception();
      next = jobs.size();
    }
  };
  const int workers = std::max(1, std::min<int>(cfg.workers, static_cast<int>(jobs.size())));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  ConfigReport rep;
  rep.name = name;
  int total = 0, succ = 0, coll = 0, tout = 0;
  for (std::size_t s = 0; s < scenarios.size(); ++s) {
    std::vector<RolloutRecord> mine(out.begin() + static_cast<std::ptrdiff_t>(s * static_cast<std::size_t>(cfg.n)),
                                    out.begin() + static_cast<std::ptrdiff_t>((s + 1) * static_cast<std::size_t>(cfg.n)));
    rep.scenarios.push_back(summarise(scenarios[s], std::move(mine)));
    for (const auto& x : rep.scenarios.back().rollouts) {
      succ += x.outcome == sim::Outcome::kSuccess;
      coll += x.outcome == sim::Outcome::kCollision;
      tout += x.outcome == sim::Outcome::kTimeout;
      ++total;
    }
  }
  if (total > 0) {
    rep.success_rate = static_cast<double>(succ) / total;
    rep.collision_rate = static_cast<double>(coll) / total;
    rep.timeout_rate = static_cast<double>(tout) / total;
  }
  return rep;
}

}  // namespace prefnav::eval
