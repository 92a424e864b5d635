#pragma once
/**
 * @file  evaluate.hpp
 * @brief Seeded batch evaluation of a controller over scenarios.
 *
 * Rollout k of scenario s is seeded from (seed, s, k) only, so reports do
 * not depend on the number of workers. Each worker owns its observer and
 * policy closure; models are shared read-only.
 */

#include <prefnav/eval/frechet.hpp>
#include <prefnav/sim/demo.hpp>
#include <prefnav/sim/world.hpp>

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>

namespace prefnav::eval {

/// One evaluation setting: a scene plus either a sampled human mode
/// (modes 1-4, all of them when `mode` is empty) or a demonstration whose
/// start, goal and human track are replayed.
struct Scenario {
  std::string name;
  std::string scene_id;
  std::optional<sim::HumanMode> mode;
  std::optional<sim::Demonstration> demo;
};

struct EvalConfig {
  int n = 50;
  std::uint64_t seed = 1;
  int workers = 1;
  std::size_t resample = kDefaultResample;
  double phi = kDefaultPhi;
};

struct Quantiles {
  double q1 = 0.0, median = 0.0, q3 = 0.0;
  [[nodiscard]] double iqr() const noexcept { return q3 - q1; }
};

/// Linear-interpolation quartiles. Throws Error on empty input.
[[nodiscard]] Quantiles quartiles(std::vector<double> values);

struct RolloutRecord {
  sim::Outcome outcome = sim::Outcome::kTimeout;
  int steps = 0;
  double return_ = 0.0;
  std::optional<FrechetReport> frechet;  // demo scenarios only
};

struct ScenarioReport {
  std::string name;
  std::string scene_id;
  int n = 0;
  double success_rate = 0.0;
  double collision_rate = 0.0;
  double timeout_rate = 0.0;
  std::vector<RolloutRecord> rollouts;
  std::optional<Quantiles> f_at_t_star;
  std::optional<Quantiles> t_star;
  std::optional<Quantiles> F_full;
};

struct ConfigReport {
  std::string name;
  std::vector<ScenarioReport> scenarios;
  double success_rate = 0.0;
  double collision_rate = 0.0;
  double timeout_rate = 0.0;
};

struct EvalReport {
  std::vector<ConfigReport> configurations;
  [[nodiscard]] nlohmann::json to_json() const;
  [[nodiscard]] std::string rates_csv() const;
  /// Writes eval_report.json and eval_rates.csv into `dir`.
  void write(const std::filesystem::path& dir) const;
};

using PolicyFactory = std::function<sim::Policy()>;
using ObserverFactory = std::function<std::unique_ptr<sim::StateObserver>()>;

/// Episode setup for rollout `k` of a scenario, drawn from `rng`.
[[nodiscard]] sim::EpisodeInit scenario_init(const Scenario& sc, const geom::Scene& scene, Rng& rng);

[[nodiscard]] ConfigReport evaluate_controller(const std::string& name, const PolicyFactory& make_policy,
                                               const ObserverFactory& make_observer,
                                               std::span<const Scenario> scenarios,
                                               const std::map<std::string, geom::Scene>& scenes,
                                               const EvalConfig& cfg);

}  // namespace prefnav::eval
