#include <prefnav/perception/dataset.hpp>

#include <prefnav/error.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

namespace prefnav::perception {

using nlohmann::json;

json DatasetRecord::to_json() const {
  return {{"scan", std::vector<double>(scan.data(), scan.data() + scan.size())},
          {"k_H", human.k_H},
          {"d_H", human.d_H},
          {"dalpha_H", human.dalpha_H},
          {"action", {action.v, action.omega}},
          {"scene_id", scene_id},
          {"t", t},
          {"episode", episode},
          {"human_mode", sim::to_string(human_mode)}};
}

DatasetRecord DatasetRecord::from_json(const json& j) {
  DatasetRecord r;
  const auto scan = j.at("scan").get<std::vector<double>>();
  r.scan = Eigen::Map<const Eigen::VectorXd>(scan.data(), static_cast<Eigen::Index>(scan.size()));
  r.human = {j.at("k_H").get<int>(), j.at("d_H").get<double>(), j.at("dalpha_H").get<double>()};
  if (r.human.k_H != 0 && r.human.k_H != 1) throw Error("dataset record: k_H must be 0 or 1");
  const auto a = j.at("action").get<std::vector<double>>();
  if (a.size() != 2) throw Error("dataset record: action must be [v, omega]");
  r.action = sim::Action(a[0], a[1]);
  r.scene_id = j.at("scene_id").get<std::string>();
  r.t = j.at("t").get<double>();
  r.episode = j.value("episode", 0);
  r.human_mode = sim::human_mode_from_string(j.value("human_mode", std::string("absent")));
  return r;
}

sim::Action reactive_driver(const DepthScan& scan, const geom::PolarRef& goal) {
  const auto R = static_cast<int>(scan.rays.size());
  const double range = scan.max_range;
  double front = range;
  int best = -1;
  double best_score = -1e9;
  for (int i = 0; i < R; ++i) {
    const double off = ray_offset(i, R, scan.fov);
    const double d = scan.rays[i] * range;
    if (std::abs(off) < 0.3) front = std::min(front, d);
    const double reach = std::min(d, goal.distance + 0.3);
    const double score = std::cos(off - goal.bearing) + 0.6 * std::min(reach, 2.0) / 2.0;
    if (d > 0.7 && score > best_score) {
      best_score = score;
      best = i;
    }
  }
  double heading;
  if (std::abs(goal.bearing) > 0.5 * scan.fov && front > 1.0) {
    heading = goal.bearing;  // goal outside the view: turn toward it
  } else if (best >= 0) {
    heading = ray_offset(best, R, scan.fov);
  } else {
    return {0.0, sim::Limits::kOmegaMax};  // boxed in: rotate in place
  }
  const double omega = 2.5 * heading;
  const double v = sim::Limits::kVMax * std::clamp((front - 0.4) / 1.0, 0.0, 1.0) *
                   std::clamp(1.0 - std::abs(heading) / 1.2, 0.0, 1.0);
  return {v, omega};
}

std::vector<DatasetRecord> generate_dataset(std::span<const geom::Scene> scenes, const DatasetConfig& cfg) {
  if (scenes.empty()) throw Error("generate_dataset: no scenes");
  if (cfg.n_frames < 0) throw Error("generate_dataset: negative frame count");
  Rng rng(cfg.seed);
  std::vector<DatasetRecord> out;
  out.reserve(static_cast<std::size_t>(cfg.n_frames));
  int episode = 0;
  while (static_cast<int>(out.size()) < cfg.n_frames) {
    const geom::Scene& scene = scenes[static_cast<std::size_t>(episode) % scenes.size()];
    const sim::EpisodeInit init = sim::sample_episode(scene, rng, cfg.weights);
    sim::World world(scene, init);
    sim::RewardEvent event = sim::RewardEvent::kNone;
    while (event == sim::RewardEvent::kNone && static_cast<int>(out.size()) < cfg.n_frames) {
      const auto human = world.human();
      DepthScan scan = render_scan(scene, world.robot(), human, cfg.fov, cfg.rays);
      const auto goal = geom::to_polar(world.goal(), world.robot());
      const sim::Action drive = reactive_driver(scan, goal);
      const sim::Action a(drive.v + gaussian(rng, 0.0, cfg.v_noise), drive.omega + gaussian(rng, 0.0, cfg.omega_noise));
      DatasetRecord r;
      r.scan = std::move(scan.rays);
      r.human = detect_human(scene, world.robot(), human, cfg.fov);
      r.action = a;
      r.scene_id = scene.id();
      r.t = world.time();
      r.episode = episode;
      r.human_mode = init.human.mode;
      out.push_back(std::move(r));
      event = world.step(a);
    }
    ++episode;
  }
  return out;
}

void write_dataset(const std::filesystem::path& path, std::span<const DatasetRecord> records) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path);
  if (!os) throw Error("cannot write dataset '" + path.string() + "'");
  for (const auto& r : records) os << r.to_json().dump() << '\n';
  if (!os) throw Error("failed writing dataset '" + path.string() + "'");
}

std::vector<DatasetRecord> read_dataset(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open dataset '" + path.string() + "'");
  std::vector<DatasetRecord> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(is, line)) {
    ++n;
    if (line.empty()) continue;
    try {
      out.push_back(DatasetRecord::from_json(json::parse(line)));
    } catch (const std::exception& e) {
      throw Error("dataset '" + path.string() + "' line " + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

bool is_test_episode(int episode) noexcept { return episode % 5 == 4; }

Matrix scan_matrix(std::span<const DatasetRecord> records) {
  if (records.empty()) return {};
  Matrix m(records.front().scan.size(), static_cast<Eigen::Index>(records.size()));
  for (std::size_t k = 0; k < records.size(); ++k) {
    if (records[k].scan.size() != m.rows()) throw Error("dataset: inconsistent ray counts");
    m.col(static_cast<Eigen::Index>(k)) = records[k].scan;
  }
  return m;
}

double mean_scan_baseline_mse(const Matrix& train, const Matrix& test) {
  if (train.cols() == 0 || test.cols() == 0) throw Error("mean-scan baseline needs non-empty splits");
  const Vector mean = train.rowwise().mean();
  return (test.colwise() - mean).squaredNorm() / static_cast<double>(test.size());
}

json DatasetStats::to_json() const {
  return {{"frames", frames},
          {"episodes", episodes},
          {"human_visible_fraction", human_visible_fraction},
          {"mean_scan_baseline_mse", mean_scan_baseline_mse}};
}

DatasetStats dataset_stats(std::span<const DatasetRecord> records) {
  DatasetStats s;
  s.frames = static_cast<int>(records.size());
  std::set<int> episodes;
  std::vector<DatasetRecord> train, test;
  int visible = 0;
  for (const auto& r : records) {
    episodes.insert(r.episode);
    visible += r.human.k_H;
    (is_test_episode(r.episode) ? test : train).push_back(r);
  }
  s.episodes = static_cast<int>(episodes.size());
  s.human_visible_fraction = records.empty() ? 0.0 : static_cast<double>(visible) / static_cast<double>(records.size());
  if (!train.empty() && !test.empty()) s.mean_scan_baseline_mse = mean_scan_baseline_mse(scan_matrix(train), scan_matrix(test));
  return s;
}

PredictorBatch predictor_windows(std::span<const DatasetRecord> records, const Vae& vae, WindowFilter filter) {
  const int L = vae.latent_dim();
  const Matrix latents = records.empty() ? Matrix(L, 0) : vae.encode_mean(scan_matrix(records));
  const auto entry = [&](std::size_t j, std::size_t first) {
    WindowEntry e;
    e.d_H = records[j].human.d_H;
    e.dalpha_H = records[j].human.dalpha_H;
    if (j > first) {
      e.v = records[j - 1].action.v;
      e.omega = records[j - 1].action.omega;
    }
    e.latent = latents.col(static_cast<Eigen::Index>(j));
    return e;
  };

  std::vector<std::array<std::size_t, 3>> picks;  // {first of episode, newest entry, target}
  std::size_t first = 0;
  for (std::size_t i = 0; i + 1 < records.size(); ++i) {
    if (i == 0 || records[i].episode != records[i - 1].episode) first = i;
    if (records[i + 1].episode != records[i].episode) continue;
    if (filter == WindowFilter::kDynamicHuman) {
      const auto mode = records[i].human_mode;
      if (mode != sim::HumanMode::kOppositeAStar && mode != sim::HumanMode::kRandomAStar) continue;
      bool seen = records[i + 1].human.visible();
      for (std::size_t j = (i >= first + 4 ? i - 4 : first); j <= i; ++j) seen = seen || records[j].human.visible();
      if (!seen) continue;
    }
    picks.push_back({first, i, i + 1});
  }

  PredictorBatch b;
  const auto B = static_cast<Eigen::Index>(picks.size());
  b.inputs.assign(kWindowLength, Matrix(L + 4, B));
  b.last_latent.resize(L, B);
  b.last_pose.resize(2, B);
  b.target_latent.resize(L, B);
  b.target_pose.resize(2, B);
  for (Eigen::Index c = 0; c < B; ++c) {
    const auto [f, i, target] = picks[static_cast<std::size_t>(c)];
    for (int k = 0; k < kWindowLength; ++k) {
      const std::ptrdiff_t back = kWindowLength - 1 - k;
      const std::size_t j = static_cast<std::ptrdiff_t>(i) - back < static_cast<std::ptrdiff_t>(f) ? f : i - static_cast<std::size_t>(back);
      b.inputs[static_cast<std::size_t>(k)].col(c) = window_input(entry(j, f));
    }
    b.last_latent.col(c) = latents.col(static_cast<Eigen::Index>(i));
    b.last_pose.col(c) << records[i].human.d_H, records[i].human.dalpha_H;
    b.target_latent.col(c) = latents.col(static_cast<Eigen::Index>(target));
    b.target_pose.col(c) << records[target].human.d_H, records[target].human.dalpha_H;
  }
  return b;
}

}  // namespace prefnav::perception
