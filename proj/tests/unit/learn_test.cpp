#include "fixtures.hpp"

#include <prefnav/error.hpp>
#include <prefnav/learn/workflow.hpp>

#include <gtest/gtest.h>

#include <filesystem>

using namespace prefnav;
using namespace prefnav::learn;
using geom::kPi;

namespace {

sim::Transition make_transition(double tag, int dim = 3) {
  sim::Transition t;
  t.s = Eigen::VectorXd::Constant(dim, tag);
  t.s_next = Eigen::VectorXd::Constant(dim, tag + 0.5);
  t.a = sim::Action(0.25, 0.0);
  t.r = tag;
  return t;
}

TD3Config tiny_td3() {
  TD3Config c;
  c.hidden = {16, 16};
  c.warmup = 200;
  c.batch_E = 16;
  c.batch_D = 8;
  return c;
}

TrainResult tiny_run(std::uint64_t seed, const DemoSet& demos = {}, double lambda_bc = 0.0) {
  static const std::vector<geom::Scene> scenes{test::empty_room(6, 6, "r1"), test::empty_room(7, 5, "r2")};
  TrainConfig cfg;
  cfg.td3 = tiny_td3();
  cfg.td3.lambda_BC = lambda_bc;
  cfg.total_steps = 600;
  cfg.scene_rotation = 2;
  cfg.seed = seed;
  return train(cfg, scenes, demos, [] { return std::make_unique<test::PoseObserver>(); });
}

}  // namespace

TEST(Actions, NormalisationRoundTrip) {
  EXPECT_EQ(normalize_action(sim::Action(0.0, -kPi)), Eigen::Vector2d(-1, -1));
  EXPECT_EQ(normalize_action(sim::Action(0.5, kPi)), Eigen::Vector2d(1, 1));
  Rng rng(1);
  for (int i = 0; i < 100; ++i) {
    const sim::Action a(uniform(rng, 0, 0.5), uniform(rng, -kPi, kPi));
    const auto back = denormalize_action(normalize_action(a));
    EXPECT_NEAR(back.v, a.v, 1e-15);
    EXPECT_NEAR(back.omega, a.omega, 1e-15);
  }
}

TEST(Replay, EvictsOldestWhenFull) {
  ReplayBuffer buf(3, sim::Source::kExperience);
  for (int i = 0; i < 5; ++i) buf.push(make_transition(i));
  EXPECT_EQ(buf.size(), 3u);
  EXPECT_EQ(buf.at(0).r, 2.0);
  EXPECT_EQ(buf.at(2).r, 4.0);
  const std::vector<std::size_t> idx{2, 0};
  const auto b = buf.gather(idx);
  EXPECT_EQ(b.r, Eigen::Vector2d(4, 2));
  EXPECT_EQ(b.s.col(0), Eigen::Vector3d::Constant(4));
  EXPECT_EQ(b.s_next(0, 1), 2.5);
  EXPECT_EQ(b.a.col(0), normalize_action(sim::Action(0.25, 0)));
}

TEST(Replay, FrozenAndShapeChecks) {
  ReplayBuffer buf(4, sim::Source::kDemo);
  buf.push(make_transition(1));
  EXPECT_THROW(buf.push(make_transition(2, 4)), Error);
  buf.freeze();
  EXPECT_THROW(buf.push(make_transition(3)), Error);
  Rng rng(2);
  const auto b = buf.sample(5, rng);
  EXPECT_EQ(b.size(), 5);
  EXPECT_EQ(concat(b, Batch{}).size(), 5);
  EXPECT_EQ(concat(b, b).s.cols(), 10);
}

TEST(Td3, BellmanTargetsMatchScalarOracle) {
  Rng rng(3);
  const auto cfg = tiny_td3();
  PolicyBundle b(4, cfg, rng);
  Batch batch;
  batch.s = Eigen::MatrixXd::Random(4, 6);
  batch.s_next = Eigen::MatrixXd::Random(4, 6);
  batch.a = Eigen::MatrixXd::Random(2, 6);
  batch.r = Eigen::VectorXd::Random(6);
  batch.done = Eigen::VectorXd::Zero(6);
  batch.done[2] = 1;
  Eigen::MatrixXd noise = Eigen::MatrixXd::Random(2, 6);  // entries beyond +-0.5 get clipped
  const auto y = bellman_targets(b, batch, noise, cfg);
  for (int c = 0; c < 6; ++c) {
    Eigen::VectorXd a = b.actor_target.predict(batch.s_next.col(c)).col(0);
    for (int k = 0; k < 2; ++k) a[k] = std::clamp(a[k] + std::clamp(noise(k, c), -0.5, 0.5), -1.0, 1.0);
    Eigen::VectorXd x(6);
    x << batch.s_next.col(c), a;
    const double q = std::min(b.critic1_target.predict(x)(0, 0), b.critic2_target.predict(x)(0, 0));
    EXPECT_NEAR(y[c], batch.r[c] + (c == 2 ? 0.0 : 0.99 * q), 1e-12);
  }
}

TEST(Td3, SoftUpdateIsConvexCombination) {
  Rng rng(4);
  auto main = nn::Mlp::make(2, {3}, 1, nn::Activation::kRelu, nn::Activation::kLinear, rng);
  auto target = nn::Mlp::make(2, {3}, 1, nn::Activation::kRelu, nn::Activation::kLinear, rng);
  const Eigen::VectorXd before = target.params();
  soft_update(target, main, 0.005);
  EXPECT_LT((target.params() - (0.995 * before + 0.005 * main.params())).norm(), 1e-15);
}

TEST(Td3, ActorUpdateNeedsDemonstrationsWhenCloning) {
  Rng rng(5);
  auto cfg = tiny_td3();
  PolicyBundle b(3, cfg, rng);
  Batch exp;
  exp.s = Eigen::MatrixXd::Random(3, 4);
  exp.r = Eigen::VectorXd::Zero(4);
  try {
    (void)actor_gradients(b, exp, Batch{}, cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_STREQ(e.what(), "no demonstrations loaded");
  }
  cfg.lambda_BC = 0.0;
  const auto before_actor = b.actor.params();
  const auto before_target = b.actor_target.params();
  const auto st = actor_update(b, exp, Batch{}, cfg);
  EXPECT_EQ(st.bc_loss, 0.0);
  EXPECT_NE(b.actor.params(), before_actor);
  EXPECT_LT((b.actor_target.params() - (0.995 * before_target + 0.005 * b.actor.params())).norm(), 1e-12);
}

TEST(Td3, SelectActionIsClampedAndDeterministicWithoutNoise) {
  Rng rng(6);
  PolicyBundle b(3, tiny_td3(), rng);
  const Eigen::Vector3d s(0.1, -0.2, 0.3);
  const auto a1 = select_action(b.actor, s, false, rng);
  const auto a2 = select_action(b.actor, s, false, rng);
  EXPECT_EQ(a1, a2);
  for (int i = 0; i < 200; ++i) {
    const auto a = select_action(b.actor, s, true, rng, 5.0);
    EXPECT_GE(a.v, 0.0);
    EXPECT_LE(a.v, 0.5);
    EXPECT_LE(std::abs(a.omega), kPi);
  }
}

TEST(Td3, ConfigJson) {
  TD3Config c;
  c.hidden = {64, 32};
  c.lambda_BC = 0.0;
  const auto back = TD3Config::from_json(c.to_json());
  EXPECT_EQ(back.to_json(), c.to_json());
  EXPECT_DOUBLE_EQ(TD3Config{}.lambda_RL, 7.5);
  EXPECT_DOUBLE_EQ(TD3Config{}.lambda_BC, 2.5);
  EXPECT_THROW((void)TD3Config::from_json({{"gama", 0.9}}), Error);
  EXPECT_EQ(TD3Config::from_json({{"tau", 0.01}}).tau, 0.01);
  TrainConfig t;
  t.total_steps = 1234;
  EXPECT_EQ(TrainConfig::from_json(t.to_json()).to_json(), t.to_json());
}

TEST(Td3, CheckpointRestoresNetworks) {
  Rng rng(7);
  const auto cfg = tiny_td3();
  PolicyBundle b(5, cfg, rng);
  const auto back = PolicyBundle::from_checkpoint(b.to_checkpoint(), cfg);
  EXPECT_EQ(back.actor.params(), b.actor.params());
  EXPECT_EQ(back.critic2_target.params(), b.critic2_target.params());
  EXPECT_EQ(back.state_dim, 5);
}

TEST(Trainer, SceneRotation) {
  EXPECT_EQ(scene_index(0, 50, 3), 0u);
  EXPECT_EQ(scene_index(49, 50, 3), 0u);
  EXPECT_EQ(scene_index(50, 50, 3), 1u);
  EXPECT_EQ(scene_index(150, 50, 3), 0u);
}

TEST(Trainer, ShortRunIsDeterministicAndRotates) {
  const auto a = tiny_run(11);
  const auto b = tiny_run(11);
  EXPECT_LE(a.steps, 600u);
  EXPECT_GT(a.steps, 600u - 150u);
  ASSERT_EQ(a.log.size(), b.log.size());
  for (std::size_t i = 0; i < a.log.size(); ++i) {
    EXPECT_EQ(a.log[i].return_, b.log[i].return_);
    EXPECT_EQ(a.log[i].critic_loss, b.log[i].critic_loss);
  }
  EXPECT_EQ(a.final.actor.params(), b.final.actor.params());
  for (std::size_t e = 0; e < a.scene_schedule.size(); ++e)
    EXPECT_EQ(a.scene_schedule[e], (e / 2) % 2 == 0 ? "r1" : "r2");
  EXPECT_GT(a.final.updates, 0);
  EXPECT_EQ(a.best.actor.params(), a.final.actor.params());
  const auto c = tiny_run(12);
  EXPECT_NE(c.final.actor.params(), a.final.actor.params());
}

TEST(Trainer, CloningWithoutDemonstrationsIsRejected) {
  EXPECT_THROW((void)tiny_run(1, {}, 2.5), Error);
}

TEST(Trainer, EvaluationHookSelectsBestSnapshotAndStops) {
  const std::vector<geom::Scene> scenes{test::empty_room(6, 6)};
  TrainConfig cfg;
  cfg.td3 = tiny_td3();
  cfg.td3.lambda_BC = 0.0;
  cfg.total_steps = 2000;
  cfg.eval_every = 100;
  cfg.stop_score = 0.5;
  std::vector<std::size_t> seen;
  TrainHooks hooks;
  hooks.evaluate = [&](const PolicyBundle&, std::size_t step) {
    seen.push_back(step);
    return step == 400 ? 0.7 : 0.1;
  };
  const auto res = train(cfg, scenes, {}, [] { return std::make_unique<test::PoseObserver>(); }, hooks);
  EXPECT_EQ(seen, (std::vector<std::size_t>{300, 400}));
  EXPECT_EQ(res.best_step, 400u);
  EXPECT_EQ(res.best_score, 0.7);
  EXPECT_LT(res.steps, 2000u);
}

TEST(Trainer, DemoTransitionsFeedCloning) {
  const auto scene = test::empty_room(6, 6, "r1");
  sim::Demonstration d;
  d.scene_id = "r1";
  for (int i = 0; i <= 20; ++i) d.robot.push_back({i * 0.5, 1.0 + 0.15 * i, 3.0});
  test::PoseObserver obs;
  DemoSet set;
  set.transitions = sim::demo_to_transitions(d, scene, obs).transitions;
  set.demos = {d};
  const auto res = tiny_run(3, set, 2.5);
  double bc = 0;
  for (const auto& row : res.log) bc += row.bc_loss;
  EXPECT_GT(bc, 0.0);
}

TEST(Package, SaveLoadRoundTrip) {
  Rng rng(8);
  PolicyPackage p;
  p.id = "unit";
  p.vae = std::make_shared<const perception::Vae>(perception::VaeConfig{}, rng);
  PolicyBundle bundle(13, tiny_td3(), rng);
  p.actor = std::make_shared<const nn::Mlp>(bundle.actor);
  p.meta = {{"steps", 10}};
  const auto dir = std::filesystem::temp_directory_path() / "prefnav_package_test";
  std::filesystem::remove_all(dir);
  p.save(dir, &bundle);
  const auto back = PolicyPackage::load(dir);
  EXPECT_EQ(back.id, "unit");
  EXPECT_EQ(back.meta.at("steps"), 10);
  EXPECT_EQ(back.actor->params(), p.actor->params());
  const Eigen::VectorXd s = Eigen::VectorXd::LinSpaced(13, -1, 1);
  EXPECT_EQ(back.make_policy()(s), p.make_policy()(s));
  EXPECT_EQ(back.make_observer(true)->state_dim(), 13u);
  std::filesystem::remove(dir / "vae.ckpt.json");
  EXPECT_THROW((void)PolicyPackage::load(dir), Error);
  std::filesystem::remove_all(dir);
}

TEST(Workflow, LoadsBundledScenesAndDemos) {
  const auto scenes = load_scenes(test::data_dir() / "scenes");
  EXPECT_EQ(scenes.size(), 3u);
  EXPECT_TRUE(scenes.contains("two_rooms_a"));
  const auto one = load_scenes(test::data_dir() / "scenes" / "two_rooms_b.json");
  EXPECT_EQ(one.size(), 1u);
  const auto demos = load_demonstrations(test::data_dir() / "demos");
  EXPECT_EQ(demos.size(), 3u);
  EXPECT_EQ(mode_scenarios(scenes).size(), 3u);
  EXPECT_EQ(mode_scenarios(scenes, sim::HumanMode::kStatic).front().mode, sim::HumanMode::kStatic);
  const auto ds = demo_scenarios(demos);
  EXPECT_EQ(ds[0].name, "demo-1");
  EXPECT_EQ(ds[0].scene_id, demos[0].scene_id);
  const auto set = build_demo_set(demos, scenes, [] { return std::make_unique<test::PoseObserver>(); });
  EXPECT_EQ(set.demos.size(), 3u);
  EXPECT_EQ(set.transitions.size(), 45u + 46u + 44u);
}

TEST(Workflow, UnknownSceneAndMissingDemos) {
  auto demos = load_demonstrations(test::data_dir() / "demos");
  demos[0].scene_id = "nowhere";
  const auto scenes = load_scenes(test::data_dir() / "scenes");
  EXPECT_THROW((void)build_demo_set(demos, scenes, [] { return std::make_unique<test::PoseObserver>(); }), Error);
  EXPECT_THROW((void)load_scenes(test::data_dir() / "missing"), Error);
  PerceptionModels models;
  Rng rng(1);
  models.vae = std::make_shared<const perception::Vae>(perception::VaeConfig{}, rng);
  try {
    (void)train_policy("x", {}, models, {}, scenes, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(std::string(e.what()), "variant vae-ha requires demonstrations");
  }
}
