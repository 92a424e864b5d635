#include "fixtures.hpp"

#include <prefnav/learn/package.hpp>
#include <prefnav/service/app.hpp>
#include <prefnav/service/server.hpp>
#include <prefnav/sim/io.hpp>

#include <gtest/gtest.h>
#include <httplib.h>

#include <fstream>
#include <future>
#include <thread>

using namespace prefnav;
using namespace prefnav::service;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json demo_file(const std::string& name) {
  std::ifstream is(test::data_dir() / "demos" / name);
  return json::parse(is);
}

class ServiceTest : public ::testing::Test {
 protected:
  void SetUp() override {
    root_ = fs::temp_directory_path() / ("prefnav_service_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(root_);
    fs::create_directories(root_ / "policies");
    Rng rng(3);
    learn::PolicyPackage p;
    p.id = "random";
    p.vae = std::make_shared<const perception::Vae>(perception::VaeConfig{}, rng);
    learn::TD3Config td3;
    td3.hidden = {16, 16};
    learn::PolicyBundle bundle(13, td3, rng);
    p.actor = std::make_shared<const nn::Mlp>(bundle.actor);
    p.save(root_ / "policies" / "random");
    app_ = std::make_unique<App>(AppConfig{test::data_dir() / "scenes", root_ / "demos", root_ / "policies"});
  }
  void TearDown() override { fs::remove_all(root_); }

  Response call(const std::string& method, const std::string& path, const std::string& body = {},
                std::map<std::string, std::string> query = {}) {
    return app_->handle({method, path, std::move(query), body});
  }

  fs::path root_;
  std::unique_ptr<App> app_;
};

}  // namespace

TEST_F(ServiceTest, ListsScenesWithBounds) {
  const auto r = call("GET", "/scenes");
  ASSERT_EQ(r.status, 200);
  ASSERT_EQ(r.body.size(), 3u);
  EXPECT_EQ(r.body[1].at("id"), "two_rooms_a");
  EXPECT_EQ(r.body[1].at("bounds"), json({0.0, 0.0, 10.0, 6.0}));
}

TEST_F(ServiceTest, SceneCarriesFileAndOccupancyPreview) {
  const auto r = call("GET", "/scenes/two_rooms_a");
  ASSERT_EQ(r.status, 200);
  std::ifstream is(test::data_dir() / "scenes" / "two_rooms_a.json");
  EXPECT_EQ(r.body.at("scene"), json::parse(is));
  const auto& occ = r.body.at("occupancy");
  EXPECT_EQ(occ.at("cols"), 40);
  EXPECT_EQ(occ.at("rows"), 24);
  const auto& cells = occ.at("cells");
  EXPECT_EQ(cells[0][0], 0);
  // Cell centre (2.375, 1.625) lies in the circle at (2.4, 1.6) r 0.35.
  EXPECT_EQ(cells[6][9], 1);
  // Cell centre (2.125, 3.875) lies in the table [1.8, 3.0] x [3.6, 4.4].
  EXPECT_EQ(cells[15][8], 1);
  EXPECT_EQ(call("GET", "/scenes/nowhere").status, 404);
  EXPECT_EQ(call("GET", "/nope").status, 404);
}

TEST_F(ServiceTest, ValidDemoIsStoredAndListed) {
  const auto r = call("POST", "/demos", demo_file("a_wide_table.json").dump());
  ASSERT_EQ(r.status, 200) << r.body.dump();
  EXPECT_TRUE(r.body.at("valid"));
  EXPECT_TRUE(r.body.at("violations").empty());
  EXPECT_LT(r.body.at("tracking").at("max_deviation").get<double>(), 0.3);
  EXPECT_LT(r.body.at("tracking").at("f_at_t_star").get<double>(), 0.1);
  EXPECT_FALSE(r.body.at("replay").is_null());
  const std::string id = r.body.at("id");
  ASSERT_TRUE(app_->demos().get(id).has_value());
  EXPECT_EQ(app_->demos().valid_demos().size(), 1u);

  const auto all = call("GET", "/demos");
  ASSERT_EQ(all.body.size(), 1u);
  EXPECT_EQ(all.body[0].at("id"), id);
  EXPECT_EQ(all.body[0].at("scene_id"), "two_rooms_a");
  EXPECT_TRUE(call("GET", "/demos", {}, {{"scene", "two_rooms_b"}}).body.empty());
  EXPECT_EQ(call("GET", "/demos", {}, {{"scene", "two_rooms_a"}}).body.size(), 1u);

  // A reopened store reads the same index.
  DemoStore again(root_ / "demos");
  ASSERT_EQ(again.list().size(), 1u);
  EXPECT_EQ(again.list()[0].id, id);
}

TEST_F(ServiceTest, StrokeThroughWallIsRejectedWithLocation) {
  // Straight stroke across the dividing wall (x in [4.9, 5.1], y < 2.4).
  json d = {{"scene_id", "two_rooms_a"}, {"human", nullptr}, {"robot", json::array()}};
  for (int i = 0; i <= 40; ++i) d["robot"].push_back({i * 0.1, 3.0 + 0.1 * i, 1.2});
  const auto r = call("POST", "/demos", d.dump());
  ASSERT_EQ(r.status, 422);
  EXPECT_FALSE(r.body.at("valid"));
  const auto& v = r.body.at("violations").at(0);
  EXPECT_EQ(v.at("kind"), "collision");
  const double x = v.at("location").at(0);
  EXPECT_GT(x, 4.3);
  EXPECT_LT(x, 5.1);
  // Stored but excluded from training.
  EXPECT_EQ(call("GET", "/demos").body.size(), 1u);
  EXPECT_TRUE(app_->demos().valid_demos().empty());
}

TEST_F(ServiceTest, MalformedUnknownSceneAndOutOfBounds) {
  EXPECT_EQ(call("POST", "/demos", "{not json").status, 400);
  auto d = demo_file("a_wide_table.json");
  d["scene_id"] = "nowhere";
  const auto unknown = call("POST", "/demos", d.dump());
  EXPECT_EQ(unknown.status, 422);
  EXPECT_EQ(unknown.body.at("violations")[0].at("kind"), "unknown_scene");
  d = demo_file("a_wide_table.json");
  d["robot"].push_back({100.0, 11.0, 3.0});
  const auto oob = call("POST", "/demos", d.dump());
  EXPECT_EQ(oob.status, 422);
  EXPECT_EQ(oob.body.at("violations")[0].at("kind"), "out_of_bounds");
  EXPECT_TRUE(call("GET", "/demos").body.empty());
}

TEST_F(ServiceTest, RolloutMatchesDirectEpisode) {
  const json init = {{"scene_id", "two_rooms_a"}, {"robot_start", {1.0, 1.0, 0.0}}, {"goal", {3.5, 1.0}}, {"seed", 5}};
  const auto r = call("POST", "/rollouts", json{{"policy_id", "random"}, {"init", init}}.dump());
  ASSERT_EQ(r.status, 200) << r.body.dump();

  const auto pkg = learn::PolicyPackage::load(root_ / "policies" / "random");
  const auto scene = geom::Scene::load(test::data_dir() / "scenes" / "two_rooms_a.json");
  const auto obs = pkg.make_observer(true);
  const auto run = sim::run_episode(pkg.make_policy(), sim::episode_init_from_json(init), scene, *obs);
  auto expected = sim::to_json(run.result);
  EXPECT_EQ(r.body.at("outcome"), expected.at("outcome"));
  EXPECT_EQ(r.body.at("steps"), expected.at("steps"));
  EXPECT_EQ(r.body.at("robot_traj"), expected.at("robot_traj"));
  EXPECT_EQ(r.body.at("policy_id"), "random");
}

TEST_F(ServiceTest, SampledRolloutIsSeedDeterministic) {
  const json body = {{"policy_id", "random"}, {"scene_id", "two_rooms_b"}, {"seed", 77}};
  const auto a = call("POST", "/rollouts", body.dump());
  const auto b = call("POST", "/rollouts", body.dump());
  ASSERT_EQ(a.status, 200);
  EXPECT_EQ(a.body, b.body);
  EXPECT_EQ(a.body.at("init").at("seed"), 77);
  EXPECT_EQ(call("POST", "/rollouts", json{{"policy_id", "missing"}, {"scene_id", "two_rooms_b"}}.dump()).status, 404);
  EXPECT_EQ(call("POST", "/rollouts", json{{"policy_id", "../policies"}}.dump()).status, 404);
  EXPECT_EQ(call("POST", "/rollouts", json{{"seed", 1}}.dump()).status, 400);
  EXPECT_EQ(call("POST", "/rollouts", json{{"policy_id", "random"}, {"scene_id", "x"}}.dump()).status, 404);
}

TEST_F(ServiceTest, ListsPolicies) {
  const auto r = call("GET", "/policies");
  ASSERT_EQ(r.status, 200);
  ASSERT_EQ(r.body.size(), 1u);
  EXPECT_EQ(r.body[0].at("id"), "random");
}

TEST_F(ServiceTest, ServesOverHttp) {
  std::promise<std::pair<int, StopFn>> ready;
  auto bound = ready.get_future();
  std::thread server([&] {
    const bool ok = serve(*app_, "127.0.0.1", 0, [&](int port, StopFn stop) { ready.set_value({port, std::move(stop)}); });
    EXPECT_TRUE(ok);
  });
  const auto [port, stop] = bound.get();
  httplib::Client client("127.0.0.1", port);
  const auto scenes = client.Get("/scenes");
  ASSERT_TRUE(scenes);
  EXPECT_EQ(scenes->status, 200);
  EXPECT_EQ(json::parse(scenes->body).size(), 3u);
  EXPECT_EQ(scenes->get_header_value("Access-Control-Allow-Origin"), "*");
  const auto posted = client.Post("/demos", demo_file("b_door_right.json").dump(), "application/json");
  ASSERT_TRUE(posted);
  EXPECT_EQ(posted->status, 200) << posted->body;
  const auto listed = client.Get("/demos?scene=two_rooms_b");
  ASSERT_TRUE(listed);
  EXPECT_EQ(json::parse(listed->body).size(), 1u);
  stop();
  server.join();
}
