#include "fixtures.hpp"

#include <prefnav/cli/cli.hpp>
#include <prefnav/learn/package.hpp>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include <fstream>
#include <sstream>

using namespace prefnav;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "prefnav");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::dispatch(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

json read_json(const fs::path& p) {
  std::ifstream is(p);
  return json::parse(is);
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream os(p);
  os << text;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("prefnav_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  /// Untrained package: enough to drive rollouts and evaluations.
  std::string make_package() const {
    Rng rng(3);
    learn::PolicyPackage p;
    p.id = "random";
    p.vae = std::make_shared<const perception::Vae>(perception::VaeConfig{}, rng);
    learn::TD3Config td3;
    td3.hidden = {16, 16};
    learn::PolicyBundle bundle(13, td3, rng);
    p.actor = std::make_shared<const nn::Mlp>(bundle.actor);
    p.save(dir_ / "pkg");
    return path("pkg");
  }

  fs::path dir_;
};

}  // namespace

TEST_F(CliTest, HelpAndUsageErrors) {
  const auto help = run({"--help"});
  EXPECT_EQ(help.code, cli::kExitOk);
  for (const char* cmd : {"gen-dataset", "train-vae", "train-predictor", "train-policy", "rollout", "evaluate",
                          "frechet", "serve"})
    EXPECT_NE(help.out.find(cmd), std::string::npos) << cmd;
  EXPECT_EQ(run({"frechet", "--help"}).code, cli::kExitOk);
  EXPECT_EQ(run({}).code, cli::kExitUsage);
  EXPECT_EQ(run({"fly"}).code, cli::kExitUsage);
  EXPECT_EQ(run({"frechet", "--a", "x"}).code, cli::kExitUsage);
  EXPECT_EQ(run({"train-policy", "--variant", "vae-xx"}).code, cli::kExitUsage);
}

TEST_F(CliTest, DemoVariantRefusesNoDemos) {
  const auto r = run({"train-policy", "--variant", "vae-ha", "--no-demos", "--out", path("p")});
  EXPECT_EQ(r.code, cli::kExitUsage);
  EXPECT_NE(r.err.find("--no-demos"), std::string::npos);
}

TEST_F(CliTest, FrechetOnPointFiles) {
  write_text(dir_ / "a.json", "[[0, 0], [1, 0], [2, 0]]");
  write_text(dir_ / "b.json", "[[0, 1], [1, 1], [2, 1]]");
  const auto r = run({"frechet", "--a", path("a.json"), "--b", path("b.json"), "--resample", "0", "--curve",
                      path("curve.csv"), "--report", path("report.json")});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  EXPECT_NE(r.out.find("F_full 1\n"), std::string::npos) << r.out;
  const auto rep = read_json(dir_ / "report.json");
  EXPECT_DOUBLE_EQ(rep.at("F_full").get<double>(), 1.0);
  std::ifstream csv(dir_ / "curve.csv");
  std::string header;
  std::getline(csv, header);
  EXPECT_EQ(header, "t,f");

  EXPECT_EQ(run({"frechet", "--a", path("a.json"), "--b", path("b.json"), "--mode", "sideways"}).code,
            cli::kExitUsage);
  EXPECT_EQ(run({"frechet", "--a", path("missing.json"), "--b", path("b.json")}).code, cli::kExitRuntime);
}

TEST_F(CliTest, FrechetAcceptsDemonstrationFiles) {
  const auto demo = (test::data_dir() / "demos" / "a_wide_table.json").string();
  const auto r = run({"frechet", "--a", demo, "--b", demo});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  EXPECT_NE(r.out.find("F_full 0\n"), std::string::npos);
  EXPECT_NE(r.out.find("t_star 1\n"), std::string::npos);
}

TEST_F(CliTest, FlagsOverrideConfigFileOverDefaults) {
  write_text(dir_ / "cfg.json", R"({"frames": 30, "seed": 9, "rays": 16})");
  const auto r = run({"gen-dataset", "--config", path("cfg.json"), "--frames", "40", "--scene", "two_rooms_a", "--out",
                      path("ds")});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  const auto cfg = read_json(dir_ / "ds" / "config.json");
  EXPECT_EQ(cfg.at("frames"), 40);
  EXPECT_EQ(cfg.at("seed"), 9);
  EXPECT_EQ(cfg.at("rays"), 16);
  EXPECT_EQ(cfg.at("variant"), "vae-ha");
  EXPECT_EQ(read_json(dir_ / "ds" / "dataset_stats.json").at("rays"), 16);

  write_text(dir_ / "bad.json", R"({"frmes": 30})");
  EXPECT_EQ(run({"gen-dataset", "--config", path("bad.json"), "--out", path("x")}).code, cli::kExitUsage);
  EXPECT_EQ(run({"gen-dataset", "--config", path("none.json"), "--out", path("x")}).code, cli::kExitUsage);
}

TEST_F(CliTest, RolloutIsSeedDeterministic) {
  const auto pkg = make_package();
  for (const char* o : {"r1", "r2"})
    ASSERT_EQ(run({"rollout", "--policy", pkg, "--scene", "two_rooms_a", "--seed", "11", "--out", path(o)}).code,
              cli::kExitOk);
  EXPECT_EQ(read_json(dir_ / "r1" / "rollout.json"), read_json(dir_ / "r2" / "rollout.json"));
  EXPECT_TRUE(fs::exists(dir_ / "r1" / "rollout.jsonl"));
  EXPECT_EQ(run({"rollout", "--policy", pkg, "--out", path("r3")}).code, cli::kExitUsage);
  EXPECT_EQ(run({"rollout", "--policy", pkg, "--scene", "two_rooms_a", "--mode", "7", "--out", path("r3")}).code,
            cli::kExitUsage);
  EXPECT_EQ(run({"rollout", "--policy", path("nopkg"), "--scene", "two_rooms_a", "--out", path("r3")}).code,
            cli::kExitRuntime);
}

TEST_F(CliTest, EvaluateWritesReports) {
  const auto pkg = make_package();
  const std::vector<std::string> args{"evaluate", "--policy", pkg, "--scenarios", "two_rooms_b", "--demos",
                                      (test::data_dir() / "demos" / "b_door_right.json").string(), "--n", "3"};
  auto a = args, b = args;
  a.insert(a.end(), {"--out", path("e1")});
  b.insert(b.end(), {"--out", path("e2"), "--workers", "2"});
  const auto r = run(a);
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  ASSERT_EQ(run(b).code, cli::kExitOk);
  const auto rep = read_json(dir_ / "e1" / "eval_report.json");
  EXPECT_EQ(rep, read_json(dir_ / "e2" / "eval_report.json"));
  EXPECT_EQ(rep.at("configurations").size(), 1u);
  EXPECT_EQ(rep.at("configurations")[0].at("scenarios").size(), 2u);
  EXPECT_TRUE(fs::exists(dir_ / "e1" / "eval_rates.csv"));
  EXPECT_NE(r.out.find("random: success"), std::string::npos);
  EXPECT_EQ(run({"evaluate", "--policy", pkg, "--n", "0", "--out", path("e3")}).code, cli::kExitUsage);
}
