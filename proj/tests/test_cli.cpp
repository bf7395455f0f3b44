#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <sstream>

#include "hcm/cli.hpp"
#include "hcm/data.hpp"
#include "hcm/format.hpp"
#include "hcm/metrics.hpp"

namespace {

namespace fs = std::filesystem;

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = hcm::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("hcm_test_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    hcm::write_text(dir_ / "cfg.json",
                    R"({"experiment": "noise-shift", "training": {"epochs": 3}, "data": {"n": 300}})");
  }
  std::string p(const std::string& rel) const { return (dir_ / rel).string(); }
  fs::path dir_;
};

TEST_F(Cli, HelpAndVersionSucceed) {
  EXPECT_EQ(run({"--help"}).code, 0);
  EXPECT_EQ(run({"--version"}).code, 0);
  EXPECT_EQ(run({"train", "--help"}).code, 0);
}

TEST_F(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"frobnicate"}).code, 2);
  EXPECT_EQ(run({"train"}).code, 2);
  const auto r = run({"experiment", "cifar", "--out", p("x")});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("blob-ood"), std::string::npos) << r.err;
  hcm::write_text(dir_ / "bad.json", R"({"experiment": "toy1d", "trainig": {}})");
  const auto b = run({"train", "--config", p("bad.json"), "--out", p("o")});
  EXPECT_EQ(b.code, 2);
  EXPECT_NE(b.err.find("trainig"), std::string::npos) << b.err;
}

TEST_F(Cli, PipelineProducesConsistentFiles) {
  ASSERT_EQ(run({"train", "--config", p("cfg.json"), "--out", p("t"), "-q"}).code, 0);
  for (const char* f : {"params.json", "config.json", "data.csv", "training-loss.csv"})
    EXPECT_TRUE(fs::exists(dir_ / "t" / f)) << f;
  ASSERT_EQ(run({"score", "--params", p("t/params.json"), "--data", p("t/data.csv"), "--out", p("s")}).code, 0);
  const auto scores = hcm::read_csv(dir_ / "s" / "scores.csv");
  ASSERT_EQ(scores.rows.size(), 300u);
  for (const auto& row : scores.rows) {
    const double u = row[scores.column_index("u")];
    ASSERT_NEAR(u, std::abs(row[scores.column_index("R_hat")]) * std::abs(row[scores.column_index("d_norm")] - 1.0),
                1e-12 * (1.0 + u));
  }
  ASSERT_EQ(run({"calibrate", "--scores", p("s/scores.csv"), "--out", p("c")}).code, 0);
  const auto cal = hcm::read_json(dir_ / "c" / "calibration.json");
  const double t = cal["temperature"].get<double>();
  const auto cal_scores = hcm::read_csv(dir_ / "c" / "scores.csv");
  for (const auto& row : cal_scores.rows)
    ASSERT_NEAR(row[cal_scores.column_index("conf")], std::exp(-row[cal_scores.column_index("u")] * t), 1e-12);

  ASSERT_EQ(run({"eval", "--scores", p("c/scores.csv"), "--calibration", p("c/calibration.json"),
                 "--out", p("e")}).code, 0);
  const auto m = hcm::read_json(dir_ / "e" / "metrics.json");
  const auto rep = hcm::metrics::evaluate(cal_scores.column("u_cal"), cal_scores.column("r"));
  EXPECT_DOUBLE_EQ(m["spearman"].get<double>(), rep.spearman);
  EXPECT_DOUBLE_EQ(m["cov_1s"].get<double>(), rep.cov_1s);
  EXPECT_TRUE(fs::exists(dir_ / "e" / "metrics.csv"));
}

TEST_F(Cli, DataErrorsExitThreeOrTwo) {
  ASSERT_EQ(run({"train", "--config", p("cfg.json"), "--out", p("t"), "-q"}).code, 0);
  const auto missing = run({"score", "--params", p("t/params.json"), "--data", p("none.csv"), "--out", p("s")});
  EXPECT_NE(missing.code, 0);
  EXPECT_NE(missing.err.find("none.csv"), std::string::npos) << missing.err;

  hcm::data::csv_write(hcm::data::gen_smooth_regression(20, 2, 3, 0.1, 0), dir_ / "narrow.csv");
  EXPECT_EQ(run({"score", "--params", p("t/params.json"), "--data", p("narrow.csv"), "--out", p("s")}).code, 2);

  hcm::write_text(dir_ / "zero.csv", "u,r\n0,1\n0,1\n0,1\n0,1\n0,1\n0,1\n0,1\n0,1\n0,1\n0,1\n");
  EXPECT_EQ(run({"calibrate", "--scores", p("zero.csv"), "--out", p("c")}).code, 3);

  hcm::write_text(dir_ / "broken.csv", "u,r\n1,2\n3\n");
  EXPECT_EQ(run({"calibrate", "--scores", p("broken.csv"), "--out", p("c")}).code, 3);
}

TEST_F(Cli, SeedsChangeOutputsAndReruns) {
  hcm::write_text(dir_ / "moons.json",
                  R"({"experiment": "two-moons", "training": {"epochs": 3}, "data": {"n": 200}})");
  auto go = [&](const std::string& out, const std::string& seed) {
    return run({"experiment", "two-moons", "--config", p("moons.json"), "--seed", seed, "--out", p(out), "-q"}).code;
  };
  ASSERT_EQ(go("a", "1"), 0);
  ASSERT_EQ(go("b", "1"), 0);
  ASSERT_EQ(go("c", "2"), 0);
  EXPECT_EQ(hcm::read_text(dir_ / "a" / "scores.csv"), hcm::read_text(dir_ / "b" / "scores.csv"));
  EXPECT_EQ(hcm::read_text(dir_ / "a" / "metrics.json"), hcm::read_text(dir_ / "b" / "metrics.json"));
  EXPECT_NE(hcm::read_text(dir_ / "a" / "scores.csv"), hcm::read_text(dir_ / "c" / "scores.csv"));
  EXPECT_TRUE(fs::exists(dir_ / "a" / "manifest.json"));
}

}  // namespace
