#include "commands.hpp"
#include "config.hpp"

#include "qstrat/errors.hpp"
#include "qstrat/map_io.hpp"

#include <gtest/gtest.h>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;
using namespace qstrat;
using namespace qstrat::app;
using nlohmann::json;

namespace {

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("qstrat_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json read_json(const fs::path& p) { return json::parse(slurp(p)); }

int run(const std::string& command, const RunConfig& cfg, std::string* err = nullptr) {
  std::ostringstream log, e;
  int rc = dispatch(command, cfg, log, e);
  if (err) *err = e.str();
  return rc;
}

int shell(const std::string& args) {
  std::string cmd = std::string(QSTRAT_BIN) + " " + args + " > /dev/null 2>&1";
  int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

}  // namespace

TEST(Config, UnknownKeyIsRejected) {
  RunConfig cfg;
  EXPECT_THROW(cfg.set("no_such_key", "1"), ConfigError);
  std::istringstream in("m = 3\nbogus = 4\n");
  try {
    cfg.load(in);
    FAIL();
  } catch (const InputError& e) {
    EXPECT_EQ(e.line(), 2);
  }
  EXPECT_EQ(shell("verify -s bogus=1"), 2);
}

TEST(Config, OverridesWinOverFile) {
  fs::path dir = scratch("override");
  std::ofstream(dir / "run.cfg") << "# comment\neps = 0.2\nk = 1\n";
  RunConfig cfg;
  cfg.load_file((dir / "run.cfg").string());
  cfg.set_assignment("eps=0.4");
  EXPECT_DOUBLE_EQ(cfg.num("eps"), 0.4);
  EXPECT_EQ(cfg.integer("k"), 1);
  EXPECT_TRUE(cfg.explicitly_set("k"));
  EXPECT_FALSE(cfg.explicitly_set("rho"));
  EXPECT_EQ(cfg.echo()["eps"], "0.4");
}

TEST(Config, ValidationRejectsBadValues) {
  RunConfig cfg;
  cfg.set("rho", "0.02");
  EXPECT_THROW(cfg.validate("analyze"), ConfigError);
  RunConfig coarse;
  coarse.set("h", "1");
  EXPECT_THROW(coarse.validate("analyze"), ConfigError);
  RunConfig words;
  words.set("eps", "abc");
  EXPECT_THROW(words.validate("analyze"), ConfigError);
}

TEST(Cli, MalformedMapFileNamesLine) {
  fs::path dir = scratch("badmap");
  std::ofstream(dir / "u.map") << "2 2 1 0.125 2\n0 0 1 0\n0.125 0 one 0\n";
  RunConfig cfg;
  cfg.set("map", (dir / "u.map").string());
  cfg.set("out", (dir / "out").string());
  std::string err;
  EXPECT_EQ(run("analyze", cfg, &err), 2);
  EXPECT_NE(err.find("line 3"), std::string::npos) << err;
  json j = read_json(dir / "out" / "error.json");
  EXPECT_EQ(j["line"], 3);
  EXPECT_EQ(j["status"], 2);
}

TEST(Cli, ParseErrorExitsWithTwo) {
  EXPECT_EQ(shell("frobnicate"), 2);
  EXPECT_EQ(shell("analyze -s k"), 2);
}

TEST(Cli, ZeroQuadratureToleranceFailsMonotonicity) {
  fs::path dir = scratch("tau0");
  RunConfig cfg;
  cfg.set("suites", "monotonicity");
  cfg.set("verify_centers", "2");
  cfg.set("out", dir.string());
  EXPECT_EQ(run("verify", cfg), 0);
  cfg.set("tau_q", "0");
  EXPECT_EQ(run("verify", cfg), 1);
  json j = read_json(dir / "verify.json");
  EXPECT_FALSE(j["pass"].get<bool>());
}

TEST(Cli, BruteForceOracleCanBeSkipped) {
  fs::path dir = scratch("skip");
  RunConfig cfg;
  cfg.set("suites", "beta_oracle");
  cfg.set("restarts", "0");
  cfg.set("out", dir.string());
  EXPECT_EQ(run("verify", cfg), 0);
  EXPECT_NE(slurp(dir / "verify.json").find("skipped"), std::string::npos);
}

TEST(Cli, ConstantMapHasEmptyStrata) {
  fs::path dir = scratch("constant");
  RunConfig cfg;
  cfg.set("map", "constant");
  cfg.set("r", "0.0625");
  cfg.set("candidate_radius", "0.1");
  cfg.set("out", dir.string());
  EXPECT_EQ(run("analyze", cfg), 0);
  std::string csv = slurp(dir / "minkowski.csv");
  EXPECT_NE(csv.find("0.0625,0,0,0,0"), std::string::npos) << csv;
}

TEST(Cli, AnalyzeIsDeterministic) {
  fs::path a = scratch("det_a"), b = scratch("det_b");
  RunConfig cfg;
  cfg.set("r", "0.0625,0.03125");
  cfg.set("candidate_radius", "0.06");
  cfg.set("out", a.string());
  ASSERT_EQ(run("analyze", cfg), 0);
  cfg.set("out", b.string());
  cfg.set("workers", "2");
  ASSERT_EQ(run("analyze", cfg), 0);
  for (const char* f : {"strata.csv", "minkowski.csv", "covering_0.txt", "covering_1.txt"})
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  json sa = read_json(a / "summary.json");
  EXPECT_TRUE(sa["pass"].get<bool>());
}

TEST(Cli, CollinearAtomsHaveZeroBeta) {
  fs::path dir = scratch("beta");
  {
    std::ofstream m(dir / "mu.txt");
    m << "3 9\n";
    for (int i = -4; i <= 4; ++i) m << 0.1 * i << ' ' << -0.05 * i << ' ' << 0.02 * i << " 1\n";
  }
  RunConfig cfg;
  cfg.set("measure", (dir / "mu.txt").string());
  cfg.set("k", "1");
  cfg.set("out", dir.string());
  EXPECT_EQ(run("beta", cfg), 0);
  json j = read_json(dir / "beta.json");
  EXPECT_LT(j["max_beta2"].get<double>(), 1e-10);
  EXPECT_EQ(j["atoms"], 9);
}

TEST(Cli, PlanarCoveringFailsReifenberg) {
  fs::path dir = scratch("planar");
  BallCovering c;
  c.m = 2;
  c.k = 1;
  for (int i = 0; i < 16; ++i)
    for (int j = 0; j < 16; ++j) {
      Vec x(2);
      x << -1.0 + (2 * i + 1) / 16.0, -1.0 + (2 * j + 1) / 16.0;
      c.balls.push_back({x, 1.0 / 16.0, BallLabel::final_ball});
    }
  write_covering((dir / "grid.txt").string(), c);
  RunConfig cfg;
  cfg.set("covering", (dir / "grid.txt").string());
  cfg.set("out", dir.string());
  EXPECT_EQ(run("reifenberg", cfg), 1);
  EXPECT_FALSE(read_json(dir / "reifenberg.json")["pass"].get<bool>());
}

TEST(Cli, CoverOutputFeedsReifenberg) {
  fs::path dir = scratch("cover");
  RunConfig cfg;
  cfg.set("cover_mode", "lemma2");
  cfg.set("r", "0.015625");
  cfg.set("candidate_radius", "0.1");
  cfg.set("enforce_decay", "false");
  cfg.set("out", dir.string());
  ASSERT_EQ(run("cover", cfg), 0);
  BallCovering c = read_covering((dir / "covering.txt").string());
  EXPECT_FALSE(c.balls.empty());
  RunConfig rc;
  rc.set("covering", (dir / "covering.txt").string());
  rc.set("out", (dir / "reif").string());
  EXPECT_EQ(run("reifenberg", rc), 0);
  EXPECT_TRUE(read_json(dir / "reif" / "reifenberg.json")["pass"].get<bool>());
}

TEST(Cli, LogLogSlope) {
  EXPECT_NEAR(loglog_slope({1.0, 0.5, 0.25}, {1.0, 0.125, 1.0 / 64.0}), 3.0, 1e-12);
}
