#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "anisolab/cli.h"
#include "anisolab/report.h"

namespace anisolab::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    root_ = fs::temp_directory_path() /
            ("anisolab-cli-" + std::to_string(::getpid()) + "-" + info->name());
    fs::remove_all(root_);
    fs::create_directories(root_);
  }
  void TearDown() override { fs::remove_all(root_); }

  fs::path write_config(const std::string& name, const json& j) {
    const fs::path p = root_ / (name + ".json");
    std::ofstream(p) << j.dump(2);
    return p;
  }

  int run_verb(const std::string& verb, const fs::path& config,
               const fs::path& out, bool deterministic = true) {
    RunOptions o;
    o.verb = verb;
    o.config = config;
    o.out = out;
    o.deterministic = deterministic;
    out_.str("");
    err_.str("");
    return run(o, out_, err_);
  }

  fs::path root_;
  std::ostringstream out_;
  std::ostringstream err_;
};

json linear_1d() {
  return {{"name", "line"},
          {"problem",
           {{"box", {{"lo", {-1.0}}, {"hi", {1.0}}}},
            {"nodes", 33},
            {"exponents", {2.0}},
            {"boundary", "2*x1 + 1"}}},
          {"checks", {"weak_residual"}}};
}

json planar(const json& checks) {
  return {{"name", "planar"},
          {"problem",
           {{"box", {{"center", {0.0, 0.0}}, {"half_widths", {1.0, 1.0}}}},
            {"nodes", 33},
            {"exponents", {1.5, 2.0}},
            {"boundary", "sin(2*x1) + x2^2 - 0.5*x1*x2"}}},
          {"checks", checks},
          {"geometry", {{"rho", 0.25}, {"q", 1}}},
          {"decay", {{"levels", 6}, {"rho0", 0.45}, {"pairs", 500}}},
          {"weak_trials", 40},
          {"structure_samples", 100}};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

TEST(ParseConfig, MinimalAndDefaults) {
  const ExperimentConfig c = parse_config(linear_1d());
  EXPECT_EQ(c.name, "line");
  EXPECT_EQ(c.problem.nodes, std::vector<std::size_t>{33});
  EXPECT_EQ(c.problem.box.center[0], 0.0);
  EXPECT_EQ(c.problem.box.half_widths[0], 1.0);
  EXPECT_EQ(c.checks, std::vector<std::string>{"weak_residual"});
  EXPECT_EQ(c.geometry.center, Point{0.0});
  EXPECT_EQ(c.seed, 20240601u);
}

TEST(ParseConfig, UnknownChecksListed) {
  json j = linear_1d();
  j["checks"] = {"weak_residual", "degiorgi_plsu", "holdr_fit"};
  try {
    parse_config(j);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("degiorgi_plsu"), std::string::npos);
    EXPECT_NE(msg.find("holdr_fit"), std::string::npos);
    for (const auto& k : known_checks()) {
      EXPECT_NE(msg.find(k), std::string::npos) << k;
    }
  }
}

TEST(ParseConfig, SchemaErrors) {
  json no_problem = linear_1d();
  no_problem.erase("problem");
  EXPECT_THROW(parse_config(no_problem), ConfigError);

  json nodes = linear_1d();
  nodes["problem"]["nodes"] = {33, 33};
  EXPECT_THROW(parse_config(nodes), ConfigError);

  json expr = linear_1d();
  expr["problem"]["boundary"] = "2*x1 +";
  EXPECT_THROW(parse_config(expr), ConfigError);

  json dim = linear_1d();
  dim["problem"]["boundary"] = "x2";
  EXPECT_THROW(parse_config(dim), ConfigError);

  json seed = linear_1d();
  seed["seed"] = "abc";
  EXPECT_THROW(parse_config(seed), ConfigError);
}

TEST_F(CliTest, MinimalLineCheckSucceeds) {
  const fs::path cfg = write_config("line", linear_1d());
  EXPECT_EQ(run_verb("check", cfg, root_ / "out"), kExitOk) << err_.str();
  for (const char* f : {"solution.field", "solve.json", "energy.csv",
                        "weak_residual.json", "summary.csv"}) {
    EXPECT_TRUE(fs::exists(root_ / "out" / f)) << f;
  }
  const json rep = json::parse(slurp(root_ / "out" / "weak_residual.json"));
  EXPECT_EQ(rep.at("state"), "pass");
}

TEST_F(CliTest, SolveOnlyWritesSolution) {
  const fs::path cfg = write_config("line", linear_1d());
  EXPECT_EQ(run_verb("solve", cfg, root_ / "out"), kExitOk);
  EXPECT_TRUE(fs::exists(root_ / "out" / "solution.field"));
  EXPECT_FALSE(fs::exists(root_ / "out" / "weak_residual.json"));
}

TEST_F(CliTest, FailedCheckExitsOne) {
  json j = planar({"weak_residual"});
  j["weak_factor"] = 1e-9;
  const fs::path cfg = write_config("strict", j);
  EXPECT_EQ(run_verb("check", cfg, root_ / "out"), kExitCheckFailed);
  const json rep = json::parse(slurp(root_ / "out" / "weak_residual.json"));
  EXPECT_EQ(rep.at("state"), "fail");
}

TEST_F(CliTest, NonConvergenceExitsThree) {
  json j = planar({"weak_residual"});
  j["problem"]["max_iter"] = 1;
  const fs::path cfg = write_config("short", j);
  EXPECT_EQ(run_verb("check", cfg, root_ / "out"), kExitNotConverged);
  EXPECT_TRUE(fs::exists(root_ / "out" / "solve.json"));
}

TEST_F(CliTest, BadConfigExitsTwo) {
  json j = linear_1d();
  j["checks"] = {"weak_residul"};
  const fs::path cfg = write_config("typo", j);
  EXPECT_EQ(run_verb("check", cfg, root_ / "out"), kExitBadConfig);
  EXPECT_NE(err_.str().find("weak_residul"), std::string::npos);

  EXPECT_EQ(run_verb("check", root_ / "missing.json", root_ / "out"),
            kExitBadConfig);

  json far = planar({"caccioppoli"});
  far["geometry"]["center"] = {0.9, 0.0};
  EXPECT_EQ(run_verb("check", write_config("far", far), root_ / "far"),
            kExitBadConfig);
}

TEST_F(CliTest, ReportEmptyDirectoryExitsTwo) {
  fs::create_directories(root_ / "empty");
  std::ostringstream out, err;
  EXPECT_EQ(report(root_ / "empty", out, err), kExitBadConfig);
  EXPECT_EQ(report(root_ / "nowhere", out, err), kExitBadConfig);
}

TEST_F(CliTest, ReportListsFailuresFirst) {
  const fs::path dir = root_ / "reports";
  fs::create_directories(dir);
  InequalityReport ok;
  ok.check_name = "troisi";
  ok.anchor = "alpha";
  ok.state = CheckState::kPass;
  ok.ratio = 1.5;
  InequalityReport bad = ok;
  bad.check_name = "modulus";
  bad.state = CheckState::kFail;
  std::ofstream(dir / "a_first.json") << to_json(ok).dump();
  std::ofstream(dir / "b_second.json") << to_json(ok).dump();
  std::ofstream(dir / "z_last.json") << to_json(bad).dump();
  std::ofstream(dir / "notes.json") << "{\"unrelated\": 1}";
  std::ostringstream out, err;
  ASSERT_EQ(report(dir, out, err), kExitOk);
  std::istringstream lines(out.str());
  std::string header, first, second, third, extra;
  std::getline(lines, header);
  std::getline(lines, first);
  std::getline(lines, second);
  std::getline(lines, third);
  EXPECT_NE(header.find("state"), std::string::npos);
  EXPECT_EQ(first.rfind("z_last", 0), 0u) << first;
  EXPECT_NE(first.find("fail"), std::string::npos);
  EXPECT_EQ(second.rfind("a_first", 0), 0u);
  EXPECT_EQ(third.rfind("b_second", 0), 0u);
  EXPECT_FALSE(std::getline(lines, extra));
}

TEST_F(CliTest, DeterministicRunsAreByteIdentical) {
  const fs::path cfg = write_config(
      "det", planar({"weak_residual", "caccioppoli", "degiorgi_plus",
                     "shrink_chain", "recursion", "sup_bound", "holder_fit",
                     "modulus"}));
  const int a = run_verb("check", cfg, root_ / "a");
  const int b = run_verb("check", cfg, root_ / "b");
  EXPECT_EQ(a, b);
  std::size_t compared = 0;
  for (const auto& e : fs::directory_iterator(root_ / "a")) {
    const fs::path other = root_ / "b" / e.path().filename();
    ASSERT_TRUE(fs::exists(other)) << other;
    EXPECT_EQ(slurp(e.path()), slurp(other)) << e.path().filename();
    ++compared;
  }
  EXPECT_GT(compared, 8u);
}

TEST_F(CliTest, SeedOverrideChangesSampledChecks) {
  const fs::path cfg = write_config("seeded", planar({"weak_residual"}));
  RunOptions o;
  o.verb = "check";
  o.config = cfg;
  o.deterministic = true;
  o.out = root_ / "s1";
  o.seed = 1;
  ASSERT_NE(run(o, out_, err_), kExitBadConfig);
  o.out = root_ / "s2";
  o.seed = 2;
  ASSERT_NE(run(o, out_, err_), kExitBadConfig);
  const json a = json::parse(slurp(root_ / "s1" / "weak_residual.json"));
  const json b = json::parse(slurp(root_ / "s2" / "weak_residual.json"));
  EXPECT_EQ(a.at("seed"), 1);
  EXPECT_EQ(b.at("seed"), 2);
}

TEST_F(CliTest, SweepWritesOneReportPerPoint) {
  json j = planar({"caccioppoli", "poincare_measure"});
  j["geometry"]["rho"] = {0.2, 0.25};
  j["geometry"]["sigma"] = {0.25, 0.5, 0.75};
  const fs::path cfg = write_config("sweep", j);
  const int code = run_verb("sweep", cfg, root_ / "out");
  EXPECT_TRUE(code == kExitOk || code == kExitCheckFailed);
  for (int i = 0; i < 6; ++i) {
    const fs::path f =
        root_ / "out" / ("caccioppoli_plus-" + std::to_string(i) + ".json");
    ASSERT_TRUE(fs::exists(f)) << f;
    EXPECT_TRUE(json::parse(slurp(f)).contains("sweep_point"));
  }
  EXPECT_TRUE(fs::exists(root_ / "out" / "sweep.csv"));
}

TEST_F(CliTest, OutputRootFromEnvironment) {
  ::setenv("ANISOLAB_OUTPUT_ROOT", (root_ / "envroot").c_str(), 1);
  RunOptions o;
  o.verb = "check";
  ExperimentConfig c = parse_config(linear_1d());
  EXPECT_EQ(output_directory(o, c), root_ / "envroot" / "line");
  c.output = "custom";
  EXPECT_EQ(output_directory(o, c), root_ / "envroot" / "custom");
  o.out = root_ / "explicit";
  EXPECT_EQ(output_directory(o, c), root_ / "explicit");
  ::unsetenv("ANISOLAB_OUTPUT_ROOT");
  o.out.reset();
  EXPECT_EQ(output_directory(o, c), fs::path("anisolab-out") / "custom");
}

int shell(const std::string& cmd) {
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST_F(CliTest, BinaryExitCodes) {
#ifdef ANISOLAB_CLI_PATH
  const char* bin = ANISOLAB_CLI_PATH;
#else
  const char* bin = std::getenv("ANISOLAB_CLI_PATH");
#endif
  if (bin == nullptr) GTEST_SKIP() << "CLI binary path unknown";
  const std::string b = std::string("'") + bin + "'";
  const fs::path cfg = write_config("line", linear_1d());
  const std::string quiet = " >/dev/null 2>&1";
  EXPECT_EQ(shell(b + " check --deterministic --config '" + cfg.string() +
                  "' --out '" + (root_ / "o").string() + "'" + quiet),
            kExitOk);
  EXPECT_EQ(shell(b + " report '" + (root_ / "o").string() + "'" + quiet),
            kExitOk);
  fs::create_directories(root_ / "empty");
  EXPECT_EQ(shell(b + " report '" + (root_ / "empty").string() + "'" + quiet),
            kExitBadConfig);
  EXPECT_EQ(shell(b + quiet), kExitBadConfig);
  EXPECT_EQ(shell(b + " check" + quiet), kExitBadConfig);
  EXPECT_EQ(shell(b + " check --config '" + cfg.string() + "' --jobs 0" + quiet),
            kExitBadConfig);
}

}  // namespace
}  // namespace anisolab::cli
