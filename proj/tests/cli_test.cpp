#include <lrarl/config.hpp>
#include <lrarl/serialize.hpp>

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>

using namespace lrarl;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code = -1;
  std::string output;  // stdout and stderr
};

Result cli(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + (env.empty() ? "" : " ") + std::string(LRARL_CLI_PATH) + " " + args + " 2>&1";
  Result r;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return r;
  char buf[4096];
  while (std::fgets(buf, sizeof buf, p)) r.output += buf;
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("lrarl_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

fs::path write_config(const fs::path& dir, const json& j) {
  const fs::path p = dir / "config.json";
  std::ofstream(p) << j.dump(2);
  return p;
}

json minimal_config() {
  return {{"instance", {{"states_per_layer", {1, 2, 2}}, {"action_count", 2}, {"rank", 2}, {"seed", 3}}},
          {"learners", {{{"name", "model-based-bandit"}}}},
          {"horizons", {1000}}};
}

}  // namespace

TEST(Cli, VerifyIdentitiesPasses) {
  const Result r = cli("verify --suite identities");
  EXPECT_EQ(r.code, 0) << r.output;
  EXPECT_NE(r.output.find("PASS identities: low-rank occupancy identity"), std::string::npos);
  EXPECT_EQ(r.output.find("FAIL"), std::string::npos);
}

TEST(Cli, VerifyUnknownSuiteIsUsageError) { EXPECT_EQ(cli("verify --suite nope").code, 2); }

TEST(Cli, UsageErrors) {
  EXPECT_EQ(cli("").code, 2);
  EXPECT_EQ(cli("launch").code, 2);
  EXPECT_EQ(cli("sweep --jobs 0 --preset simplex-small").code, 2);
  EXPECT_EQ(cli("run").code, 2);
  EXPECT_EQ(cli("run --config /nonexistent/config.json").code, 2);
  EXPECT_EQ(cli("gen --preset no-such-preset").code, 2);
}

TEST(Cli, GenIsDeterministic) {
  const fs::path a = scratch("gen_a"), b = scratch("gen_b");
  ASSERT_EQ(cli("gen --preset simplex-small --seed 7 --out " + a.string()).code, 0);
  ASSERT_EQ(cli("gen --preset simplex-small --seed 7 --out " + b.string()).code, 0);
  for (const char* f : {"mdp.json", "losses.jsonl"}) {
    const std::string x = read_file((a / f).string());
    EXPECT_FALSE(x.empty());
    EXPECT_EQ(x, read_file((b / f).string())) << f;
  }
  const LowRankMDP mdp = mdp_from_json(json::parse(read_file((a / "mdp.json").string())));
  EXPECT_EQ(mdp.states_per_layer(), (std::vector<int>{1, 2, 2}));
}

TEST(Cli, HorizonShorterThanEpochIsRejected) {
  const fs::path dir = scratch("short");
  json j = minimal_config();
  j["learners"] = {{{"name", "oracle-efficient"}, {"params", {{"N_reg", 5000}}}}};
  const Result r = cli("run --config " + write_config(dir, j).string());
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.output.find("fewer than N_reg=5000"), std::string::npos) << r.output;
  EXPECT_NE(r.output.find("/learners/0"), std::string::npos) << r.output;
}

TEST(Cli, UnknownKeyIsNamed) {
  const fs::path dir = scratch("etaa");
  json j = minimal_config();
  j["learners"] = {{{"name", "model-based-bandit"}, {"params", {{"etaa", 0.1}}}}};
  const Result r = cli("run --config " + write_config(dir, j).string());
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.output.find("/learners/0/params"), std::string::npos) << r.output;
  EXPECT_NE(r.output.find("etaa"), std::string::npos) << r.output;
}

TEST(Cli, MalformedJsonIsUsageError) {
  const fs::path dir = scratch("malformed");
  std::ofstream(dir / "config.json") << "{ \"instance\": ";
  EXPECT_EQ(cli("run --config " + (dir / "config.json").string()).code, 2);
}

TEST(Cli, RunEchoesDefaultsAndOverrides) {
  const fs::path dir = scratch("run");
  json j = minimal_config();
  j["learners"] = {{{"name", "model-based-bandit"}}, {{"name", "full-info"}}};
  j["output_dir"] = "out";
  const Result r = cli("run --config " + write_config(dir, j).string());
  ASSERT_EQ(r.code, 0) << r.output;
  const json eff = json::parse(read_file((dir / "out" / "effective_config.json").string()));
  ASSERT_EQ(eff["learners"].size(), 1u);
  const json& mb = eff["learners"][0]["params"]["1000"];
  const double T = 1000.0;
  EXPECT_NEAR(mb["epsilon"].get<double>(), std::pow(T, -1.0 / 3.0), 1e-15);
  EXPECT_NEAR(mb["gamma"].get<double>(), std::pow(T, -1.0 / 3.0), 1e-15);
  EXPECT_NEAR(mb["beta"].get<double>(), std::pow(T, -1.0 / 3.0), 1e-15);
  EXPECT_NEAR(mb["eta"].get<double>(), std::pow(T, -2.0 / 3.0) / (4.0 * 3 * 2 * 2), 1e-15);
  EXPECT_TRUE(fs::exists(dir / "out" / "curves" / "model-based-bandit_T1000_s0.csv"));
  EXPECT_TRUE(fs::exists(dir / "out" / "records" / "model-based-bandit_T1000_s0.rounds.jsonl"));
  EXPECT_TRUE(fs::exists(dir / "out" / "summary.csv"));

  j["learners"] = {{{"name", "full-info"}, {"params", {{"eta", 0.05}}}}};
  ASSERT_EQ(cli("run --config " + write_config(dir, j).string()).code, 0);
  const json eff2 = json::parse(read_file((dir / "out" / "effective_config.json").string()));
  EXPECT_EQ(eff2["learners"][0]["params"]["1000"]["eta"].get<double>(), 0.05);
}

TEST(Cli, ScheduleDefaultsForEpochLearners) {
  const fs::path dir = scratch("epochs");
  json j = minimal_config();
  j["learners"] = {{{"name", "oracle-efficient"}}, {{"name", "adaptive"}}};
  j["horizons"] = {8000};
  j["output_dir"] = "out";
  const fs::path cfg = write_config(dir, j);
  ASSERT_EQ(cli("sweep --jobs 2 --config " + cfg.string()).code, 0);
  const json eff = json::parse(read_file((dir / "out" / "effective_config.json").string()));
  const json& oe = eff["learners"][0]["params"]["8000"];
  const json& ad = eff["learners"][1]["params"]["8000"];
  EXPECT_EQ(oe["N_reg"].get<int>(), 400);
  EXPECT_NEAR(oe["nu"].get<double>(), 1.0 / 20.0, 1e-15);
  EXPECT_NEAR(oe["epsilon"].get<double>(), 0.05, 1e-15);
  EXPECT_NEAR(ad["nu"].get<double>(), std::pow(400.0, -0.25), 1e-15);
  EXPECT_NEAR(ad["alpha"].get<double>(), 1.0 / 32.0, 1e-15);
}

TEST(Cli, SeedEnvironmentVariableOverridesConfig) {
  const fs::path dir = scratch("env");
  json j = minimal_config();
  j["learners"] = {{{"name", "full-info"}}};
  j["seeds"] = {0, 1};
  j["output_dir"] = "out";
  const fs::path cfg = write_config(dir, j);
  ASSERT_EQ(cli("sweep --config " + cfg.string(), "LRARL_SEED=42").code, 0);
  const std::string summary = read_file((dir / "out" / "summary.csv").string());
  EXPECT_NE(summary.find("full-info,1000,42,"), std::string::npos) << summary;
  EXPECT_EQ(summary.find("full-info,1000,0,"), std::string::npos) << summary;
}

TEST(Cli, SweepIsByteIdenticalAcrossJobsAndReportRebuildsIt) {
  const fs::path dir = scratch("sweep");
  const fs::path a = dir / "a", b = dir / "b";
  const std::string cfg = fs::path(LRARL_SOURCE_DIR) / "configs" / "smoke.json";
  ASSERT_EQ(cli("sweep --jobs 1 --config " + cfg + " --out " + a.string()).code, 0);
  ASSERT_EQ(cli("sweep --jobs 3 --config " + cfg + " --out " + b.string()).code, 0);
  const std::string sa = read_file((a / "summary.csv").string());
  EXPECT_EQ(sa, read_file((b / "summary.csv").string()));
  fs::remove(a / "summary.csv");
  const Result r = cli("report --out " + a.string());
  ASSERT_EQ(r.code, 0) << r.output;
  EXPECT_EQ(read_file((a / "summary.csv").string()), sa);
  EXPECT_EQ(r.output, sa);
  EXPECT_EQ(cli("report --out " + (dir / "missing").string()).code, 2);
}
