#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>

#include "dcg/io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path root = fs::temp_directory_path() / "dcg_test_cli";

struct Run {
  int status;
  std::string err;
};

Run run(const std::string& args) {
  fs::create_directories(root);
  const auto err = root / "stderr.txt";
  const std::string cmd = std::string(DCG_CLI_PATH) + " " + args + " >/dev/null 2>" + err.string();
  const int raw = std::system(cmd.c_str());
  return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, dcg::io::read_text(err)};
}

std::string out(const std::string& name) { return (root / name).string(); }

} // namespace

TEST(Cli, HelpAndVersion) {
  EXPECT_EQ(run("--help").status, 0);
  EXPECT_EQ(run("--version").status, 0);
  EXPECT_EQ(run("solve-ring --help").status, 0);
}

TEST(Cli, UsageErrorsExitOne) {
  auto r = run("frobnicate");
  EXPECT_EQ(r.status, 1);
  EXPECT_EQ(r.err.rfind("dcg: error status=1", 0), 0u) << r.err;
  EXPECT_EQ(std::count(r.err.begin(), r.err.end(), '\n'), 1);
  EXPECT_EQ(run("").status, 1);
  EXPECT_EQ(run("stationary --depth abc").status, 1);
}

TEST(Cli, ValidationErrorsExitOne) {
  auto r = run("solve-chain --N 1 --out " + out("n1"));
  EXPECT_EQ(r.status, 1);
  EXPECT_NE(r.err.find("kind=validation"), std::string::npos);
  EXPECT_EQ(run("solve-ring --eps -1 --out " + out("neg")).status, 1);
  EXPECT_EQ(run("solve-chain --T 1 --step 0.3 --out " + out("grid")).status, 1);
  EXPECT_EQ(run("simulate --M 10 --J 10 --out " + out("mj")).status, 1);
  EXPECT_EQ(run("stationary --format xml --out " + out("fmt")).status, 1);
  dcg::io::write_text(root / "bad.json", R"({"depth": 5, "nonsense": 1})");
  EXPECT_EQ(run("stationary --config " + out("bad.json") + " --out " + out("cfg")).status, 1);
  dcg::io::write_text(root / "broken.json", "{ not json");
  EXPECT_EQ(run("stationary --config " + out("broken.json") + " --out " + out("cfg")).status, 1);
  dcg::io::write_text(root / "typed.json", R"({"depth": "ten"})");
  EXPECT_EQ(run("stationary --config " + out("typed.json") + " --out " + out("cfg")).status, 1);
}

TEST(Cli, BlowUpExitsTwo) {
  auto r = run("solve-chain --eps 1e6 --T 10 --step 0.5 --out " + out("blow"));
  EXPECT_EQ(r.status, 2);
  EXPECT_NE(r.err.find("kind=blowup"), std::string::npos);
}

TEST(Cli, IoErrorsExitThree) {
  EXPECT_EQ(run("stationary --out /proc/dcg/out").status, 3);
  EXPECT_EQ(run("stationary --config " + out("does-not-exist.json") + " --out " + out("x")).status, 3);
}

TEST(Cli, StationaryArtifacts) {
  ASSERT_EQ(run("stationary --depth 3 --out " + out("st")).status, 0);
  EXPECT_EQ(dcg::io::read_text(root / "st" / "stationary.csv"), "k,phi\n0,1\n1,-0.5\n2,-0.125\n3,-0.0625\n");
  const auto m = json::parse(dcg::io::read_text(root / "st" / "manifest.json"));
  EXPECT_EQ(m["command"], "stationary");
  EXPECT_EQ(m["config"]["depth"], 3);
  EXPECT_TRUE(m.contains("wall_time_seconds"));
  EXPECT_EQ(m["files"].size(), 3u);
}

TEST(Cli, FormatSelection) {
  ASSERT_EQ(run("variance --t 1,2 --format json --out " + out("vj")).status, 0);
  EXPECT_TRUE(fs::exists(root / "vj" / "variance.json"));
  EXPECT_FALSE(fs::exists(root / "vj" / "variance.csv"));
  const auto j = json::parse(dcg::io::read_text(root / "vj" / "variance.json"));
  EXPECT_NEAR(j["asymptotic_variance"].get<double>(), std::sqrt(0.5), 1e-15);
}

TEST(Cli, ManifestConfigReproducesArtifacts) {
  ASSERT_EQ(run("table1 --u 0,0.25,0.5 --depth 30 --out " + out("t1a")).status, 0);
  ASSERT_EQ(run("table1 --config " + out("t1a/manifest.json") + " --out " + out("t1b")).status, 0);
  for (const char* f : {"table1.csv", "table1.json"})
    EXPECT_EQ(dcg::io::read_text(root / "t1a" / f), dcg::io::read_text(root / "t1b" / f)) << f;
}

TEST(Cli, SimulateWritesBundle) {
  ASSERT_EQ(run("simulate --M 12 --J 4 --paths 20 --t-end 1 --players 1,2 --threads 2 --out " + out("sim")).status, 0);
  const auto b = dcg::io::read_bundle(root / "sim" / "trajectories.bin");
  EXPECT_EQ(b.n_paths, 20u);
  EXPECT_EQ(b.players, (std::vector<int>{1, 2}));
  ASSERT_EQ(run("simulate --M 12 --J 4 --paths 20 --t-end 1 --players 1,2 --threads 1 --out " + out("sim1")).status, 0);
  EXPECT_EQ(dcg::io::read_text(root / "sim" / "trajectories.bin"), dcg::io::read_text(root / "sim1" / "trajectories.bin"));
  const auto j = json::parse(dcg::io::read_text(root / "sim" / "simulate.json"));
  EXPECT_FALSE(j["warnings"].empty());
}

TEST(Cli, EveryCommandRuns) {
  for (const std::string c : {"solve-chain --bc general --m 0.5", "solve-ring --N 6", "solve-tree --d 3 --depth 8",
                              "solve-infinite --depth 8", "solve-mixed --u 0.5", "solve-mixed --u 0.5 --N 4",
                              "transition --kind mixed --u 0.5 --paths 100", "covariance --u 0.5 --t 1,2",
                              "verify-conjecture --N 4,8 --step 0.01", "verify-bc --N 4", "identity-suite --step 0.01"}) {
    const auto r = run(c + " --out " + out("all"));
    EXPECT_EQ(r.status, 0) << c << ": " << r.err;
  }
}
