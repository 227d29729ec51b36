#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

namespace {

namespace fs = std::filesystem;

struct Outcome {
  int code = -1;
  std::string out;  // stdout and stderr interleaved
};

Outcome run(const std::string& args) {
  const std::string cmd = std::string(CENTROIDAL_KIT_CLI) + " " + args + " 2>&1";
  Outcome r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("centroidal_kit_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TEST(Cli, FlatnessVerdictSetsExitCode) {
  const fs::path dir = scratch("flat");
  const Outcome flat = run("check-flatness --model three-link:d=0 --out " + dir.string());
  EXPECT_EQ(flat.code, 0) << flat.out;
  EXPECT_NE(flat.out.find("verdict: flat"), std::string::npos);
  const auto j = nlohmann::json::parse(slurp(dir / "flatness.json"));
  EXPECT_EQ(j["verdict"], "flat");
  EXPECT_EQ(j["grid"][0]["count"], 20);
  EXPECT_LE(j["max_norm"].get<double>(), 1e-7);

  const Outcome bent = run("check-flatness --model three-link:d=1 --grid 10 --threads 2");
  EXPECT_EQ(bent.code, 2) << bent.out;
  EXPECT_NE(bent.out.find("verdict: non-flat"), std::string::npos);
  EXPECT_NE(bent.out.find("worst: B_12"), std::string::npos);
}

TEST(Cli, ExplicitGridAndTolerance) {
  const Outcome r = run("check-flatness --model three-link:d=1 --grid=-0.5:0.5:3,-0.5:0.5:3 --tol 1 --h 1e-3");
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("grid points: 9"), std::string::npos);
}

TEST(Cli, ErrorsExitWithOne) {
  const Outcome missing = run("check-flatness --model missing.toml");
  EXPECT_EQ(missing.code, 1);
  EXPECT_NE(missing.out.find("missing.toml"), std::string::npos);
  EXPECT_EQ(run("check-flatness").code, 1);
  EXPECT_EQ(run("no-such-command").code, 1);
  EXPECT_EQ(run("holonomy --model three-link:d=1 --trajectory sinusoid:T=abc").code, 1);
  EXPECT_EQ(run("--help").code, 0);
}

TEST(Cli, HolonomyWritesTrajectoryAndSnapshots) {
  const fs::path dir = scratch("holonomy");
  const Outcome r = run("holonomy --model three-link:d=1 --snapshots 6 --out " + dir.string());
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("drift angle [rad]: 0.5936103730"), std::string::npos) << r.out;
  for (int k = 0; k < 6; ++k) {
    const fs::path svg = dir / ("snapshot_0" + std::to_string(k) + ".svg");
    ASSERT_TRUE(fs::exists(svg)) << svg;
    EXPECT_EQ(slurp(svg).rfind("<svg", 0), 0u);
  }
  EXPECT_FALSE(fs::exists(dir / "snapshot_06.svg"));
  EXPECT_NE(r.out.find("t = 10.000 s"), std::string::npos);
  const std::string csv = slurp(dir / "centroidal.csv");
  EXPECT_EQ(csv.rfind("t,r11", 0), 0u);
}

TEST(Cli, SimulateConservesMomentum) {
  const Outcome r = run("simulate --model three-link:d=1 --gravity 0,0,0 --random-ic 4 --t-end 2 --check-conservation");
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("conservation J_A"), std::string::npos);
  EXPECT_NE(r.out.find("conservation J_G"), std::string::npos);
}

TEST(Cli, ForcedSimulationMatchesMomentumRate) {
  const Outcome r = run(
      "simulate --model three-link:d=1 --t-end 1 --random-ic 2 --wrench link1:1,0,2,0,0.5,0 "
      "--wrench-at 1,0,0 --wrench-window 0.2,0.6 --check-conservation");
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("momentum rate vs d/dt J_A"), std::string::npos);
}

TEST(Cli, MomentumFromRestWithoutGravityIsZero) {
  const fs::path dir = scratch("momentum");
  const Outcome r = run("momentum --model three-link:d=1 --gravity 0,0,0 --t-end 1 --stride 100 --out " + dir.string());
  ASSERT_EQ(r.code, 0) << r.out;
  std::istringstream in(slurp(dir / "momentum.csv"));
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line.rfind("t,JA_fx", 0), 0u);
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    std::istringstream cells(line);
    std::string cell;
    std::getline(cells, cell, ',');  // t
    for (int k = 0; k < 12; ++k) {
      ASSERT_TRUE(std::getline(cells, cell, ','));
      EXPECT_EQ(std::stod(cell), 0.0) << line;
    }
  }
  EXPECT_EQ(rows, 11);
}

TEST(Cli, InfoSummarizesModel) {
  const Outcome r = run("info --model three-link:d=1");
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("links: 3, joints: 2, total mass: 3 kg"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("model hash: "), std::string::npos);
  const Outcome dump = run("info --model three-link:d=0 --dump");
  EXPECT_NE(dump.out.find("\"joints\""), std::string::npos);
}

}  // namespace
