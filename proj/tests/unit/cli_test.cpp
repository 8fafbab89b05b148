#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "service/manifest.hpp"
#include "test_support.hpp"

namespace {

using nlohmann::json;

struct RunResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

RunResult run_cli(const std::string& args) {
  static int calls = 0;
  const auto dir = std::filesystem::temp_directory_path();
  const std::string tag = std::to_string(getpid()) + "_" + std::to_string(calls++);
  const auto out_path = dir / ("tda_cli_out_" + tag + ".txt");
  const auto err_path = dir / ("tda_cli_err_" + tag + ".txt");
  const std::string command =
      std::string(TDA_CLI_PATH) + " " + args + " > " + out_path.string() + " 2> " + err_path.string();
  const int status = std::system(command.c_str());
  RunResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::stringstream out, err;
  out << std::ifstream(out_path).rdbuf();
  err << std::ifstream(err_path).rdbuf();
  r.out = out.str();
  r.err = err.str();
  std::filesystem::remove(out_path);
  std::filesystem::remove(err_path);
  return r;
}

json first_json_line(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  return json::parse(line);
}

TEST(Cli, MissingInputIsExit2WithInputError) {
  const auto dir = tda::test::scratch_dir("cli_missing");
  const auto r = run_cli("ingest --input " + (dir / "nope.csv").string() + " --project " + (dir / "p").string());
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_EQ(first_json_line(r.err).at("error").at("code"), "E_INPUT");
}

TEST(Cli, BadFlagIsConfigError) {
  const auto r = run_cli("topology --project /tmp --function f --k notanumber");
  EXPECT_EQ(r.exit_code, 5);
  EXPECT_EQ(first_json_line(r.err).at("error").at("code"), "E_CONFIG");
}

TEST(Cli, HelpExitsZero) {
  const auto r = run_cli("--help");
  EXPECT_EQ(r.exit_code, 0);
  EXPECT_NE(r.out.find("graph-stats"), std::string::npos);
}

TEST(Cli, RunsLogWallTimeAndPeakMemory) {
  const auto dir = tda::test::scratch_dir("cli_stats");
  const auto r = run_cli("synth --preset two-gaussians --n 100 --output " + (dir / "g.csv").string());
  EXPECT_EQ(r.exit_code, 0);
  const auto log = first_json_line(r.err).at("run");
  EXPECT_EQ(log.at("command"), "synth");
  EXPECT_GT(log.at("peak_rss_bytes").get<std::size_t>(), 0u);
  EXPECT_GE(log.at("wall_seconds").get<double>(), 0.0);
}

TEST(Cli, GraphStatsOnSquareHasThreeRows) {
  const auto dir = tda::test::scratch_dir("cli_square");
  std::ofstream(dir / "sq.csv") << "x0,x1,f\n0,0,0\n1,0,1\n0,1,2\n1,1,3\n";
  const auto r = run_cli("graph-stats --input " + (dir / "sq.csv").string() + " --k 8,16,32");
  EXPECT_EQ(r.exit_code, 0);
  EXPECT_EQ(r.out, "k_requested,k,edges\n8,3,4\n16,3,4\n32,3,4\n");
}

TEST(Cli, TopologyThenCubesIsIdempotent) {
  const auto dir = tda::test::scratch_dir("cli_pipeline");
  const std::string p = (dir / "p").string();
  ASSERT_EQ(run_cli("synth --preset two-gaussians --n 3000 --seed 4 --output " + (dir / "g.csv").string()).exit_code, 0);
  ASSERT_EQ(run_cli("ingest --input " + (dir / "g.csv").string() + " --project " + p).exit_code, 0);
  ASSERT_EQ(run_cli("topology --project " + p + " --function f --k 16").exit_code, 0);
  ASSERT_EQ(run_cli("cubes --project " + p + " --resolution 32 --leaves 16").exit_code, 0);
  const auto m = tda::service::load_manifest(dir / "p");
  ASSERT_TRUE(m.topology);
  ASSERT_TRUE(m.cubes);
  const auto topo = tda::test::read_bytes(dir / "p" / "topology.tdt");
  const auto cubes = tda::test::read_bytes(dir / "p" / "cubes.tdq");

  ASSERT_EQ(run_cli("topology --project " + p + " --function f --k 16").exit_code, 0);
  ASSERT_EQ(run_cli("cubes --project " + p + " --resolution 32 --leaves 16").exit_code, 0);
  EXPECT_EQ(tda::test::read_bytes(dir / "p" / "topology.tdt"), topo);
  EXPECT_EQ(tda::test::read_bytes(dir / "p" / "cubes.tdq"), cubes);
  const auto again = tda::service::load_manifest(dir / "p");
  EXPECT_EQ(again.topology->artifact.sha256, m.topology->artifact.sha256);
  EXPECT_EQ(again.cubes->artifact.sha256, m.cubes->artifact.sha256);
}

TEST(Cli, OracleSubcommandPasses) {
  const auto dir = tda::test::scratch_dir("cli_oracle");
  ASSERT_EQ(run_cli("synth --preset two-gaussians --n 300 --output " + (dir / "g.csv").string()).exit_code, 0);
  const auto r = run_cli("oracle --input " + (dir / "g.csv").string() + " --function f --k 12");
  EXPECT_EQ(r.exit_code, 0) << r.err;
  EXPECT_TRUE(first_json_line(r.out).at("passed").get<bool>());
}

TEST(Cli, ServeWithoutCubesIsConfigError) {
  const auto dir = tda::test::scratch_dir("cli_serve");
  ASSERT_EQ(run_cli("synth --preset two-gaussians --n 200 --output " + (dir / "g.csv").string()).exit_code, 0);
  ASSERT_EQ(run_cli("ingest --input " + (dir / "g.csv").string() + " --project " + (dir / "p").string()).exit_code, 0);
  const auto r = run_cli("serve --project " + (dir / "p").string() + " --port 0");
  EXPECT_EQ(r.exit_code, 5);
  EXPECT_EQ(first_json_line(r.err).at("error").at("code"), "E_CONFIG");
}

}  // namespace
