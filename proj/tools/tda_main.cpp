#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <chrono>
#include <csignal>
#include <fstream>
#include <iostream>
#include <thread>

#include "service/http_server.hpp"
#include "service/pipeline.hpp"
#include "service/query_engine.hpp"
#include "service/run_stats.hpp"
#include "tda/error.hpp"

namespace {

using namespace tda;
using namespace tda::service;
using nlohmann::json;

constexpr int kOracleMismatchExit = 6;

std::atomic<bool> g_stop{false};

extern "C" void on_signal(int) { g_stop = true; }

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::input:
      return 2;
    case ErrorCode::schema:
      return 3;
    case ErrorCode::format:
      return 4;
    case ErrorCode::config:
    case ErrorCode::not_found:
    case ErrorCode::conflict:
      return 5;
    default:
      return 1;
  }
}

int report_error(ErrorCode code, const std::string& message) {
  std::cerr << error_json(code, message) << '\n';
  return exit_code_for(code);
}

struct SourceFlags {
  std::string input;
  std::string format = "csv";
  std::vector<std::string> domain;
  std::vector<std::string> measures;

  void add(CLI::App* app) {
    app->add_option("--input", input, "Input table (CSV or TDC1)")->required();
    app->add_option("--format", format, "csv or tdc")->capture_default_str();
    app->add_option("--domain", domain, "Domain columns (default: all but the last)")->delimiter(',');
    app->add_option("--measures", measures, "Measure columns (default: the last)")->delimiter(',');
  }

  TableSource source() const { return {input, parse_format(format), {domain, measures}}; }
};

struct EdgeFlags {
  std::size_t k = 16;
  double beta = 1.0;
  std::string witness_mode = "strict";
  bool symmetrize = true;

  void add(CLI::App* app) {
    app->add_option("--k", k, "Neighbors per vertex")->capture_default_str();
    app->add_option("--beta", beta, "Lune parameter (1 = Gabriel)")->capture_default_str();
    app->add_option("--witness-mode", witness_mode, "strict or relaxed")->capture_default_str();
    app->add_option("--symmetrize", symmetrize, "Keep an edge when either endpoint has it")->capture_default_str();
  }

  EdgeStreamConfig config() const { return {k, beta, parse_witness_mode(witness_mode), symmetrize}; }
};

struct FunctionFlags {
  std::string column;
  std::string transform = "identity";

  void add(CLI::App* app) {
    app->add_option("--function", column, "Measure column analyzed as f")->required();
    app->add_option("--transform", transform, "identity or negate")->capture_default_str();
  }

  FunctionSelector selector() const { return {column, parse_transform(transform)}; }
};

void wait_for_signal(HttpServer& server) {
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  std::thread listener([&server] { server.listen(); });
  while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
  server.stop();
  listener.join();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Topological exploration of high-dimensional samples"};
  app.require_subcommand(1);

  SourceFlags src;
  EdgeFlags edges;
  FunctionFlags fn;
  std::string project;
  std::string output;

  auto* ingest = app.add_subcommand("ingest", "Load a table into a project (CSV or TDC1 to TDC1)");
  std::optional<std::size_t> density_k;
  src.add(ingest);
  ingest->add_option("--project", project, "Project directory")->required();
  ingest->add_option("--density", density_k, "Append an inverse mean k-NN distance column");

  auto* stats = app.add_subcommand("graph-stats", "Edge counts of the pruned graph over a k grid");
  SourceFlags stats_src;
  std::vector<std::size_t> k_grid{8, 16, 32, 64, 128, 256, 512};
  double stats_beta = 1.0;
  std::string stats_mode = "strict";
  stats_src.add(stats);
  stats->add_option("--k", k_grid, "Ascending k values")->delimiter(',')->capture_default_str();
  stats->add_option("--beta", stats_beta)->capture_default_str();
  stats->add_option("--witness-mode", stats_mode)->capture_default_str();
  stats->add_option("--output", output, "Write the CSV here instead of stdout");

  auto* topology = app.add_subcommand("topology", "Segmentation, saddles and merge hierarchy");
  std::string gradient = "slope";
  topology->add_option("--project", project)->required();
  fn.add(topology);
  edges.add(topology);
  topology->add_option("--gradient", gradient, "slope or difference")->capture_default_str();

  auto* cubes = app.add_subcommand("cubes", "Per-leaf histogram cubes");
  CubeOptions cube_options;
  std::optional<double> t_base;
  cubes->add_option("--project", project)->required();
  cubes->add_option("--resolution", cube_options.config.resolution)->capture_default_str();
  cubes->add_option("--leaves", cube_options.max_leaves, "Maximum leaf segments")->capture_default_str();
  cubes->add_option("--t-base", t_base, "Leaf threshold (overrides --leaves)");
  cubes->add_option("--axes", cube_options.config.axes, "Axis columns (default: domain then f)")->delimiter(',');
  cubes->add_flag("--triples", cube_options.config.include_f_triples, "Store (x, y, f) cubes");

  auto* serve = app.add_subcommand("serve", "HTTP/JSON query service");
  std::string host = "127.0.0.1";
  int port = 8080;
  SpineConfig spine_config;
  serve->add_option("--project", project)->required();
  serve->add_option("--host", host)->capture_default_str();
  serve->add_option("--port", port, "0 picks a free port")->capture_default_str();
  serve->add_option("--levels", spine_config.levels_per_extremum, "Contours per extremum")->capture_default_str();

  auto* oracle = app.add_subcommand("oracle", "Brute-force cross-checks on a small table");
  SourceFlags oracle_src;
  EdgeFlags oracle_edges;
  FunctionFlags oracle_fn;
  std::size_t oracle_resolution = 16;
  oracle_src.add(oracle);
  oracle_edges.add(oracle);
  oracle_fn.add(oracle);
  oracle->add_option("--resolution", oracle_resolution)->capture_default_str();

  auto* synth = app.add_subcommand("synth", "Write a synthetic table");
  SynthOptions synth_options;
  std::string synth_format = "csv";
  synth->add_option("--preset", synth_options.preset, "two-gaussians, four-gaussians-5d or uniform")->required();
  synth->add_option("--n", synth_options.n)->capture_default_str();
  synth->add_option("--d", synth_options.d, "Dimension for uniform")->capture_default_str();
  synth->add_option("--seed", synth_options.seed)->capture_default_str();
  synth->add_option("--output", synth_options.output)->required();
  synth->add_option("--format", synth_format)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report_error(ErrorCode::config, e.what());
  }

  const std::string command = app.get_subcommands().front()->get_name();
  const RunStats run(command);
  int code = 0;
  try {
    if (ingest->parsed()) {
      const auto s = run_ingest({src.source(), project, density_k});
      std::cout << json{{"n", s.n},
                        {"domain_dims", s.domain_dims},
                        {"measure_dims", s.measure_dims},
                        {"rejected_rows", s.rejected_rows},
                        {"duplicate_points", s.duplicate_points}}
                       .dump()
                << '\n';
    } else if (stats->parsed()) {
      const auto csv = run_graph_stats({stats_src.source(), k_grid, stats_beta, parse_witness_mode(stats_mode)});
      if (output.empty()) {
        std::cout << csv;
      } else {
        std::ofstream out(output);
        if (!(out << csv)) throw Error(ErrorCode::input, "cannot write " + output);
      }
    } else if (topology->parsed()) {
      const auto s = run_topology({project, fn.selector(), edges.config(), parse_gradient_mode(gradient)});
      std::cout << json{{"maxima", s.maxima}, {"saddles", s.saddles}, {"events", s.events}}.dump() << '\n';
    } else if (cubes->parsed()) {
      cube_options.project = project;
      cube_options.t_base = t_base;
      const auto s = run_cubes(cube_options);
      std::cout << json{{"leaves", s.leaves}, {"t_base", s.t_base}, {"axes", s.axes}, {"pairs", s.pairs}}.dump()
                << '\n';
    } else if (serve->parsed()) {
      const QueryEngine engine(project, spine_config);
      HttpServer server(engine);
      const int bound = server.bind(host, port);
      std::cout << json{{"listening", {{"host", host}, {"port", bound}}}}.dump() << std::endl;
      wait_for_signal(server);
    } else if (oracle->parsed()) {
      const auto checks =
          run_oracle({oracle_src.source(), oracle_fn.selector(), oracle_edges.config(), oracle_resolution});
      json out = json::array();
      bool all = true;
      for (const auto& c : checks) {
        out.push_back({{"check", c.name}, {"passed", c.passed}, {"detail", c.detail}});
        all = all && c.passed;
      }
      std::cout << json{{"passed", all}, {"checks", out}}.dump() << '\n';
      if (!all) {
        std::cerr << json{{"error", {{"code", "E_ORACLE"}, {"message", "oracle mismatch"}}}}.dump() << '\n';
        code = kOracleMismatchExit;
      }
    } else if (synth->parsed()) {
      synth_options.format = parse_format(synth_format);
      run_synth(synth_options);
    }
  } catch (const Error& e) {
    code = report_error(e.code(), e.what());
  } catch (const std::exception& e) {
    code = report_error(ErrorCode::internal, e.what());
  }
  run.log(std::cerr, code);
  return code;
}
