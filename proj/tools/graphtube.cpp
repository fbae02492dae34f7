// Command-line front end: run experiment suites, print Kirchhoff weights,
// validate configs.  Exit codes: 0 = success / all assertions passed,
// 1 = a run completed but an assertion failed, 2 = usage or input error.
#include <cstdio>
#include <exception>
#include <string>
#include <thread>

#include "CLI11.hpp"

#include "graphtube/config.hpp"
#include "graphtube/errors.hpp"
#include "graphtube/experiments.hpp"
#include "graphtube/io.hpp"
#include "graphtube/reports.hpp"
#include "graphtube/weights.hpp"

namespace {

int default_workers() {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

int cmd_run(const std::string& config_path, int workers, std::string out_dir,
            bool seed_given, uint64_t seed) {
  const std::string text = graphtube::read_file(config_path);
  std::vector<graphtube::ExperimentConfig> suite = graphtube::parse_suite(text);
  if (seed_given)
    for (auto& cfg : suite) cfg.seed = seed;
  if (out_dir.empty()) {
    out_dir = suite.front().out_dir.empty() ? "graphtube_out" : suite.front().out_dir;
  }
  const graphtube::RunManifest m = graphtube::run_suite(suite, workers, out_dir, text);
  for (const auto& [name, pass] : m.experiments)
    std::printf("%s: %s\n", name.c_str(), pass ? "pass" : "FAIL");
  std::printf("manifest: %s/manifest.json (hash %s, %.1fs)\n", out_dir.c_str(),
              m.config_hash.c_str(), m.wall_clock_seconds);
  return m.pass ? 0 : 1;
}

int cmd_weights(const std::string& graph_path, const std::string& shapes_path,
                bool reflecting) {
  const graphtube::Graph g = graphtube::load_graph(graph_path);
  constexpr double kQuadTol = 1e-12;
  graphtube::KirchhoffWeights w;
  if (reflecting) {
    w = graphtube::reflecting_weights(g);
  } else {
    const auto shapes = graphtube::load_shapes(shapes_path, graphtube::num_edges(g));
    w = graphtube::kirchhoff_weights(g, shapes, 0, kQuadTol);
  }
  std::printf("%s\n", graphtube::weights_to_json(w, kQuadTol).c_str());
  return 0;
}

int cmd_validate(const std::string& config_path) {
  const auto suite = graphtube::load_suite(config_path);
  std::printf("OK: %zu experiment%s\n", suite.size(), suite.size() == 1 ? "" : "s");
  for (const auto& cfg : suite)
    std::printf("  %s (%s)\n", cfg.name.c_str(), graphtube::to_string(cfg.kind).c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Diffusions in thin tubes around embedded graphs and their graph limits"};
  app.require_subcommand(1);

  std::string config_path, graph_path, shapes_path, out_dir;
  int workers = default_workers();
  uint64_t seed = 0;
  bool reflecting = false;

  CLI::App* run = app.add_subcommand("run", "Run an experiment suite");
  run->add_option("config", config_path, "Suite or single-experiment JSON")->required();
  run->add_option("--workers", workers, "Worker threads (results are identical)")
      ->envname("GRAPHTUBE_WORKERS");
  run->add_option("--out", out_dir, "Output directory (default: config's, else graphtube_out)");
  CLI::Option* seed_opt = run->add_option("--seed", seed, "Override every master seed");

  CLI::App* wts = app.add_subcommand("weights", "Print Kirchhoff weights as JSON");
  wts->add_option("graph", graph_path, "Graph description JSON")->required();
  wts->add_option("shapes", shapes_path, "Shape spec JSON (object or per-edge array)")
      ->required();
  wts->add_flag("--reflecting", reflecting, "Reflected-case weights (width-only)");

  CLI::App* val = app.add_subcommand("validate", "Parse and validate a config");
  val->add_option("config", config_path, "Suite or single-experiment JSON")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(config_path, workers, out_dir,
                                      seed_opt->count() > 0, seed);
    if (wts->parsed()) return cmd_weights(graph_path, shapes_path, reflecting);
    return cmd_validate(config_path);
  } catch (const graphtube::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "unexpected error: %s\n", e.what());
    return 2;
  }
}
