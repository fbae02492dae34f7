#pragma once

#include <string>
#include <vector>

#include "graphtube/config.hpp"
#include "graphtube/reports.hpp"

namespace graphtube {

/// Tolerances of the experiment pass criteria, pinned here.
inline constexpr double kHitAbsTol = 0.02;        ///< hit-frequency floor tolerance
inline constexpr double kCurveW1Threshold = 0.05; ///< curve-limit marginal distance at the finest eps

/// One artifact produced by an experiment (file name relative to the output
/// directory plus its full content, already serialized).
struct ReportFile {
  std::string filename;
  std::string content;
};

struct ExperimentResult {
  std::string name;
  bool pass = false;
  std::vector<ReportFile> reports;
  long rng_streams = 0;             ///< paths simulated (one stream each)
  long boundary_exits = 0;          ///< confined samples audited outside the tube
  std::vector<long> halving_events; ///< per confined path
  long max_halving_depth = 0;
};

/// Trend assertion used by the eps sweeps: v may not increase by more than
/// `slack` between consecutive stages.
bool non_increasing_with_slack(const std::vector<double>& v, double slack);

/// Runs one experiment with `workers` threads.  The report contents are
/// bitwise independent of the worker count; only wall-clock changes.
ExperimentResult run_experiment(const ExperimentConfig& cfg, int workers);

/// Runs every experiment and writes a self-contained output directory:
/// config.json (verbatim input), every report, and manifest.json.
/// manifest.pass is the conjunction of the experiment passes.
RunManifest run_suite(const std::vector<ExperimentConfig>& suite, int workers,
                      const std::string& out_dir, const std::string& config_text);

}  // namespace graphtube
