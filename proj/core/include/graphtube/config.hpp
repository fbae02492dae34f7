#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "graphtube/geometry.hpp"
#include "graphtube/io.hpp"
#include "graphtube/potential.hpp"

namespace graphtube {

enum class ExperimentKind {
  HitProbs,          ///< confined tube run, first-passage edge frequencies vs weights
  Occupation,        ///< vertex-ball occupation linearity in the level
  Stationarity,      ///< transverse radial law of the driftless reference process
  Residual,          ///< limit-process martingale residuals over generated test functions
  ConvergenceSweep,  ///< projected tube marginals vs graph marginals across eps
  CurveLimit,        ///< single curved edge: tube marginal vs direct 1D edge SDE
  ReflectedVariant,  ///< reflected tube run against the reflecting weights
};

std::string to_string(ExperimentKind kind);
ExperimentKind experiment_kind_from_string(const std::string& s);

/// Initial condition.  Tube experiments start in ambient space, graph
/// experiments on an edge; `origin` means the first vertex (ambient origin
/// for spiders, s = 0 on edge 0 for graph-side runs).
struct StartSpec {
  std::string kind = "origin";  ///< origin | point | two_points | edge_point
  Vec point;                    ///< point
  Vec point_a, point_b;         ///< two_points (start-insensitivity pairs)
  int edge = 0;                 ///< edge_point
  double s = 0.0;
};

/// One experiment of the run matrix.  The graph is owned here so that
/// coefficient presets (which may hold a graph pointer) can be bound to a
/// stable instance by the runner.
struct ExperimentConfig {
  explicit ExperimentConfig(Graph g) : graph(std::move(g)) {}

  std::string name;
  ExperimentKind kind = ExperimentKind::HitProbs;
  Graph graph;
  std::vector<PotentialShape> shapes;  ///< one per edge
  CoeffSpec coeffs;
  std::vector<double> eps;        ///< sweep stages, strictly decreasing
  double dt = 0.0;                ///< absolute step; 0 means use dt_per_eps_sq
  double dt_per_eps_sq = 0.25;    ///< dt = factor * eps^2 per stage
  double T = 1.0;
  std::vector<double> delta_prime;  ///< passage/occupation levels
  long n_paths = 1000;
  uint64_t seed = 0;
  StartSpec start;
  std::string out_dir;    ///< optional; the CLI --out flag overrides
  std::string canonical;  ///< canonical JSON of this experiment (hash input)

  double dt_for(double eps_value) const {
    return dt > 0.0 ? dt : dt_per_eps_sq * eps_value * eps_value;
  }

  /// Enforces: n_paths >= 100; eps nonempty, positive, strictly decreasing;
  /// dt <= min(eps)^2 (equivalently dt_per_eps_sq <= 1); T > 0; one shape
  /// per edge; start indices resolve; and for every kind except curve_limit
  /// the diffusion matrix equals the identity at each vertex of degree >= 2
  /// (the weight formulas assume it).  Throws ValidationError naming the
  /// violated invariant.
  void validate() const;
};

/// Parses one experiment object; parse errors carry line/column, validation
/// errors name the invariant.
ExperimentConfig parse_experiment(const std::string& text);

/// Accepts {"experiments": [...]} or a single experiment object.
std::vector<ExperimentConfig> parse_suite(const std::string& text);
std::vector<ExperimentConfig> load_suite(const std::string& path);

}  // namespace graphtube
