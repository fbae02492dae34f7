#pragma once

#include <string>
#include <vector>

#include "graphtube/graph_sim.hpp"
#include "graphtube/stats.hpp"
#include "graphtube/test_function.hpp"
#include "graphtube/tube_sim.hpp"
#include "graphtube/weights.hpp"

namespace graphtube {

/// Bias allowance for O(sqrt(dt))-order discretization effects (crossing
/// interpolation, Walsh vertex rule): bias_budget(dt) = coeff * sqrt(dt).
/// The coefficient is pinned here and calibrated by a dt-halving self-check
/// in the test suite.
inline constexpr double kBiasBudgetCoeff = 1.0;
inline double bias_budget(double dt) { return kBiasBudgetCoeff * std::sqrt(dt); }

// ---------------------------------------------------------------------------
// First passage through |pi(x)| = level on a spider.

struct PassageRecord {
  bool hit = false;
  double time = 0.0;
  int edge = -1;
};

/// First crossing of the projected arc distance |pi(w)| over `level`,
/// linearly interpolated between samples; the edge is taken from the first
/// at-or-beyond-level sample.  A path starting at or beyond the level
/// reports time 0 on its starting edge.  No crossing leaves hit = false.
PassageRecord first_passage(const Path& path, const SpiderGraph& g, double level);

/// Streaming version; paths stop as soon as they cross.
class FirstPassageObserver {
 public:
  FirstPassageObserver(const SpiderGraph& g, double level, long n_paths);
  bool on_sample(long p, long k, double t, const Vec& x);
  void on_path_done(long p, const PathDiagnostics& d);
  const std::vector<PassageRecord>& records() const { return rec_; }
  const std::vector<PathDiagnostics>& diagnostics() const { return diag_; }

 private:
  const SpiderGraph* g_;
  double level_;
  std::vector<PassageRecord> rec_;
  std::vector<PathDiagnostics> diag_;
  std::vector<double> prev_s_, prev_t_;
};

struct HitProbReport {
  int schema_version = kSchemaVersion;
  double level = 0.0;
  long n_paths = 0;
  long missing = 0;
  std::vector<long> counts;
  std::vector<double> empirical, targets, z_scores, wilson_lo, wilson_hi;
  double abs_tol = 0.0;
  double max_abs_dev = 0.0;
  bool pass = false;
};

/// Pass iff every |empirical_e - target_e| <= max(3 * SE_e, abs_tol) with
/// SE_e = sqrt(target_e (1 - target_e) / n_paths).  More than 1% of paths
/// without a crossing invalidates the experiment (throws
/// ExperimentInvalidError); the missing count itself is always reported.
HitProbReport hitting_stats(const std::vector<PassageRecord>& recs, const Vec& targets,
                            double level, double abs_tol);

struct StartInsensitivityReport {
  int schema_version = kSchemaVersion;
  double tv = 0.0;
  double p_value = 1.0;
  long n_permutations = 0;
  uint64_t seed = 0;
  long missing_a = 0, missing_b = 0;
  bool pass = false;
};

/// Permutation test (TV statistic) of equality of the two edge-hit
/// distributions; pass iff p > 0.01.
StartInsensitivityReport start_insensitivity(const std::vector<PassageRecord>& a,
                                             const std::vector<PassageRecord>& b, int n_edges,
                                             uint64_t seed, long n_permutations = 2000);

// ---------------------------------------------------------------------------
// Occupation of the vertex ball {|x| <= level} (spider vertex at the origin).

/// Trapezoidal occupation time of each ball on the path's time range.
std::vector<double> occupation_times(const Path& path, const std::vector<double>& levels);

class OccupationObserver {
 public:
  OccupationObserver(std::vector<double> levels, long n_paths);
  bool on_sample(long p, long k, double t, const Vec& x);
  void on_path_done(long p, const PathDiagnostics& d);
  /// Row-major (path, level) occupation times.
  const std::vector<double>& occupations() const { return occ_; }
  const std::vector<double>& levels() const { return levels_; }
  const std::vector<PathDiagnostics>& diagnostics() const { return diag_; }

 private:
  std::vector<double> levels_;
  std::vector<double> occ_;
  std::vector<double> prev_t_;
  std::vector<char> prev_in_;  // per (path, level)
  std::vector<PathDiagnostics> diag_;
};

struct OccupationReport {
  int schema_version = kSchemaVersion;
  std::vector<double> levels, mean, se, ratio;
  double band = 0.0;          ///< max ratio / min ratio
  double band_limit = 1.5;    ///< pass iff band <= band_limit
  double horizon = 0.0;
  bool pass = false;
};

/// Mean occupation per level with the O(level) linearity check: the ratios
/// occupation/level across the grid must stay within the 1.5x band.
OccupationReport occupation_stats(const std::vector<double>& per_path_occ, long n_paths,
                                  const std::vector<double>& levels, double horizon);

// ---------------------------------------------------------------------------
// Stationary transverse law of the driftless reference process.

struct RadialSampleConfig {
  double eps = 0.1;
  double burn_in = 0.0;   ///< samples with t < burn_in are discarded
  long stride = 1;        ///< keep every stride-th step (decorrelation)
  double min_arc = 0.0;   ///< keep only |pi(x)| >= min_arc (edge region)
};

/// Normalized transverse coordinates r = d / (c_e eps) collected from a
/// recorded path under the restrictions above.
std::vector<double> radial_samples(const Path& path, const Graph& g,
                                   const RadialSampleConfig& cfg);

class RadialSampleObserver {
 public:
  RadialSampleObserver(const Graph& g, const RadialSampleConfig& cfg, long n_paths);
  bool on_sample(long p, long k, double t, const Vec& x);
  void on_path_done(long p, const PathDiagnostics& d);
  /// Per-path samples concatenated in path order (schedule-independent).
  std::vector<double> samples() const;
  const std::vector<PathDiagnostics>& diagnostics() const { return diag_; }

 private:
  const Graph* g_;
  RadialSampleConfig cfg_;
  std::vector<std::vector<double>> per_path_;
  std::vector<PathDiagnostics> diag_;
};

struct RadialLawReport {
  int schema_version = kSchemaVersion;
  double ks = 0.0;
  double ks_critical = 0.0;
  long n_samples = 0;
  long stride = 1;
  double burn_in = 0.0;
  bool pass = false;
  std::vector<double> hist_edges, hist_density, model_density;  // for CSV export
};

/// KS test of the samples against the cross-section law with density
/// proportional to r^(n-2) exp(-u(r)) on [0, 1); the CDF uses the same
/// quadrature as the Kirchhoff weights.  Fewer than `min_samples` samples
/// throws ExperimentInvalidError.
RadialLawReport radial_stationarity(std::vector<double> samples, const PotentialShape& shape,
                                    int ambient_n, const RadialSampleConfig& cfg,
                                    long min_samples = 1000);

// ---------------------------------------------------------------------------
// Martingale residual of the limit process.

/// f(X(t_end)) - f(X(t_0)) - trapezoidal integral of (L f)(X) dt over the
/// recorded samples (full resolution expected).
double path_residual(const GraphPath& path, const TestFunction& f,
                     const std::vector<EdgeSde>& sdes);

class ResidualObserver {
 public:
  ResidualObserver(const TestFunction& f, const std::vector<EdgeSde>& sdes, long n_paths);
  bool on_sample(long p, long k, double t, const GraphState& st);
  void on_path_done(long p);
  const std::vector<double>& residuals() const { return res_; }

 private:
  const TestFunction* f_;
  const std::vector<EdgeSde>* sdes_;
  std::vector<double> res_;
  std::vector<double> f0_, last_f_, prev_lf_, prev_t_, integral_;
};

struct ResidualReport {
  int schema_version = kSchemaVersion;
  std::string function_name;
  double estimate = 0.0;
  double se = 0.0;
  double dt = 0.0;
  double bias_budget = 0.0;
  long n_paths = 0;
  bool pass = false;
};

/// Pass iff |mean residual| <= 3 * SE + bias_budget(dt).  The test function
/// must already have passed validate_domain (callers enforce it so that
/// Kirchhoff-violating functions are rejected, not averaged).
ResidualReport residual_report(const std::vector<double>& residuals, const std::string& name,
                               double dt);

/// Domain check + batch evaluation over the window [s, t] of each recorded
/// path (sample times nearest to s and t are used as the endpoints).
ResidualReport martingale_residual(const std::vector<GraphPath>& batch, const TestFunction& f,
                                   const std::vector<EdgeSde>& sdes,
                                   const std::vector<KirchhoffWeights>& weights, double s,
                                   double t, double dt);

// ---------------------------------------------------------------------------
// Marginal distance between a projected tube batch and a graph batch.

struct MarginalDistanceReport {
  int schema_version = kSchemaVersion;
  std::vector<double> times, tv, w1, total;
  bool pass = true;  ///< callers overwrite with their trend/threshold policy
};

/// Snapshot extraction: states of every path at the listed times, which
/// must match recorded sample times within 1e-9 (mismatched grids throw).
std::vector<std::vector<GraphState>> project_batch_at(const std::vector<Path>& batch,
                                                      const Graph& g,
                                                      const std::vector<double>& times);
std::vector<std::vector<GraphState>> graph_batch_at(const std::vector<GraphPath>& batch,
                                                    const std::vector<double>& times);

/// Per time: total-variation distance of edge frequencies plus the
/// frequency-weighted 1-Wasserstein distance of the per-edge s samples.
MarginalDistanceReport marginal_distance(const std::vector<std::vector<GraphState>>& a,
                                         const std::vector<std::vector<GraphState>>& b,
                                         const std::vector<double>& times, int n_edges);

/// Streaming snapshot collectors (per-path slots; schedule-independent).
/// Sample indices must be ascending; times are indices scaled by dt, the
/// same expression the batch drivers use.
class TubeSnapshotObserver {
 public:
  TubeSnapshotObserver(const Graph& g, std::vector<long> sample_indices, double dt,
                       long n_paths);
  bool on_sample(long p, long k, double t, const Vec& x);
  void on_path_done(long p, const PathDiagnostics& d);
  const std::vector<std::vector<GraphState>>& snapshots() const { return snap_; }
  const std::vector<double>& times() const { return times_; }
  const std::vector<PathDiagnostics>& diagnostics() const { return diag_; }

 private:
  const Graph* g_;
  std::vector<long> indices_;
  std::vector<long> cursor_;
  std::vector<std::vector<GraphState>> snap_;  // [time][path]
  std::vector<double> times_;
  std::vector<PathDiagnostics> diag_;
};

class GraphSnapshotObserver {
 public:
  GraphSnapshotObserver(std::vector<long> sample_indices, double dt, long n_paths);
  bool on_sample(long p, long k, double t, const GraphState& st);
  void on_path_done(long p);
  const std::vector<std::vector<GraphState>>& snapshots() const { return snap_; }
  const std::vector<double>& times() const { return times_; }

 private:
  std::vector<long> indices_;
  std::vector<long> cursor_;
  std::vector<std::vector<GraphState>> snap_;
  std::vector<double> times_;
};

}  // namespace graphtube
