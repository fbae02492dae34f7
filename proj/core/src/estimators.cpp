#include "graphtube/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "graphtube/errors.hpp"

namespace graphtube {

// ---------------------------------------------------------------------------
// First passage.

namespace {

double interp_crossing(double prev_t, double prev_s, double t, double s, double level) {
  if (!(s > prev_s)) return t;
  const double frac = (level - prev_s) / (s - prev_s);
  return prev_t + frac * (t - prev_t);
}

}  // namespace

PassageRecord first_passage(const Path& path, const SpiderGraph& g, double level) {
  if (!(level > 0.0)) throw Error("first passage level must be positive");
  PassageRecord rec;
  if (path.samples() == 0) return rec;
  Projection proj = g.project(path.at(0));
  if (proj.s >= level) return {true, path.times.front(), proj.edge};
  double prev_s = proj.s;
  for (long k = 1; k < path.samples(); ++k) {
    proj = g.project(path.at(k));
    if (proj.s >= level)
      return {true,
              interp_crossing(path.times[k - 1], prev_s, path.times[k], proj.s, level),
              proj.edge};
    prev_s = proj.s;
  }
  return rec;
}

FirstPassageObserver::FirstPassageObserver(const SpiderGraph& g, double level, long n_paths)
    : g_(&g), level_(level) {
  if (!(level > 0.0)) throw Error("first passage level must be positive");
  rec_.resize(n_paths);
  diag_.resize(n_paths);
  prev_s_.assign(n_paths, 0.0);
  prev_t_.assign(n_paths, 0.0);
}

bool FirstPassageObserver::on_sample(long p, long k, double t, const Vec& x) {
  if (rec_[p].hit) return false;
  const Projection proj = g_->project(x);
  if (proj.s >= level_) {
    const double tc =
        k == 0 ? t : interp_crossing(prev_t_[p], prev_s_[p], t, proj.s, level_);
    rec_[p] = {true, tc, proj.edge};
    return false;
  }
  prev_s_[p] = proj.s;
  prev_t_[p] = t;
  return true;
}

void FirstPassageObserver::on_path_done(long p, const PathDiagnostics& d) { diag_[p] = d; }

HitProbReport hitting_stats(const std::vector<PassageRecord>& recs, const Vec& targets,
                            double level, double abs_tol) {
  const int ne = static_cast<int>(targets.size());
  HitProbReport rep;
  rep.level = level;
  rep.abs_tol = abs_tol;
  rep.n_paths = static_cast<long>(recs.size());
  if (rep.n_paths == 0) throw Error("hitting_stats needs a nonempty batch");
  rep.counts.assign(ne, 0);
  for (const PassageRecord& r : recs) {
    if (!r.hit) {
      ++rep.missing;
      continue;
    }
    if (r.edge < 0 || r.edge >= ne) throw Error("passage record edge out of range");
    ++rep.counts[r.edge];
  }
  if (static_cast<double>(rep.missing) > 0.01 * static_cast<double>(rep.n_paths))
    throw ExperimentInvalidError("more than 1% of paths never crossed the level (" +
                                 std::to_string(rep.missing) + " of " +
                                 std::to_string(rep.n_paths) + ")");
  const double n = static_cast<double>(rep.n_paths);
  bool pass = true;
  for (int e = 0; e < ne; ++e) {
    const double target = targets[e];
    const double emp = static_cast<double>(rep.counts[e]) / n;
    const double se = std::sqrt(target * (1.0 - target) / n);
    const double dev = std::abs(emp - target);
    rep.empirical.push_back(emp);
    rep.targets.push_back(target);
    rep.z_scores.push_back(se > 0.0 ? (emp - target) / se : 0.0);
    const Interval wi = wilson_interval(rep.counts[e], rep.n_paths);
    rep.wilson_lo.push_back(wi.lo);
    rep.wilson_hi.push_back(wi.hi);
    rep.max_abs_dev = std::max(rep.max_abs_dev, dev);
    if (dev > std::max(3.0 * se, abs_tol)) pass = false;
  }
  rep.pass = pass;
  return rep;
}

StartInsensitivityReport start_insensitivity(const std::vector<PassageRecord>& a,
                                             const std::vector<PassageRecord>& b, int n_edges,
                                             uint64_t seed, long n_permutations) {
  StartInsensitivityReport rep;
  std::vector<int> la, lb;
  for (const PassageRecord& r : a) {
    if (r.hit)
      la.push_back(r.edge);
    else
      ++rep.missing_a;
  }
  for (const PassageRecord& r : b) {
    if (r.hit)
      lb.push_back(r.edge);
    else
      ++rep.missing_b;
  }
  const PermutationResult pr = permutation_tv_test(la, lb, n_edges, n_permutations, seed);
  rep.tv = pr.statistic;
  rep.p_value = pr.p_value;
  rep.n_permutations = pr.n_permutations;
  rep.seed = seed;
  rep.pass = rep.p_value > 0.01;
  return rep;
}

// ---------------------------------------------------------------------------
// Occupation.

std::vector<double> occupation_times(const Path& path, const std::vector<double>& levels) {
  std::vector<double> occ(levels.size(), 0.0);
  if (path.samples() < 2) return occ;
  std::vector<double> prev_in(levels.size(), 0.0);
  double prev_t = path.times.front();
  const double r0 = path.at(0).norm();
  for (size_t l = 0; l < levels.size(); ++l) prev_in[l] = r0 <= levels[l] ? 1.0 : 0.0;
  for (long k = 1; k < path.samples(); ++k) {
    const double r = path.at(k).norm();
    const double t = path.times[k];
    for (size_t l = 0; l < levels.size(); ++l) {
      const double in = r <= levels[l] ? 1.0 : 0.0;
      occ[l] += 0.5 * (prev_in[l] + in) * (t - prev_t);
      prev_in[l] = in;
    }
    prev_t = t;
  }
  return occ;
}

OccupationObserver::OccupationObserver(std::vector<double> levels, long n_paths)
    : levels_(std::move(levels)) {
  occ_.assign(n_paths * static_cast<long>(levels_.size()), 0.0);
  prev_t_.assign(n_paths, 0.0);
  prev_in_.assign(n_paths * static_cast<long>(levels_.size()), 0);
  diag_.resize(n_paths);
}

bool OccupationObserver::on_sample(long p, long k, double t, const Vec& x) {
  const double r = x.norm();
  const long base = p * static_cast<long>(levels_.size());
  if (k == 0) {
    for (size_t l = 0; l < levels_.size(); ++l)
      prev_in_[base + static_cast<long>(l)] = r <= levels_[l] ? 1 : 0;
    prev_t_[p] = t;
    return true;
  }
  for (size_t l = 0; l < levels_.size(); ++l) {
    const char in = r <= levels_[l] ? 1 : 0;
    occ_[base + static_cast<long>(l)] +=
        0.5 * (static_cast<double>(prev_in_[base + static_cast<long>(l)]) +
               static_cast<double>(in)) *
        (t - prev_t_[p]);
    prev_in_[base + static_cast<long>(l)] = in;
  }
  prev_t_[p] = t;
  return true;
}

void OccupationObserver::on_path_done(long p, const PathDiagnostics& d) { diag_[p] = d; }

OccupationReport occupation_stats(const std::vector<double>& per_path_occ, long n_paths,
                                  const std::vector<double>& levels, double horizon) {
  const size_t nl = levels.size();
  if (nl == 0 || n_paths <= 0 ||
      per_path_occ.size() != static_cast<size_t>(n_paths) * nl)
    throw Error("occupation_stats dimensions mismatch");
  OccupationReport rep;
  rep.levels = levels;
  rep.horizon = horizon;
  std::vector<double> column(static_cast<size_t>(n_paths));
  for (size_t l = 0; l < nl; ++l) {
    for (long p = 0; p < n_paths; ++p)
      column[static_cast<size_t>(p)] = per_path_occ[static_cast<size_t>(p) * nl + l];
    const MeanSE ms = mean_se(column);
    rep.mean.push_back(ms.mean);
    rep.se.push_back(ms.se);
    rep.ratio.push_back(ms.mean / levels[l]);
  }
  const auto [mn, mx] = std::minmax_element(rep.ratio.begin(), rep.ratio.end());
  rep.band = (*mn > 0.0) ? *mx / *mn : std::numeric_limits<double>::infinity();
  rep.pass = rep.band <= rep.band_limit;
  return rep;
}

// ---------------------------------------------------------------------------
// Radial stationarity.

namespace {

struct RadialPoint {
  double arc = 0.0;
  double r = 0.0;
};

RadialPoint radial_point(const Graph& g, const Vec& x, double eps) {
  const Projection proj = project_graph(g, x);
  RadialPoint pt;
  pt.r = proj.dist / (edge_width(g, proj.edge) * eps);
  if (const auto* mg = std::get_if<MetricGraph>(&g)) {
    const double len = mg->edge(proj.edge).curve.length();
    pt.arc = std::min(proj.s, len - proj.s);
  } else {
    pt.arc = proj.s;
  }
  return pt;
}

}  // namespace

std::vector<double> radial_samples(const Path& path, const Graph& g,
                                   const RadialSampleConfig& cfg) {
  std::vector<double> out;
  for (long k = 0; k < path.samples(); ++k) {
    if (path.times[k] < cfg.burn_in) continue;
    if (k % cfg.stride != 0) continue;
    const RadialPoint pt = radial_point(g, path.at(k), cfg.eps);
    if (pt.arc < cfg.min_arc) continue;
    out.push_back(pt.r);
  }
  return out;
}

RadialSampleObserver::RadialSampleObserver(const Graph& g, const RadialSampleConfig& cfg,
                                           long n_paths)
    : g_(&g), cfg_(cfg) {
  per_path_.resize(n_paths);
  diag_.resize(n_paths);
}

bool RadialSampleObserver::on_sample(long p, long k, double t, const Vec& x) {
  if (t < cfg_.burn_in || k % cfg_.stride != 0) return true;
  const RadialPoint pt = radial_point(*g_, x, cfg_.eps);
  if (pt.arc >= cfg_.min_arc) per_path_[p].push_back(pt.r);
  return true;
}

void RadialSampleObserver::on_path_done(long p, const PathDiagnostics& d) { diag_[p] = d; }

std::vector<double> RadialSampleObserver::samples() const {
  std::vector<double> out;
  for (const auto& v : per_path_) out.insert(out.end(), v.begin(), v.end());
  return out;
}

RadialLawReport radial_stationarity(std::vector<double> samples, const PotentialShape& shape,
                                    int ambient_n, const RadialSampleConfig& cfg,
                                    long min_samples) {
  RadialLawReport rep;
  rep.stride = cfg.stride;
  rep.burn_in = cfg.burn_in;
  rep.n_samples = static_cast<long>(samples.size());
  if (rep.n_samples < min_samples)
    throw ExperimentInvalidError("too few decorrelated radial samples (" +
                                 std::to_string(rep.n_samples) + " < " +
                                 std::to_string(min_samples) + ")");

  // Cross-section CDF by cumulative trapezoid of r^(n-2) exp(-u(r)).
  constexpr int kNodes = 4097;
  const double rmax = 1.0 - 1e-9;
  std::vector<double> grid(kNodes), cum(kNodes, 0.0);
  double prev_f = 0.0;
  for (int j = 0; j < kNodes; ++j) {
    const double r = rmax * static_cast<double>(j) / static_cast<double>(kNodes - 1);
    const double f = std::pow(r, ambient_n - 2) * std::exp(-shape.value(r));
    grid[j] = r;
    if (j > 0) cum[j] = cum[j - 1] + 0.5 * (prev_f + f) * (grid[j] - grid[j - 1]);
    prev_f = f;
  }
  const double total = cum.back();
  if (!(total > 0.0)) throw Error("degenerate cross-section law");
  const auto cdf = [&](double r) {
    if (r <= 0.0) return 0.0;
    if (r >= rmax) return 1.0;
    const auto it = std::upper_bound(grid.begin(), grid.end(), r);
    const size_t j = static_cast<size_t>(std::distance(grid.begin(), it)) - 1;
    const double t = (r - grid[j]) / (grid[j + 1] - grid[j]);
    return (cum[j] + t * (cum[j + 1] - cum[j])) / total;
  };

  rep.ks = ks_statistic(samples, cdf);
  rep.ks_critical = ks_critical(static_cast<double>(rep.n_samples));
  rep.pass = rep.ks < rep.ks_critical;

  constexpr int kBins = 64;
  rep.hist_edges.resize(kBins + 1);
  rep.hist_density.assign(kBins, 0.0);
  rep.model_density.assign(kBins, 0.0);
  for (int b = 0; b <= kBins; ++b) rep.hist_edges[b] = static_cast<double>(b) / kBins;
  const double binw = 1.0 / kBins;
  for (double r : samples) {
    int b = static_cast<int>(r / binw);
    b = std::clamp(b, 0, kBins - 1);
    rep.hist_density[b] += 1.0;
  }
  for (int b = 0; b < kBins; ++b) {
    rep.hist_density[b] /= static_cast<double>(rep.n_samples) * binw;
    rep.model_density[b] = (cdf(rep.hist_edges[b + 1]) - cdf(rep.hist_edges[b])) / binw;
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Martingale residual.

double path_residual(const GraphPath& path, const TestFunction& f,
                     const std::vector<EdgeSde>& sdes) {
  if (path.samples() == 0) throw Error("empty path");
  double integral = 0.0;
  double prev_lf = f.generator(sdes, path.edges[0], path.ss[0]);
  for (long k = 1; k < path.samples(); ++k) {
    const double lf = f.generator(sdes, path.edges[k], path.ss[k]);
    integral += 0.5 * (prev_lf + lf) * (path.times[k] - path.times[k - 1]);
    prev_lf = lf;
  }
  const long last = path.samples() - 1;
  return f.eval(path.edges[last], path.ss[last]) - f.eval(path.edges[0], path.ss[0]) -
         integral;
}

ResidualObserver::ResidualObserver(const TestFunction& f, const std::vector<EdgeSde>& sdes,
                                   long n_paths)
    : f_(&f), sdes_(&sdes) {
  res_.assign(n_paths, 0.0);
  f0_.assign(n_paths, 0.0);
  last_f_.assign(n_paths, 0.0);
  prev_lf_.assign(n_paths, 0.0);
  prev_t_.assign(n_paths, 0.0);
  integral_.assign(n_paths, 0.0);
}

bool ResidualObserver::on_sample(long p, long k, double t, const GraphState& st) {
  const double lf = f_->generator(*sdes_, st.edge, st.s);
  const double fv = f_->eval(st.edge, st.s);
  if (k == 0) {
    f0_[p] = fv;
    integral_[p] = 0.0;
  } else {
    integral_[p] += 0.5 * (prev_lf_[p] + lf) * (t - prev_t_[p]);
  }
  last_f_[p] = fv;
  prev_lf_[p] = lf;
  prev_t_[p] = t;
  return true;
}

void ResidualObserver::on_path_done(long p) {
  res_[p] = last_f_[p] - f0_[p] - integral_[p];
}

ResidualReport residual_report(const std::vector<double>& residuals, const std::string& name,
                               double dt) {
  ResidualReport rep;
  rep.function_name = name;
  rep.dt = dt;
  rep.n_paths = static_cast<long>(residuals.size());
  const MeanSE ms = mean_se(residuals);
  rep.estimate = ms.mean;
  rep.se = ms.se;
  rep.bias_budget = bias_budget(dt);
  rep.pass = std::abs(rep.estimate) <= 3.0 * rep.se + rep.bias_budget;
  return rep;
}

ResidualReport martingale_residual(const std::vector<GraphPath>& batch, const TestFunction& f,
                                   const std::vector<EdgeSde>& sdes,
                                   const std::vector<KirchhoffWeights>& weights, double s,
                                   double t, double dt) {
  f.validate_domain(weights, sdes);  // Kirchhoff violators are rejected, never averaged
  if (batch.empty()) throw Error("empty batch");
  std::vector<double> residuals;
  residuals.reserve(batch.size());
  for (const GraphPath& path : batch) {
    const auto lo = std::lower_bound(path.times.begin(), path.times.end(), s - 1e-12);
    const auto hi = std::lower_bound(path.times.begin(), path.times.end(), t - 1e-12);
    const long is = std::distance(path.times.begin(), lo);
    long it = std::distance(path.times.begin(), hi);
    it = std::min<long>(it, path.samples() - 1);
    if (is >= it) throw Error("residual window contains no samples");
    GraphPath sub;
    sub.times.assign(path.times.begin() + is, path.times.begin() + it + 1);
    sub.edges.assign(path.edges.begin() + is, path.edges.begin() + it + 1);
    sub.ss.assign(path.ss.begin() + is, path.ss.begin() + it + 1);
    residuals.push_back(path_residual(sub, f, sdes));
  }
  return residual_report(residuals, f.name(), dt);
}

// ---------------------------------------------------------------------------
// Marginal distances.

std::vector<std::vector<GraphState>> project_batch_at(const std::vector<Path>& batch,
                                                      const Graph& g,
                                                      const std::vector<double>& times) {
  std::vector<std::vector<GraphState>> out(times.size());
  for (auto& v : out) v.reserve(batch.size());
  for (const Path& path : batch) {
    for (size_t j = 0; j < times.size(); ++j) {
      const auto it =
          std::lower_bound(path.times.begin(), path.times.end(), times[j] - 1e-9);
      if (it == path.times.end() || std::abs(*it - times[j]) > 1e-9)
        throw Error("mismatched time grids");
      const long k = std::distance(path.times.begin(), it);
      const Projection proj = project_graph(g, path.at(k));
      out[j].push_back({proj.edge, proj.s});
    }
  }
  return out;
}

std::vector<std::vector<GraphState>> graph_batch_at(const std::vector<GraphPath>& batch,
                                                    const std::vector<double>& times) {
  std::vector<std::vector<GraphState>> out(times.size());
  for (auto& v : out) v.reserve(batch.size());
  for (const GraphPath& path : batch) {
    for (size_t j = 0; j < times.size(); ++j) {
      const auto it =
          std::lower_bound(path.times.begin(), path.times.end(), times[j] - 1e-9);
      if (it == path.times.end() || std::abs(*it - times[j]) > 1e-9)
        throw Error("mismatched time grids");
      const long k = std::distance(path.times.begin(), it);
      out[j].push_back(path.at(k));
    }
  }
  return out;
}

MarginalDistanceReport marginal_distance(const std::vector<std::vector<GraphState>>& a,
                                         const std::vector<std::vector<GraphState>>& b,
                                         const std::vector<double>& times, int n_edges) {
  if (a.size() != times.size() || b.size() != times.size())
    throw Error("mismatched time grids");
  MarginalDistanceReport rep;
  rep.times = times;
  for (size_t j = 0; j < times.size(); ++j) {
    std::vector<long> ca(n_edges, 0), cb(n_edges, 0);
    std::vector<std::vector<double>> sa(n_edges), sb(n_edges);
    for (const GraphState& st : a[j]) {
      ++ca[st.edge];
      sa[st.edge].push_back(st.s);
    }
    for (const GraphState& st : b[j]) {
      ++cb[st.edge];
      sb[st.edge].push_back(st.s);
    }
    const double tv = tv_distance(ca, cb);
    double w1 = 0.0;
    for (int e = 0; e < n_edges; ++e) {
      if (sa[e].empty() || sb[e].empty()) continue;
      const double fa = static_cast<double>(ca[e]) / static_cast<double>(a[j].size());
      const double fb = static_cast<double>(cb[e]) / static_cast<double>(b[j].size());
      w1 += 0.5 * (fa + fb) * wasserstein1(sa[e], sb[e]);
    }
    rep.tv.push_back(tv);
    rep.w1.push_back(w1);
    rep.total.push_back(tv + w1);
  }
  return rep;
}

TubeSnapshotObserver::TubeSnapshotObserver(const Graph& g, std::vector<long> sample_indices,
                                           double dt, long n_paths)
    : g_(&g), indices_(std::move(sample_indices)) {
  if (indices_.empty()) throw Error("snapshot observer needs sample indices");
  for (size_t j = 1; j < indices_.size(); ++j)
    if (indices_[j] <= indices_[j - 1]) throw Error("snapshot indices must ascend");
  cursor_.assign(n_paths, 0);
  snap_.assign(indices_.size(), std::vector<GraphState>(n_paths));
  for (long idx : indices_) times_.push_back(static_cast<double>(idx) * dt);
  diag_.resize(n_paths);
}

bool TubeSnapshotObserver::on_sample(long p, long k, double, const Vec& x) {
  long& cur = cursor_[p];
  if (cur >= static_cast<long>(indices_.size())) return false;
  if (k == indices_[cur]) {
    const Projection proj = project_graph(*g_, x);
    snap_[cur][p] = {proj.edge, proj.s};
    ++cur;
  }
  return cur < static_cast<long>(indices_.size());
}

void TubeSnapshotObserver::on_path_done(long p, const PathDiagnostics& d) { diag_[p] = d; }

GraphSnapshotObserver::GraphSnapshotObserver(std::vector<long> sample_indices, double dt,
                                             long n_paths)
    : indices_(std::move(sample_indices)) {
  if (indices_.empty()) throw Error("snapshot observer needs sample indices");
  for (size_t j = 1; j < indices_.size(); ++j)
    if (indices_[j] <= indices_[j - 1]) throw Error("snapshot indices must ascend");
  cursor_.assign(n_paths, 0);
  snap_.assign(indices_.size(), std::vector<GraphState>(n_paths));
  for (long idx : indices_) times_.push_back(static_cast<double>(idx) * dt);
}

bool GraphSnapshotObserver::on_sample(long p, long k, double, const GraphState& st) {
  long& cur = cursor_[p];
  if (cur >= static_cast<long>(indices_.size())) return false;
  if (k == indices_[cur]) {
    snap_[cur][p] = st;
    ++cur;
  }
  return cur < static_cast<long>(indices_.size());
}

void GraphSnapshotObserver::on_path_done(long) {}

}  // namespace graphtube
