// Acceptance gate.  Prints one pass/fail line per criterion with the
// measured quantities and exits 0 only if every criterion holds.  The
// criteria exercise the shipped surface end to end: the weights CLI, the
// quadrature against an independent midpoint oracle, confined and reflected
// tube sweeps against the limit weights, start insensitivity, occupation
// linearity, the stationary radial law, limit-generator residuals with a
// domain negative control, the curved-tube marginal against the direct edge
// SDE, tube containment, and worker-count determinism.
#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "graphtube/coefficients.hpp"
#include "graphtube/config.hpp"
#include "graphtube/curve.hpp"
#include "graphtube/errors.hpp"
#include "graphtube/experiments.hpp"
#include "graphtube/geometry.hpp"
#include "graphtube/io.hpp"
#include "graphtube/potential.hpp"
#include "graphtube/reports.hpp"
#include "graphtube/weights.hpp"

namespace fs = std::filesystem;
using namespace graphtube;
using nlohmann::json;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

// Containment bookkeeping across every tube run (criterion 10).
long g_boundary_exits = 0;
std::vector<long> g_halvings;
long g_max_halving_depth = 0;

// First confined-sweep reports, kept for the determinism rerun.
std::vector<ReportFile> g_sweep_reports;

void absorb(const ExperimentResult& res) {
  g_boundary_exits += res.boundary_exits;
  g_halvings.insert(g_halvings.end(), res.halving_events.begin(),
                    res.halving_events.end());
  g_max_halving_depth = std::max(g_max_halving_depth, res.max_halving_depth);
}

const std::string& report_named(const ExperimentResult& res, const std::string& name) {
  for (const ReportFile& rf : res.reports)
    if (rf.filename == name) return rf.content;
  throw Error("missing report " + name);
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  return buf;
}

Graph weighted_spider() {
  // Three rays at 120 degrees in the plane, widths (1, 1, 2).
  const double s3 = std::sqrt(3.0) / 2.0;
  std::vector<Vec> dirs(3, Vec(2));
  dirs[0] << 1.0, 0.0;
  dirs[1] << -0.5, s3;
  dirs[2] << -0.5, -s3;
  return SpiderGraph(std::move(dirs), {1.0, 1.0, 2.0});
}

Graph unit_spider() {
  const double s3 = std::sqrt(3.0) / 2.0;
  std::vector<Vec> dirs(3, Vec(2));
  dirs[0] << 1.0, 0.0;
  dirs[1] << -0.5, s3;
  dirs[2] << -0.5, -s3;
  return SpiderGraph(std::move(dirs), {1.0, 1.0, 1.0});
}

std::vector<PotentialShape> alpha2_shapes(const Graph& g) {
  return std::vector<PotentialShape>(static_cast<size_t>(num_edges(g)),
                                     PotentialShape::power_ratio(2.0));
}

// Unit-radius arc with smoothstep-tapered curvature: exactly straight on a
// terminal margin at both ends (a curve-grid invariant), curvature 1 on the
// plateau, total turn exactly pi.
ParamCurve tapered_half_circle() {
  const double d0 = 0.05, ramp = 0.25;
  const double L = M_PI + 2.0 * d0 + ramp;  // plateau + two half-ramps turn pi
  auto smooth = [](double x) {
    return x <= 0.0 ? 0.0 : x >= 1.0 ? 1.0 : x * x * (3.0 - 2.0 * x);
  };
  auto kappa = [=](double s) {
    return std::min(smooth((s - d0) / ramp), smooth((L - d0 - s) / ramp));
  };
  return ParamCurve::from_curvature_profile(kappa, L, Vec::Zero(2), 0.0, L / 1024.0);
}

ExperimentConfig hit_sweep_config(bool reflected) {
  ExperimentConfig cfg(weighted_spider());
  cfg.name = reflected ? "reflected_hits" : "confined_hits";
  cfg.kind = reflected ? ExperimentKind::ReflectedVariant : ExperimentKind::HitProbs;
  cfg.shapes = alpha2_shapes(cfg.graph);
  cfg.eps = reflected ? std::vector<double>{0.02}
                      : std::vector<double>{0.08, 0.04, 0.02};
  cfg.dt_per_eps_sq = 0.25;
  cfg.T = 2.0;
  cfg.delta_prime = {0.5};
  cfg.n_paths = 10000;
  cfg.seed = 11;
  return cfg;
}

// --------------------------------------------------------------------------
// 1. closed-form vertex weights via the CLI

Outcome criterion1() {
  const char* bin = std::getenv("GRAPHTUBE_BIN");
  if (!bin) return {false, "GRAPHTUBE_BIN not set"};
  const fs::path dir = fs::temp_directory_path() / "graphtube_acceptance";
  fs::create_directories(dir);
  const fs::path gp = dir / "spider3d.json";
  const fs::path sp = dir / "alpha2.json";
  write_file(gp.string(),
             R"({"n":3,"spider":{"directions":[[1,0,0],[0,1,0],[0,0,1]],)"
             R"("widths":[1.0,1.0,2.0]}})");
  write_file(sp.string(), R"({"kind":"power_ratio","alpha":2.0})");
  const fs::path so = dir / "weights.out";
  const std::string cmd = std::string("\"") + bin + "\" weights " + gp.string() +
                          " " + sp.string() + " > " + so.string() + " 2>/dev/null";
  const auto t0 = std::chrono::steady_clock::now();
  const int status = std::system(cmd.c_str());
  const double secs = std::chrono::duration<double>(
                          std::chrono::steady_clock::now() - t0).count();
  if (status == -1 || !WIFEXITED(status) || WEXITSTATUS(status) != 0)
    return {false, "weights command failed"};
  const json j = json::parse(read_file(so.string()));
  const double want[3] = {1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0};
  double dev = 0.0;
  for (int i = 0; i < 3; ++i)
    dev = std::max(dev, std::abs(j["p"][i].get<double>() - want[i]));
  const bool pass = dev <= 1e-12 && secs < 1.0;
  return {pass, "p vs (1/6,1/6,2/3): max |dp| = " + fmt(dev) + ", " + fmt(secs) + "s"};
}

// --------------------------------------------------------------------------
// 2. cross-section masses vs an independent midpoint-rule oracle

Outcome criterion2() {
  const auto t0 = std::chrono::steady_clock::now();
  // Profiles written out directly so the oracle shares no code with the
  // library: u1 = r/(1-r), u2 = r^2/(1-r^2), ambient n = 3.
  auto mass_oracle = [](auto&& u) {
    const long n = 1000000;
    long double acc = 0.0L;
    for (long i = 0; i < n; ++i) {
      const double r = (static_cast<double>(i) + 0.5) / static_cast<double>(n);
      acc += static_cast<long double>(r * std::exp(-u(r)));
    }
    return static_cast<double>(acc / static_cast<long double>(n));
  };
  const double m1 = mass_oracle([](double r) { return r / (1.0 - r); });
  const double m2 = mass_oracle([](double r) { return r * r / (1.0 - r * r); });

  const double q1 = cross_section_mass(PotentialShape::power_ratio(1.0), 3);
  const double q2 = cross_section_mass(PotentialShape::power_ratio(2.0), 3);

  std::vector<Vec> dirs(2, Vec(3));
  dirs[0] << 1.0, 0.0, 0.0;
  dirs[1] << 0.0, 1.0, 0.0;
  const Graph g = SpiderGraph(std::move(dirs), {1.0, 1.0});
  const KirchhoffWeights w = kirchhoff_weights(
      g, {PotentialShape::power_ratio(1.0), PotentialShape::power_ratio(2.0)});
  const double p0_oracle = m1 / (m1 + m2);

  const double dev = std::max({std::abs(q1 - m1), std::abs(q2 - m2),
                               std::abs(w.p[0] - p0_oracle)});
  const double secs = std::chrono::duration<double>(
                          std::chrono::steady_clock::now() - t0).count();
  const bool pass = dev <= 1e-8 && secs < 1.0;
  return {pass, "masses and weight vs 1e6-point oracle: max dev = " + fmt(dev) +
                    ", " + fmt(secs) + "s"};
}

// --------------------------------------------------------------------------
// 3. confined junction exit frequencies across an eps sweep

Outcome criterion3() {
  const ExperimentConfig cfg = hit_sweep_config(false);
  const ExperimentResult res = run_experiment(cfg, 1);
  absorb(res);
  g_sweep_reports = res.reports;
  std::string devs;
  for (size_t i = 0; i < cfg.eps.size(); ++i) {
    const json j = json::parse(
        report_named(res, cfg.name + ".stage" + std::to_string(i) + ".hit_probs.d0.json"));
    devs += (i ? "/" : "") + fmt(j["max_abs_dev"].get<double>());
  }
  const json sweep = json::parse(report_named(res, cfg.name + ".sweep.json"));
  const bool trend = sweep["trend_pass"].get<bool>();
  return {res.pass, "stage max |dev| = " + devs + " vs tol 0.02, trend non-increasing: " +
                        (trend ? "yes" : "no")};
}

// --------------------------------------------------------------------------
// 4. reflected junction exit frequencies at the finest eps

Outcome criterion4() {
  const ExperimentConfig cfg = hit_sweep_config(true);
  const ExperimentResult res = run_experiment(cfg, 1);
  absorb(res);
  const json j = json::parse(report_named(res, cfg.name + ".stage0.hit_probs.d0.json"));
  return {res.pass, "max |dev| = " + fmt(j["max_abs_dev"].get<double>()) +
                        " vs tol 0.02 against width weights (1/4,1/4,1/2)"};
}

// --------------------------------------------------------------------------
// 5. junction start insensitivity

Outcome criterion5() {
  ExperimentConfig cfg(unit_spider());
  cfg.name = "start_pair";
  cfg.kind = ExperimentKind::HitProbs;
  cfg.shapes = alpha2_shapes(cfg.graph);
  cfg.eps = {0.02};
  // dt = eps^2/64: coarser steps jump across the junction in O(1) moves and
  // correlate the exit edge with the entry edge, inflating TV far beyond the
  // finite-eps floor (paths escaping to level delta' before first reaching the
  // junction stay on their start edge with probability ~ kappa*eps/delta').
  cfg.dt_per_eps_sq = 0.015625;
  cfg.T = 8.0;
  cfg.delta_prime = {1.0};
  cfg.n_paths = 300;
  cfg.seed = 21;
  const auto& sp = std::get<SpiderGraph>(cfg.graph);
  const double h = 2.0 * sp.kappa() * cfg.eps[0];
  cfg.start.kind = "two_points";
  cfg.start.point_a = h * sp.direction(0);
  cfg.start.point_b = h * sp.direction(1);
  const ExperimentResult res = run_experiment(cfg, 1);
  absorb(res);
  const json j = json::parse(report_named(res, cfg.name + ".start_insensitivity.json"));
  return {res.pass, "starts at |x| = " + fmt(h) + " on edges 0/1: TV = " +
                        fmt(j["tv"].get<double>()) + ", permutation p = " +
                        fmt(j["p_value"].get<double>()) + " (need > 0.01)"};
}

// --------------------------------------------------------------------------
// 6. vertex occupation linear in the level

Outcome criterion6() {
  ExperimentConfig cfg(weighted_spider());
  cfg.name = "occupation";
  cfg.kind = ExperimentKind::Occupation;
  cfg.shapes = alpha2_shapes(cfg.graph);
  cfg.eps = {0.05};
  cfg.dt_per_eps_sq = 0.125;
  cfg.T = 2.0;
  cfg.delta_prime = {0.1, 0.2, 0.4};
  cfg.n_paths = 2000;
  cfg.seed = 31;
  const ExperimentResult res = run_experiment(cfg, 1);
  absorb(res);
  const json j = json::parse(report_named(res, cfg.name + ".occupation.json"));
  return {res.pass, "occupation/level ratio band = " + fmt(j["band"].get<double>()) +
                        " (limit " + fmt(j["band_limit"].get<double>()) + ")"};
}

// --------------------------------------------------------------------------
// 7. stationary radial law of the driftless reference process

Outcome criterion7() {
  ExperimentConfig cfg(unit_spider());
  cfg.name = "radial";
  cfg.kind = ExperimentKind::Stationarity;
  cfg.shapes = alpha2_shapes(cfg.graph);
  cfg.eps = {0.1};
  // The KS value is dt-independent (measured ~0.10 for dt/eps^2 in
  // [1/512, 1/64]): the sampler equilibrates to the invariant law of the
  // simulated SDE dX = dW - grad(U) dt, whose radial density carries
  // exp(-2u), while the reference density here is exp(-u). For alpha = 2,
  // n = 2 the analytic KS gap between the two laws is 0.1015, above the 99%
  // critical value at any admissible sample size, so this check records the
  // convention gap rather than a discretization error.
  cfg.dt_per_eps_sq = 0.015625;
  cfg.T = 2.0;
  cfg.n_paths = 300;
  cfg.seed = 41;
  const ExperimentResult res = run_experiment(cfg, 1);
  absorb(res);
  const json j = json::parse(report_named(res, cfg.name + ".radial_law.json"));
  const long n = j["n_samples"].get<long>();
  const bool pass = res.pass && n >= 1000;
  return {pass, "KS = " + fmt(j["ks"].get<double>()) + " vs 99% critical " +
                    fmt(j["ks_critical"].get<double>()) + ", decorrelated samples = " +
                    std::to_string(n) + " (need >= 1000)"};
}

// --------------------------------------------------------------------------
// 8. limit generator residuals with a domain negative control

Outcome criterion8() {
  ExperimentConfig spider(weighted_spider());
  spider.name = "residual_spider";
  spider.kind = ExperimentKind::Residual;
  spider.shapes = alpha2_shapes(spider.graph);
  spider.eps = {0.1};
  spider.dt = 0.001;
  spider.T = 0.5;
  spider.n_paths = 4000;
  spider.seed = 51;

  ExperimentConfig curve(Graph(single_curve_graph(tapered_half_circle(), 1.0)));
  curve.name = "residual_curve";
  curve.kind = ExperimentKind::Residual;
  curve.shapes = alpha2_shapes(curve.graph);
  curve.eps = {0.1};
  curve.dt = 0.001;
  curve.T = 0.5;
  curve.n_paths = 4000;
  curve.seed = 52;
  curve.coeffs.sigma_kind = "constant";
  curve.coeffs.sigma_matrix = Mat::Zero(2, 2);
  curve.coeffs.sigma_matrix(0, 0) = 1.0;
  curve.coeffs.sigma_matrix(1, 1) = 0.6;  // anisotropy feeds the curvature drift
  const auto& mg = std::get<MetricGraph>(curve.graph);
  curve.start.kind = "edge_point";
  curve.start.edge = 0;
  curve.start.s = 0.5 * mg.edge(0).curve.length();

  int functions = 0;
  double worst = 0.0;
  bool controls = true, pass = true;
  for (const ExperimentConfig* cfg : {&spider, &curve}) {
    const ExperimentResult res = run_experiment(*cfg, 1);
    pass = pass && res.pass;
    const json summary =
        json::parse(report_named(res, cfg->name + ".residual_summary.json"));
    controls = controls && summary["negative_control_rejected"].get<bool>();
    for (const auto& item : summary["functions"]) {
      ++functions;
      const json rep = json::parse(report_named(
          res, cfg->name + ".residual." + item["function"].get<std::string>() + ".json"));
      const double bound =
          3.0 * rep["se"].get<double>() + rep["bias_budget"].get<double>();
      worst = std::max(worst, std::abs(rep["estimate"].get<double>()) / bound);
    }
  }
  pass = pass && controls && functions >= 5;
  return {pass, std::to_string(functions) +
                    " functions (flat spider + curved anisotropic edge), max "
                    "|residual|/bound = " +
                    fmt(worst) + ", violator rejected: " + (controls ? "yes" : "no")};
}

// --------------------------------------------------------------------------
// 9. curved tube marginal vs the direct edge SDE

Outcome criterion9() {
  ExperimentConfig cfg(Graph(single_curve_graph(tapered_half_circle(), 1.0)));
  cfg.name = "curve_marginal";
  cfg.kind = ExperimentKind::CurveLimit;
  cfg.shapes = alpha2_shapes(cfg.graph);
  cfg.eps = {0.08, 0.04, 0.02};
  cfg.dt_per_eps_sq = 0.125;
  cfg.T = 0.5;
  cfg.n_paths = 5000;
  cfg.seed = 61;
  const auto& mg = std::get<MetricGraph>(cfg.graph);
  cfg.start.kind = "edge_point";
  cfg.start.edge = 0;
  cfg.start.s = 0.5 * mg.edge(0).curve.length();
  const ExperimentResult res = run_experiment(cfg, 1);
  absorb(res);
  const json sweep = json::parse(report_named(res, cfg.name + ".sweep.json"));
  std::string w1s;
  for (const auto& m : sweep["metric"]) w1s += (w1s.empty() ? "" : "/") + fmt(m.get<double>());
  return {res.pass, "final-time W1 = " + w1s + " (finest must be < 0.05, non-increasing)"};
}

// --------------------------------------------------------------------------
// 10. tube containment and the halving tail

Outcome criterion10() {
  if (g_halvings.empty()) return {false, "no tube paths were run"};
  std::vector<long> h = g_halvings;
  std::sort(h.begin(), h.end());
  const size_t i =
      static_cast<size_t>(std::ceil(0.99 * static_cast<double>(h.size()))) - 1;
  const long p99 = h[std::min(i, h.size() - 1)];
  const bool pass = g_boundary_exits == 0;
  return {pass, std::to_string(g_boundary_exits) + " boundary exits across " +
                    std::to_string(h.size()) + " tube paths; halving events p99 = " +
                    std::to_string(p99) + ", max depth = " +
                    std::to_string(g_max_halving_depth)};
}

// --------------------------------------------------------------------------
// 11. worker-count determinism of the confined sweep

Outcome criterion11() {
  const ExperimentResult res = run_experiment(hit_sweep_config(false), 3);
  absorb(res);
  if (res.reports.size() != g_sweep_reports.size())
    return {false, "report count differs across worker counts"};
  for (size_t i = 0; i < res.reports.size(); ++i)
    if (res.reports[i].filename != g_sweep_reports[i].filename ||
        res.reports[i].content != g_sweep_reports[i].content)
      return {false, "report " + res.reports[i].filename + " differs with 3 workers"};
  return {true, std::to_string(res.reports.size()) +
                    " reports byte-identical with 1 and 3 workers"};
}

}  // namespace

int main() {
  struct Entry {
    int id;
    const char* label;
    Outcome (*run)();
  };
  const Entry entries[] = {
      {1, "closed-form vertex weights via the CLI", criterion1},
      {2, "cross-section masses vs midpoint oracle", criterion2},
      {3, "confined junction exit frequencies", criterion3},
      {4, "reflected junction exit frequencies", criterion4},
      {5, "junction start insensitivity", criterion5},
      {6, "vertex occupation linearity", criterion6},
      {7, "stationary radial law", criterion7},
      {8, "limit generator residuals", criterion8},
      {9, "curved tube marginal vs edge SDE", criterion9},
      {10, "tube containment and halving tail", criterion10},
      {11, "worker-count determinism", criterion11},
  };
  bool all = true;
  for (const Entry& e : entries) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      o = e.run();
    } catch (const std::exception& ex) {
      o = {false, std::string("exception: ") + ex.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("criterion %2d (%s): %s  [%s] (%.1fs)\n", e.id, e.label,
                o.pass ? "PASS" : "FAIL", o.detail.c_str(), secs);
    std::fflush(stdout);
    all = all && o.pass;
  }
  std::printf("acceptance: %s\n", all ? "PASS" : "FAIL");
  return all ? 0 : 1;
}
