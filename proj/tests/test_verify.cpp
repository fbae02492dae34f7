#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "graphtube/estimators.hpp"
#include "graphtube/stats.hpp"
#include "graphtube/test_function.hpp"
#include "graphtube/weights.hpp"

using namespace graphtube;

namespace {

Vec v2(double x, double y) {
  Vec v(2);
  v << x, y;
  return v;
}

Vec v3(double x, double y, double z) {
  Vec v(3);
  v << x, y, z;
  return v;
}

Graph two_spider() { return SpiderGraph({v2(1, 0), v2(-1, 0)}, {1, 1}); }

Graph three_spider_n2(std::vector<double> widths = {1, 1, 2}) {
  const double h = std::sqrt(3.0) / 2.0;
  return SpiderGraph({v2(1, 0), v2(-0.5, h), v2(-0.5, -h)}, std::move(widths));
}

std::vector<PotentialShape> same_shape(const Graph& g, PotentialShape s) {
  return std::vector<PotentialShape>(static_cast<size_t>(num_edges(g)), std::move(s));
}

Path make_path(std::vector<double> times, std::vector<Vec> points) {
  Path p;
  p.dim = static_cast<int>(points.front().size());
  p.times = std::move(times);
  for (const Vec& x : points)
    for (int i = 0; i < p.dim; ++i) p.xs.push_back(x(i));
  return p;
}

template <class Obs>
void replay_tube(const Path& path, Obs& obs, long p) {
  for (long k = 0; k < path.samples(); ++k)
    if (!obs.on_sample(p, k, path.times[k], path.at(k))) break;
  obs.on_path_done(p, path.diag);
}

}  // namespace

// ---------------------------------------------------------------------------
// Statistics kernel.

TEST_CASE("pairwise sum and mean/se basics") {
  CHECK(pairwise_sum(std::vector<double>{}) == 0.0);
  CHECK(pairwise_sum({42.0}) == 42.0);
  std::vector<double> v;
  for (int k = 1; k <= 100; ++k) v.push_back(k);
  CHECK(pairwise_sum(v) == 5050.0);
  CHECK(pairwise_sum(v.data(), 100) == 5050.0);

  const MeanSE m = mean_se({1.0, 2.0, 3.0, 4.0});
  CHECK(m.n == 4);
  CHECK(m.mean == doctest::Approx(2.5).epsilon(1e-15));
  CHECK(m.se == doctest::Approx(0.6454972243679028).epsilon(1e-14));
}

TEST_CASE("wilson interval reference values") {
  const Interval i = wilson_interval(25, 100);
  CHECK(i.lo == doctest::Approx(0.15642982051849668).epsilon(1e-13));
  CHECK(i.hi == doctest::Approx(0.37468052333941481).epsilon(1e-13));
  const Interval z = wilson_interval(0, 50);
  CHECK(z.lo == 0.0);
  CHECK(z.hi == doctest::Approx(0.11715209171762796).epsilon(1e-13));
}

TEST_CASE("kolmogorov-smirnov statistics by hand") {
  // Uniform model, samples {0.1, 0.5, 0.9}: the sup sits at 0.9 from below.
  const double d =
      ks_statistic({0.9, 0.1, 0.5}, [](double x) { return x; });  // sorts internally
  CHECK(d == doctest::Approx(0.9 - 2.0 / 3.0).epsilon(1e-12));
  CHECK(ks_two_sample({1.0, 2.0}, {1.5}) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(ks_critical(100.0) == doctest::Approx(0.16069489685124864).epsilon(1e-13));
}

TEST_CASE("wasserstein and total variation on tiny inputs") {
  CHECK(wasserstein1({0.0}, {1.0}) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(wasserstein1({0.0, 1.0}, {0.5, 0.5}) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(wasserstein1({0.3, 0.7}, {0.7, 0.3}) == doctest::Approx(0.0));
  CHECK(tv_distance({10, 0}, {0, 10}) == doctest::Approx(1.0));
  CHECK(tv_distance({5, 5}, {5, 5}) == doctest::Approx(0.0));
  CHECK(tv_distance({8, 2}, {2, 8}) == doctest::Approx(0.6).epsilon(1e-14));
}

TEST_CASE("permutation test extremes and determinism") {
  std::vector<int> same(200, 0);
  for (int k = 0; k < 100; ++k) same[k] = 1;
  const PermutationResult eq = permutation_tv_test(same, same, 2, 500, 11);
  CHECK(eq.statistic == doctest::Approx(0.0));
  CHECK(eq.p_value == doctest::Approx(1.0));

  const std::vector<int> zeros(200, 0), ones(200, 1);
  const PermutationResult dj = permutation_tv_test(zeros, ones, 2, 999, 11);
  CHECK(dj.statistic == doctest::Approx(1.0));
  CHECK(dj.p_value == doctest::Approx(1.0 / 1000.0).epsilon(1e-12));
  const PermutationResult dj2 = permutation_tv_test(zeros, ones, 2, 999, 11);
  CHECK(dj.p_value == dj2.p_value);
}

TEST_CASE("chi squared pieces") {
  CHECK(chi2_statistic({10, 20, 70}, {0.1, 0.2, 0.7}) == doctest::Approx(0.0));
  CHECK(chi2_statistic({12, 18, 70}, {0.1, 0.2, 0.7}) == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(chi2_critical(2, 0.99) == doctest::Approx(9.21034037197618).epsilon(1e-12));
  CHECK(chi2_pvalue(5.0, 2) == doctest::Approx(0.0820849986238988).epsilon(1e-12));
}

// ---------------------------------------------------------------------------
// Cross-section masses and Kirchhoff weights.

TEST_CASE("cross-section masses against reference quadrature") {
  // Independently computed integrals of r^(n-2) exp(-r^a/(1-r^a)) over [0,1).
  const double a1n3 = cross_section_mass(PotentialShape::power_ratio(1.0), 3);
  const double a2n3 = cross_section_mass(PotentialShape::power_ratio(2.0), 3);
  const double a4n3 = cross_section_mass(PotentialShape::power_ratio(4.0), 3);
  const double a1n2 = cross_section_mass(PotentialShape::power_ratio(1.0), 2);
  const double a2n2 = cross_section_mass(PotentialShape::power_ratio(2.0), 2);
  CHECK(a1n3 == doctest::Approx(0.10547895651520889).epsilon(1e-12));
  CHECK(a2n3 == doctest::Approx(0.20182631883840296).epsilon(1e-12));
  CHECK(a4n3 == doctest::Approx(0.30172508060946904).epsilon(1e-12));
  CHECK(a1n2 == doctest::Approx(0.40365263767680593).epsilon(1e-12));
  CHECK(a2n2 == doctest::Approx(0.60345016121893809).epsilon(1e-12));
  // Substituting r -> r^2 maps the n=2, alpha=1 integral onto twice the
  // n=3, alpha=2 one (and alpha=2 onto alpha=4): a useful cross-check.
  CHECK(a1n2 == doctest::Approx(2.0 * a2n3).epsilon(1e-13));
  CHECK(a2n2 == doctest::Approx(2.0 * a4n3).epsilon(1e-13));
}

TEST_CASE("kirchhoff weights in ambient dimension three") {
  const Graph g = SpiderGraph({v3(1, 0, 0), v3(0, 1, 0), v3(0, 0, 1)}, {1, 1, 2});
  const KirchhoffWeights w =
      kirchhoff_weights(g, same_shape(g, PotentialShape::power_ratio(2.0)));
  REQUIRE(w.p.size() == 3);
  CHECK(w.vertex == 0);
  // Identical shapes cancel: p proportional to c^2 = (1, 1, 4).
  CHECK(w.p(0) == doctest::Approx(1.0 / 6.0).epsilon(1e-12));
  CHECK(w.p(1) == doctest::Approx(1.0 / 6.0).epsilon(1e-12));
  CHECK(w.p(2) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(w.p.sum() == doctest::Approx(1.0).epsilon(1e-12));
  for (int e = 0; e < 3; ++e) CHECK(w.incident[e].edge == e);

  // Distinct shapes do not cancel: p0 = A1 / (A1 + A2) with the reference
  // masses above.
  const Graph g2 = SpiderGraph({v3(1, 0, 0), v3(-1, 0, 0)}, {1, 1});
  const KirchhoffWeights w2 = kirchhoff_weights(
      g2, {PotentialShape::power_ratio(1.0), PotentialShape::power_ratio(2.0)});
  CHECK(w2.p(0) == doctest::Approx(0.34323835278725931).epsilon(1e-11));

  CHECK_THROWS_AS(kirchhoff_weights(g, {PotentialShape::power_ratio(2.0)}), Error);
}

TEST_CASE("reflecting weights ignore the shapes") {
  const Graph g = three_spider_n2({1, 1, 2});
  const KirchhoffWeights w = reflecting_weights(g);
  // n = 2: p proportional to c^1 = (1, 1, 2).
  CHECK(w.p(0) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(w.p(1) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(w.p(2) == doctest::Approx(0.5).epsilon(1e-12));
}

// ---------------------------------------------------------------------------
// First passage.

TEST_CASE("first passage interpolates the crossing time linearly") {
  const Graph g = two_spider();
  const auto& sp = std::get<SpiderGraph>(g);
  const Path path =
      make_path({0.0, 0.1, 0.2}, {v2(0, 0), v2(0.04, 0), v2(0.12, 0)});
  const PassageRecord rec = first_passage(path, sp, 0.1);
  CHECK(rec.hit);
  CHECK(rec.edge == 0);
  // Crossing between arcs 0.04 and 0.12: t = 0.1 + 0.1 * (0.1-0.04)/(0.12-0.04).
  CHECK(rec.time == doctest::Approx(0.175).epsilon(1e-12));

  const Path beyond = make_path({0.0, 0.1}, {v2(0.12, 0), v2(0.2, 0)});
  const PassageRecord r2 = first_passage(beyond, sp, 0.1);
  CHECK(r2.hit);
  CHECK(r2.time == 0.0);
  CHECK(r2.edge == 0);

  const Path stay = make_path({0.0, 0.1}, {v2(0.01, 0), v2(-0.02, 0)});
  CHECK_FALSE(first_passage(stay, sp, 0.1).hit);
  CHECK_THROWS_AS(first_passage(path, sp, 0.0), Error);
}

TEST_CASE("hitting stats pass/fail and the missing-path guard") {
  std::vector<PassageRecord> recs;
  for (int k = 0; k < 49; ++k) recs.push_back({true, 0.1, 0});
  for (int k = 0; k < 50; ++k) recs.push_back({true, 0.1, 1});
  recs.push_back({false, 0.0, -1});  // 1 of 100 missing: exactly at the limit
  Vec targets = v2(0.5, 0.5);
  const HitProbReport rep = hitting_stats(recs, targets, 0.25, 0.02);
  CHECK(rep.n_paths == 100);
  CHECK(rep.missing == 1);
  CHECK(rep.counts == std::vector<long>{49, 50});
  CHECK(rep.empirical[0] == doctest::Approx(0.49));
  CHECK(rep.max_abs_dev == doctest::Approx(0.01).epsilon(1e-12));
  const Interval wi = wilson_interval(49, 100);
  CHECK(rep.wilson_lo[0] == wi.lo);
  CHECK(rep.wilson_hi[0] == wi.hi);
  CHECK(rep.pass);

  // Same counts against badly wrong targets must fail.
  const HitProbReport bad = hitting_stats(recs, v2(0.3, 0.7), 0.25, 0.02);
  CHECK_FALSE(bad.pass);
  CHECK(bad.max_abs_dev > 0.15);

  recs.push_back({false, 0.0, -1});  // 2 of 101 missing: over the 1% limit
  CHECK_THROWS_AS(hitting_stats(recs, targets, 0.25, 0.02), ExperimentInvalidError);

  CHECK_THROWS_AS(hitting_stats({}, targets, 0.25, 0.02), Error);
  CHECK_THROWS_AS(hitting_stats({{true, 0.1, 7}}, targets, 0.25, 0.02), Error);
}

TEST_CASE("start insensitivity passes on equal laws and fails on disjoint ones") {
  std::vector<PassageRecord> a, b;
  for (int k = 0; k < 300; ++k) {
    a.push_back({true, 0.1, k % 2});
    b.push_back({true, 0.1, k % 2});
  }
  b.push_back({false, 0.0, -1});
  const StartInsensitivityReport eq = start_insensitivity(a, b, 2, 17);
  CHECK(eq.tv == doctest::Approx(0.0));
  CHECK(eq.missing_b == 1);
  CHECK(eq.pass);

  std::vector<PassageRecord> c, d;
  for (int k = 0; k < 300; ++k) {
    c.push_back({true, 0.1, 0});
    d.push_back({true, 0.1, 1});
  }
  const StartInsensitivityReport dj = start_insensitivity(c, d, 2, 17);
  CHECK(dj.tv == doctest::Approx(1.0));
  CHECK(dj.p_value < 0.01);
  CHECK_FALSE(dj.pass);
}

// ---------------------------------------------------------------------------
// Occupation.

TEST_CASE("occupation time is the exact trapezoid of the indicator") {
  const Path path = make_path({0.0, 1.0, 2.0, 3.0},
                              {v2(0.5, 0), v2(1.5, 0), v2(0.5, 0), v2(0.5, 0)});
  const std::vector<double> occ = occupation_times(path, {0.4, 1.0, 2.0});
  REQUIRE(occ.size() == 3);
  CHECK(occ[0] == 0.0);  // never inside
  CHECK(occ[1] == 2.0);  // indicator 1,0,1,1 -> 0.5 + 0.5 + 1
  CHECK(occ[2] == 3.0);  // always inside
}

TEST_CASE("occupation stats enforce the linearity band") {
  // Two paths, two levels; ratios (0.2, 0.2): band exactly 1.
  const std::vector<double> occ{0.01, 0.02, 0.03, 0.06};
  const OccupationReport rep = occupation_stats(occ, 2, {0.1, 0.2}, 2.0);
  CHECK(rep.mean[0] == doctest::Approx(0.02).epsilon(1e-14));
  CHECK(rep.mean[1] == doctest::Approx(0.04).epsilon(1e-14));
  CHECK(rep.band == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(rep.pass);

  // Ratios (0.2, 0.35): band 1.75 exceeds the 1.5 limit.
  const OccupationReport bad = occupation_stats({0.02, 0.07, 0.02, 0.07}, 2, {0.1, 0.2}, 2.0);
  CHECK(bad.band == doctest::Approx(1.75).epsilon(1e-12));
  CHECK_FALSE(bad.pass);

  CHECK_THROWS_AS(occupation_stats(occ, 3, {0.1, 0.2}, 2.0), Error);
}

// ---------------------------------------------------------------------------
// Radial stationarity.

TEST_CASE("radial samples honor burn-in, stride and the edge-region cut") {
  const Graph g = two_spider();
  const Path path = make_path({0.0, 0.1, 0.2, 0.3},
                              {v2(0.5, 0.03), v2(0.6, 0.05), v2(0.7, 0.02), v2(0.05, 0.01)});
  RadialSampleConfig cfg;
  cfg.eps = 0.1;
  cfg.burn_in = 0.05;  // drops k = 0
  cfg.stride = 2;      // keeps even k
  cfg.min_arc = 0.2;   // drops the k = 3 point at arc 0.05
  const std::vector<double> r = radial_samples(path, g, cfg);
  REQUIRE(r.size() == 1);
  CHECK(r[0] == doctest::Approx(0.2).epsilon(1e-12));  // d = 0.02 at eps c = 0.1
}

TEST_CASE("radial stationarity accepts the model law and rejects uniform") {
  const PotentialShape shape = PotentialShape::power_ratio(2.0);
  // Deterministic model draws: quantiles of the cross-section law computed by
  // an independent (finer) trapezoid grid.
  const int kn = 8193;
  const double rmax = 1.0 - 1e-9;
  std::vector<double> grid(kn), cum(kn, 0.0);
  double prev = 0.0;
  for (int j = 0; j < kn; ++j) {
    grid[j] = rmax * j / (kn - 1.0);
    const double f = std::exp(-shape.value(grid[j]));  // n = 2: no r factor
    if (j > 0) cum[j] = cum[j - 1] + 0.5 * (prev + f) * (grid[j] - grid[j - 1]);
    prev = f;
  }
  const long n = 3000;
  std::vector<double> model(n), uniform(n);
  for (long i = 0; i < n; ++i) {
    const double u = (i + 0.5) / static_cast<double>(n) * cum.back();
    const auto it = std::lower_bound(cum.begin(), cum.end(), u);
    const size_t j = std::max<size_t>(1, std::distance(cum.begin(), it));
    const double t = (u - cum[j - 1]) / (cum[j] - cum[j - 1]);
    model[i] = grid[j - 1] + t * (grid[j] - grid[j - 1]);
    uniform[i] = (i + 0.5) / static_cast<double>(n);
  }
  RadialSampleConfig cfg;
  cfg.eps = 0.1;
  const RadialLawReport good = radial_stationarity(model, shape, 2, cfg);
  CHECK(good.pass);
  CHECK(good.ks < good.ks_critical);
  CHECK(good.n_samples == n);
  const RadialLawReport bad = radial_stationarity(uniform, shape, 2, cfg);
  CHECK_FALSE(bad.pass);
  CHECK(bad.ks > 3.0 * bad.ks_critical);
  CHECK_THROWS_AS(radial_stationarity({0.1, 0.2}, shape, 2, cfg), ExperimentInvalidError);
}

// ---------------------------------------------------------------------------
// Martingale residuals.

namespace {

GraphPath make_graph_path(std::vector<double> times, std::vector<int> edges,
                          std::vector<double> ss) {
  GraphPath p;
  p.times = std::move(times);
  p.edges = std::move(edges);
  p.ss = std::move(ss);
  return p;
}

}  // namespace

TEST_CASE("path residual matches the closed form for f = s^2") {
  const Graph g = single_curve_graph(ParamCurve::line(v2(0, 0), v2(1, 0), 1.0 / 256.0), 1.0);
  const auto sdes = make_edge_sdes(g, SdeCoefficients::identity(2));
  const TestFunction f("sq", {PiecewisePoly({0.0, 0.0, 1.0}, 1.0)});
  // L f = diffusion_sq = 1, so the residual is f(end) - f(start) - elapsed.
  const GraphPath path = make_graph_path({0.0, 0.5, 1.0}, {0, 0, 0}, {0.1, 0.3, 0.2});
  const double res = path_residual(path, f, sdes);
  CHECK(res == doctest::Approx(0.2 * 0.2 - 0.1 * 0.1 - 1.0).epsilon(1e-14));

  ResidualObserver obs(f, sdes, 1);
  for (long k = 0; k < path.samples(); ++k)
    obs.on_sample(0, k, path.times[k], path.at(k));
  obs.on_path_done(0);
  CHECK(obs.residuals()[0] == res);
}

TEST_CASE("residual report threshold combines SE and the bias budget") {
  CHECK(bias_budget(0.04) == doctest::Approx(0.2).epsilon(1e-14));
  const ResidualReport ok = residual_report({0.1, -0.1, 0.05, -0.05}, "f", 1e-4);
  CHECK(ok.pass);
  CHECK(ok.estimate == doctest::Approx(0.0));
  // Constant residual with zero SE: only the budget remains, and it is lower.
  const ResidualReport bad = residual_report({0.5, 0.5, 0.5, 0.5}, "f", 0.01);
  CHECK(bad.se == doctest::Approx(0.0));
  CHECK(bad.bias_budget == doctest::Approx(0.1).epsilon(1e-14));
  CHECK_FALSE(bad.pass);
}

TEST_CASE("martingale residual rejects kirchhoff violators and passes at two dt") {
  const Graph g = three_spider_n2({1, 1, 2});
  const auto shapes = same_shape(g, PotentialShape::power_ratio(2.0));
  const auto weights = all_kirchhoff_weights(g, shapes);  // (1/4, 1/4, 1/2)
  const auto sdes = make_edge_sdes(g, SdeCoefficients::identity(2), 16.0);

  const std::vector<double> ends{16.0, 16.0, 16.0};
  const TestFunction ok =
      make_vertex_test_function("balanced", {1.0, 1.0, -1.0}, 0.5, 1.0, ends);
  CHECK_NOTHROW(ok.validate_domain(weights, sdes));
  const TestFunction violator =
      make_vertex_test_function("unbalanced", {1.0, 1.0, 1.0}, 0.5, 1.0, ends);
  CHECK_THROWS_AS(violator.validate_domain(weights, sdes), DomainViolationError);

  const GraphProcess proc(g, make_edge_sdes(g, SdeCoefficients::identity(2), 16.0), weights);
  const GraphStartSampler start = [](long, PathRng&) { return GraphState{2, 0.0}; };
  std::vector<double> means;
  for (const double dt : {1e-3, 5e-4}) {
    GraphSimConfig cfg;
    cfg.dt = dt;
    cfg.T = 0.5;
    cfg.n_paths = 3000;
    cfg.seed = 2025;
    const auto batch = simulate_graph(proc, cfg, start);
    CHECK_THROWS_AS(
        martingale_residual(batch, violator, sdes, weights, 0.0, cfg.T, dt),
        DomainViolationError);
    const ResidualReport rep = martingale_residual(batch, ok, sdes, weights, 0.0, cfg.T, dt);
    CHECK(rep.pass);
    means.push_back(rep.estimate);
    // Window restriction and its degenerate-window guard.
    const ResidualReport win =
        martingale_residual(batch, ok, sdes, weights, 0.1, 0.4, dt);
    CHECK(win.pass);
    CHECK_THROWS_AS(martingale_residual(batch, ok, sdes, weights, 0.3, 0.3, dt), Error);
  }
}

// ---------------------------------------------------------------------------
// Marginal distances and snapshots.

TEST_CASE("marginal distance on a tiny hand case") {
  const std::vector<std::vector<GraphState>> a{{{0, 0.1}, {0, 0.3}}};
  const std::vector<std::vector<GraphState>> b{{{0, 0.2}, {1, 0.4}}};
  const MarginalDistanceReport rep = marginal_distance(a, b, {1.0}, 2);
  REQUIRE(rep.tv.size() == 1);
  CHECK(rep.tv[0] == doctest::Approx(0.5).epsilon(1e-12));
  // Edge 0: weights (1, 0.5), W1 between {0.1, 0.3} and {0.2} is 0.1; edge 1
  // has no a-samples and is skipped.
  CHECK(rep.w1[0] == doctest::Approx(0.075).epsilon(1e-12));
  CHECK(rep.total[0] == doctest::Approx(0.575).epsilon(1e-12));
  CHECK_THROWS_AS(marginal_distance(a, b, {1.0, 2.0}, 2), Error);
}

TEST_CASE("snapshot extraction requires matching time grids") {
  const GraphPath p = make_graph_path({0.0, 0.5, 1.0}, {0, 1, 2}, {0.0, 0.2, 0.4});
  const auto snaps = graph_batch_at({p}, {0.5, 1.0});
  REQUIRE(snaps.size() == 2);
  CHECK(snaps[0][0].edge == 1);
  CHECK(snaps[0][0].s == 0.2);
  CHECK(snaps[1][0].edge == 2);
  CHECK_THROWS_AS(graph_batch_at({p}, {0.31}), Error);
}

// ---------------------------------------------------------------------------
// Streaming observers agree with the pure estimators on recorded paths.

TEST_CASE("streaming observers reproduce the recorded-path estimators") {
  const Graph g = two_spider();
  const auto& sp = std::get<SpiderGraph>(g);
  const ConfinementField field(g, same_shape(g, PotentialShape::power_ratio(2.0)));
  const SdeCoefficients coeffs = SdeCoefficients::identity(2);
  TubeSimConfig cfg;
  cfg.eps = 0.1;
  cfg.dt = cfg.eps * cfg.eps / 8.0;
  cfg.T = 0.5;
  cfg.n_paths = 50;
  cfg.seed = 7;
  const StartSampler start = [](long, PathRng&) {
    Vec x(2);
    x << 0.02, 0.0;
    return x;
  };
  const auto paths = simulate_confined(field, coeffs, cfg, start);
  REQUIRE(paths.size() == 50);

  SUBCASE("first passage") {
    FirstPassageObserver obs(sp, 0.15, cfg.n_paths);
    for (long p = 0; p < cfg.n_paths; ++p) replay_tube(paths[p], obs, p);
    long hits = 0;
    for (long p = 0; p < cfg.n_paths; ++p) {
      const PassageRecord pure = first_passage(paths[p], sp, 0.15);
      const PassageRecord& st = obs.records()[p];
      CHECK(st.hit == pure.hit);
      CHECK(st.edge == pure.edge);
      CHECK(st.time == pure.time);
      hits += pure.hit ? 1 : 0;
    }
    CHECK(hits > 25);  // most paths cross within the horizon
  }

  SUBCASE("occupation") {
    const std::vector<double> levels{0.1, 0.2};
    OccupationObserver obs(levels, cfg.n_paths);
    for (long p = 0; p < cfg.n_paths; ++p) replay_tube(paths[p], obs, p);
    for (long p = 0; p < cfg.n_paths; ++p) {
      const auto pure = occupation_times(paths[p], levels);
      CHECK(obs.occupations()[2 * p + 0] == pure[0]);
      CHECK(obs.occupations()[2 * p + 1] == pure[1]);
      CHECK(pure[1] >= pure[0]);  // nested balls
    }
  }

  SUBCASE("radial samples") {
    RadialSampleConfig rc;
    rc.eps = cfg.eps;
    rc.burn_in = 0.1;
    rc.stride = 4;
    rc.min_arc = 2.0 * sp.kappa() * cfg.eps;
    RadialSampleObserver obs(g, rc, cfg.n_paths);
    for (long p = 0; p < cfg.n_paths; ++p) replay_tube(paths[p], obs, p);
    std::vector<double> pure;
    for (long p = 0; p < cfg.n_paths; ++p) {
      const auto v = radial_samples(paths[p], g, rc);
      pure.insert(pure.end(), v.begin(), v.end());
    }
    CHECK(obs.samples() == pure);
    CHECK(pure.size() > 100);
  }

  SUBCASE("tube snapshots") {
    const std::vector<long> idx{40, 200, 400};
    TubeSnapshotObserver obs(g, idx, cfg.dt, cfg.n_paths);
    for (long p = 0; p < cfg.n_paths; ++p) replay_tube(paths[p], obs, p);
    const auto pure = project_batch_at(paths, g, obs.times());
    REQUIRE(pure.size() == 3);
    for (size_t j = 0; j < pure.size(); ++j)
      for (long p = 0; p < cfg.n_paths; ++p) {
        CHECK(obs.snapshots()[j][p].edge == pure[j][p].edge);
        CHECK(obs.snapshots()[j][p].s == pure[j][p].s);
      }
  }
}

TEST_CASE("graph snapshot observer matches graph_batch_at") {
  const Graph g = three_spider_n2();
  const auto shapes = same_shape(g, PotentialShape::power_ratio(2.0));
  const GraphProcess proc(g, make_edge_sdes(g, SdeCoefficients::identity(2), 8.0),
                          all_kirchhoff_weights(g, shapes));
  GraphSimConfig cfg;
  cfg.dt = 1e-3;
  cfg.T = 0.3;
  cfg.n_paths = 30;
  cfg.seed = 5;
  const GraphStartSampler start = [](long, PathRng&) { return GraphState{0, 0.5}; };
  const auto batch = simulate_graph(proc, cfg, start);
  GraphSnapshotObserver obs({100, 300}, cfg.dt, cfg.n_paths);
  for (long p = 0; p < cfg.n_paths; ++p) {
    const GraphPath& path = batch[p];
    for (long k = 0; k < path.samples(); ++k)
      if (!obs.on_sample(p, k, path.times[k], path.at(k))) break;
    obs.on_path_done(p);
  }
  const auto pure = graph_batch_at(batch, obs.times());
  for (size_t j = 0; j < pure.size(); ++j)
    for (long p = 0; p < cfg.n_paths; ++p) {
      CHECK(obs.snapshots()[j][p].edge == pure[j][p].edge);
      CHECK(obs.snapshots()[j][p].s == pure[j][p].s);
    }
}

// ---------------------------------------------------------------------------
// Test functions.

TEST_CASE("piecewise polynomials evaluate, differentiate and combine") {
  const PiecewisePoly sq({0.0, 0.0, 1.0}, 2.0);
  CHECK(sq.eval(0.5) == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(sq.d1(0.5) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(sq.d2(0.5) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(sq.end() == 2.0);

  // 1 + s built from two local pieces; algebra must merge breakpoints.
  const PiecewisePoly lin({0.0, 1.0, 2.0}, {{1.0, 1.0}, {2.0, 1.0}});
  CHECK(lin.eval(1.5) == doctest::Approx(2.5).epsilon(1e-14));
  const PiecewisePoly prod = sq.times(lin);
  CHECK(prod.eval(1.5) == doctest::Approx(2.25 * 2.5).epsilon(1e-13));
  CHECK(prod.d1(1.5) == doctest::Approx(2.0 * 1.5 * 2.5 + 2.25).epsilon(1e-13));
  const PiecewisePoly sum = sq.plus(lin);
  CHECK(sum.eval(0.5) == doctest::Approx(0.25 + 1.5).epsilon(1e-14));
  CHECK(PiecewisePoly::constant(2.5, 3.0).eval(1.7) == 2.5);
  CHECK(PiecewisePoly::constant(2.5, 3.0).d1(1.7) == 0.0);
}

TEST_CASE("taper is a C2 plateau that dies at its radius") {
  const PiecewisePoly t = PiecewisePoly::taper(0.5, 4.0);
  CHECK(t.eval(0.0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(t.d1(0.0) == doctest::Approx(0.0));
  CHECK(t.d2(0.0) == doctest::Approx(0.0));
  CHECK(t.eval(0.5) == doctest::Approx(0.0));
  CHECK(t.d1(0.5) == doctest::Approx(0.0));
  CHECK(t.d2(0.5) == doctest::Approx(0.0));
  CHECK(t.eval(2.0) == 0.0);
  const double mid = t.eval(0.25);
  CHECK(mid > 0.0);
  CHECK(mid < 1.0);
}

TEST_CASE("derivatives agree with central differences") {
  const TestFunction f =
      make_vertex_test_function("probe", {1.0, 1.0, -1.0}, 0.5, 1.0, {16.0, 16.0, 16.0});
  const double h = 1e-4;
  for (const double s : {0.1, 0.3, 0.7}) {
    const double d1 = (f.eval(2, s + h) - f.eval(2, s - h)) / (2.0 * h);
    const double d2 = (f.eval(2, s + h) - 2.0 * f.eval(2, s) + f.eval(2, s - h)) / (h * h);
    CHECK(f.d1(2, s) == doctest::Approx(d1).epsilon(1e-6));
    CHECK(f.d2(2, s) == doctest::Approx(d2).epsilon(1e-4));
  }
}

TEST_CASE("bump test function is neumann with unit peak") {
  const TestFunction f = make_bump_test_function("bump", 2.0);
  CHECK(f.eval(0, 1.0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(f.eval(0, 0.0) == doctest::Approx(0.0));
  CHECK(f.eval(0, 2.0) == doctest::Approx(0.0));
  CHECK(f.d1(0, 0.0) == doctest::Approx(0.0));
  CHECK(f.d1(0, 2.0) == doctest::Approx(0.0));
}

TEST_CASE("statistical error halves like one over root two") {
  PathRng rng(404, 0);
  std::vector<double> x;
  for (int k = 0; k < 8000; ++k) x.push_back(rng.gauss());
  const std::vector<double> half(x.begin(), x.begin() + 4000);
  const double ratio = mean_se(half).se / mean_se(x).se;
  CHECK(ratio == doctest::Approx(std::sqrt(2.0)).epsilon(0.2));
}
