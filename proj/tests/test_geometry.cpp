#include <doctest.h>

#include <cmath>

#include "graphtube/geometry.hpp"

using namespace graphtube;

namespace {

Vec v2(double x, double y) {
  Vec v(2);
  v << x, y;
  return v;
}

SpiderGraph two_spider(double c0 = 1.0, double c1 = 1.0) {
  return SpiderGraph({v2(1, 0), v2(-1, 0)}, {c0, c1});
}

SpiderGraph three_spider(std::vector<double> widths = {1, 1, 1}) {
  const double h = std::sqrt(3.0) / 2.0;
  return SpiderGraph({v2(1, 0), v2(-0.5, h), v2(-0.5, -h)}, std::move(widths));
}

// A -> B horizontal unit segment, B -> C vertical unit segment.
MetricGraph elbow_graph(double w0 = 1.0, double w1 = 0.5) {
  const double h = 1.0 / 64.0;
  std::vector<MetricEdge> edges;
  edges.push_back({0, 1, ParamCurve::line(v2(0, 0), v2(1, 0), h), w0});
  edges.push_back({1, 2, ParamCurve::line(v2(1, 0), v2(1, 1), h), w1});
  return MetricGraph({v2(0, 0), v2(1, 0), v2(1, 1)}, std::move(edges));
}

}  // namespace

TEST_CASE("spider junction constant has the frozen closed forms") {
  CHECK(two_spider().kappa() == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(two_spider().kappa0() == doctest::Approx(1.0).epsilon(1e-15));
  // 120 degree rays: <e_i, e_j> = -1/2, so kappa = 2 sqrt(2)/sqrt(3/2) = 4/sqrt(3).
  CHECK(three_spider().kappa() == doctest::Approx(2.3094010767585031).epsilon(1e-15));
  CHECK(three_spider({1, 1, 2}).kappa() == doctest::Approx(4.6188021535170061).epsilon(1e-15));
}

TEST_CASE("spider construction rejects degenerate input") {
  CHECK_THROWS_AS(SpiderGraph({v2(2, 0), v2(-1, 0)}, {1, 1}), GeometryError);
  CHECK_THROWS_AS(SpiderGraph({v2(1, 0), v2(1, 0)}, {1, 1}), GeometryError);
  CHECK_THROWS_AS(SpiderGraph({v2(1, 0), v2(-1, 0)}, {1, 0.0}), GeometryError);
  CHECK_THROWS_AS(SpiderGraph({v2(1, 0)}, {1, 1}), GeometryError);
}

TEST_CASE("spider ray math") {
  const SpiderGraph g = three_spider();
  const Vec x = v2(0.7, 0.1);
  CHECK(g.ray_param(0, x) == doctest::Approx(0.7).epsilon(1e-15));
  CHECK(g.ray_distance(0, x) == doctest::Approx(0.1).epsilon(1e-12));
  // Behind a ray the parameter clamps to the tip and the distance is |x|.
  const Vec behind = v2(-0.3, 0.0);
  CHECK(g.ray_param(0, behind) == 0.0);
  CHECK(g.ray_distance(0, behind) == doctest::Approx(0.3).epsilon(1e-12));
  // Brute-force check of ray_distance against |x - s e|.
  for (int e = 0; e < g.num_edges(); ++e) {
    const double s = g.ray_param(e, x);
    const Vec foot = s * g.direction(e);
    CHECK(g.ray_distance(e, x) == doctest::Approx((x - foot).norm()).epsilon(1e-12));
  }
}

TEST_CASE("spider projection picks the nearest ray and flags ties") {
  const SpiderGraph g = two_spider();
  const Projection p = g.project(v2(0.5, 0.2));
  CHECK(p.edge == 0);
  CHECK(p.s == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(p.dist == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(p.foot(0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK_FALSE(p.on_ambiguity_set);
  // Directly above the vertex both rays are equidistant.
  const Projection tie = g.project(v2(0.0, 0.3));
  CHECK(tie.on_ambiguity_set);
  CHECK(tie.dist == doctest::Approx(0.3).epsilon(1e-12));
}

TEST_CASE("straight curve matches its segment") {
  const ParamCurve c = ParamCurve::line(v2(0, 0), v2(3, 4), 1.0 / 32.0);
  CHECK(c.length() == doctest::Approx(5.0).epsilon(1e-12));
  Vec g(2), t(2), k(2);
  c.eval(2.5, g, &t, &k);
  CHECK(g(0) == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(g(1) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(t(0) == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(t(1) == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(k.norm() == doctest::Approx(0.0));
  const Projection p = c.project(v2(1.5 - 0.8 * 0.1, 2.0 + 0.6 * 0.1));
  CHECK(p.s == doctest::Approx(2.5).epsilon(1e-9));
  CHECK(p.dist == doctest::Approx(0.1).epsilon(1e-9));
}

namespace {

// Signed curvature ramping smoothly 0 -> kmax on [a, b], constant on [b, L-b],
// back to 0 on [L-a, L]: keeps the mandatory straight ends.
std::function<double(double)> ramped_curvature(double kmax, double a, double b, double len) {
  return [=](double s) {
    auto smooth = [](double t) { return t <= 0 ? 0.0 : t >= 1 ? 1.0 : t * t * (3 - 2 * t); };
    const double up = smooth((s - a) / (b - a));
    const double down = smooth((len - a - s) / (b - a));
    return kmax * std::min(up, down);
  };
}

}  // namespace

TEST_CASE("curvature-profile curve keeps unit speed and straight ends") {
  const double len = 3.0;
  const ParamCurve c = ParamCurve::from_curvature_profile(
      ramped_curvature(1.0, 0.2, 0.5, len), len, v2(0, 0), 0.0, 1.0 / 128.0);
  CHECK(c.length() == doctest::Approx(len).epsilon(1e-12));
  CHECK(c.max_curvature() == doctest::Approx(1.0).epsilon(1e-6));
  Vec g(2), t(2), k(2);
  for (double s : {0.05, 0.7, 1.5, 2.3, 2.95}) {
    c.eval(s, g, &t, &k);
    CHECK(t.norm() == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(std::abs(t.dot(k)) < 1e-6);
  }
  c.eval(0.05, g, nullptr, &k);
  CHECK(k.norm() == doctest::Approx(0.0));
  c.eval(1.5, g, nullptr, &k);
  CHECK(k.norm() == doctest::Approx(1.0).epsilon(1e-6));
  // Constant curvature all the way to the ends violates the straight-end rule.
  CHECK_THROWS_AS(ParamCurve::from_curvature_profile([](double) { return 1.0; }, len,
                                                     v2(0, 0), 0.0, 1.0 / 128.0),
                  GeometryError);
}

TEST_CASE("curve projection agrees with geometry and honors hints") {
  const double len = 3.0;
  const ParamCurve c = ParamCurve::from_curvature_profile(
      ramped_curvature(1.0, 0.2, 0.5, len), len, v2(0, 0), 0.0, 1.0 / 128.0);
  Vec g(2), t(2);
  c.eval(1.7, g, &t);
  const Vec n = v2(-t(1), t(0));
  const Vec x = g + 0.08 * n;
  const Projection p = c.project(x);
  CHECK(p.s == doctest::Approx(1.7).epsilon(1e-6));
  CHECK(p.dist == doctest::Approx(0.08).epsilon(1e-8));
  const Projection ph = c.project(x, 1.6);
  CHECK(ph.s == doctest::Approx(p.s).epsilon(1e-10));
  // Interior solutions are true critical points of the distance.
  Vec tp(2);
  c.eval(p.s, g, &tp);
  CHECK(std::abs((x - p.foot).dot(tp)) < 1e-8);
}

TEST_CASE("metric graph incidence, degree and vertex tangents") {
  const MetricGraph g = elbow_graph();
  CHECK(g.num_vertices() == 3);
  CHECK(g.num_edges() == 2);
  CHECK(g.degree(0) == 1);
  CHECK(g.degree(1) == 2);
  CHECK(g.degree(2) == 1);
  const auto& inc = g.incident(1);
  REQUIRE(inc.size() == 2);
  CHECK(inc[0].edge == 0);
  CHECK_FALSE(inc[0].at_start);
  CHECK(inc[1].edge == 1);
  CHECK(inc[1].at_start);
  const Vec t0 = g.outgoing_tangent(inc[0]);
  CHECK(t0(0) == doctest::Approx(-1.0).epsilon(1e-12));
  const Vec t1 = g.outgoing_tangent(inc[1]);
  CHECK(t1(1) == doctest::Approx(1.0).epsilon(1e-12));
  // Right-angle tangents with widths (1, 1/2): kappa = 2 sqrt(2) max c_i.
  CHECK(g.kappa(1) == doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(1e-12));
  CHECK(g.max_kappa() == doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("metric graph projection picks the nearest edge") {
  const MetricGraph g = elbow_graph();
  const Projection p0 = g.project(v2(0.4, 0.1));
  CHECK(p0.edge == 0);
  CHECK(p0.s == doctest::Approx(0.4).epsilon(1e-9));
  CHECK(p0.dist == doctest::Approx(0.1).epsilon(1e-9));
  const Projection p1 = g.project(v2(1.05, 0.5));
  CHECK(p1.edge == 1);
  CHECK(p1.s == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(p1.dist == doctest::Approx(0.05).epsilon(1e-9));
}

TEST_CASE("tube membership and clearance") {
  const Graph g = two_spider(1.0, 2.0);
  const double eps = 0.1;
  SUBCASE("edge region uses the projected edge's width") {
    const Clearance cl = tube_clearance(g, eps, v2(0.5, 0.05));
    CHECK(cl.proj.edge == 0);
    CHECK(cl.margin == doctest::Approx(0.05).epsilon(1e-12));
    CHECK(tube_margin(g, eps, v2(-0.5, 0.15)) == doctest::Approx(0.05).epsilon(1e-12));
  }
  SUBCASE("junction keeps the widest incident clearance") {
    CHECK(tube_margin(g, eps, Vec::Zero(2)) == doctest::Approx(0.2).epsilon(1e-12));
  }
  SUBCASE("outside points have negative margin") {
    CHECK(tube_margin(g, eps, v2(0.5, 0.12)) == doctest::Approx(-0.02).epsilon(1e-12));
    CHECK(tube_margin(g, eps, v2(0.5, 0.3)) < 0.0);
  }
  SUBCASE("metric graph variant") {
    const Graph mg = elbow_graph();
    CHECK(tube_margin(mg, eps, v2(0.4, 0.02)) == doctest::Approx(0.08).epsilon(1e-9));
    CHECK(tube_margin(mg, eps, v2(1.02, 0.5)) == doctest::Approx(0.03).epsilon(1e-9));
  }
}

TEST_CASE("graph variant helpers") {
  const Graph sp = three_spider();
  CHECK(ambient_dim(sp) == 2);
  CHECK(num_edges(sp) == 3);
  CHECK(edge_width(sp, 2) == doctest::Approx(1.0));
  const Graph mg = elbow_graph();
  CHECK(ambient_dim(mg) == 2);
  CHECK(num_edges(mg) == 2);
  CHECK(edge_width(mg, 1) == doctest::Approx(0.5));
  const Projection p = project_graph(mg, v2(0.4, 0.1));
  CHECK(p.edge == 0);
  // single_curve_graph wraps one curve into a two-vertex graph.
  const Graph sc = single_curve_graph(ParamCurve::line(v2(0, 0), v2(2, 0), 1.0 / 32.0), 1.0);
  CHECK(num_edges(sc) == 1);
  CHECK(std::get<MetricGraph>(sc).degree(0) == 1);
}
