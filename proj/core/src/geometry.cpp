#include "graphtube/geometry.hpp"

#include <cmath>
#include <limits>

namespace graphtube {

MetricGraph single_curve_graph(ParamCurve curve, double width) {
  std::vector<Vec> vertices{curve.grid_point(0), curve.grid_point(curve.grid_size() - 1)};
  std::vector<MetricEdge> edges;
  edges.push_back(MetricEdge{0, 1, std::move(curve), width});
  return MetricGraph(std::move(vertices), std::move(edges));
}

int ambient_dim(const Graph& g) {
  return std::visit([](const auto& gg) { return gg.ambient_dim(); }, g);
}

int num_edges(const Graph& g) {
  return std::visit([](const auto& gg) { return gg.num_edges(); }, g);
}

double edge_width(const Graph& g, int e) {
  return std::visit([e](const auto& gg) { return gg.width(e); }, g);
}

Projection project_graph(const Graph& g, const Vec& x, const Projection* hint) {
  if (const auto* sp = std::get_if<SpiderGraph>(&g)) return sp->project(x);
  return std::get<MetricGraph>(g).project(x, hint);
}

std::optional<JunctionView> junction_at(const Graph& g, double eps, const Vec& x) {
  if (const auto* sp = std::get_if<SpiderGraph>(&g)) {
    if (x.norm() < sp->kappa() * eps) {
      JunctionView j;
      j.vertex = 0;
      j.kappa = sp->kappa();
      j.center = Vec::Zero(sp->ambient_dim());
      j.incident.reserve(sp->num_edges());
      for (int i = 0; i < sp->num_edges(); ++i) j.incident.push_back({i, true});
      return j;
    }
    return std::nullopt;
  }
  const auto& mg = std::get<MetricGraph>(g);
  int best = -1;
  double best_gap = 0.0;
  for (int v = 0; v < mg.num_vertices(); ++v) {
    const double gap = (x - mg.vertex(v)).norm() - mg.kappa(v) * eps;
    if (gap < 0.0 && (best < 0 || gap < best_gap)) {
      best = v;
      best_gap = gap;
    }
  }
  if (best < 0) return std::nullopt;
  JunctionView j;
  j.vertex = best;
  j.kappa = mg.kappa(best);
  j.center = mg.vertex(best);
  j.incident = mg.incident(best);
  return j;
}

double edge_distance(const Graph& g, int e, const Vec& x) {
  if (const auto* sp = std::get_if<SpiderGraph>(&g)) return sp->ray_distance(e, x);
  return std::get<MetricGraph>(g).edge_distance(e, x);
}

Clearance tube_clearance(const Graph& g, double eps, const Vec& x, const Projection* hint) {
  Clearance out;
  if (const auto* sp = std::get_if<SpiderGraph>(&g)) {
    // max_i (c_i eps - d(x, ray_i)): beyond |x| >= kappa*eps at most one term
    // is positive and it belongs to the projected ray, so this agrees with
    // the per-sector formula there and blends the junction with the widest
    // admitting tube inside.
    int best = 0;
    double best_m = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < sp->num_edges(); ++i) {
      const double m = sp->width(i) * eps - sp->ray_distance(i, x);
      if (m > best_m) {
        best_m = m;
        best = i;
      }
    }
    out.proj.edge = best;
    out.proj.s = sp->ray_param(best, x);
    out.proj.foot = out.proj.s * sp->direction(best);
    out.proj.dist = (x - out.proj.foot).norm();
    out.margin = best_m;
    return out;
  }
  const auto& mg = std::get<MetricGraph>(g);
  Projection p = mg.project(x, hint);
  double m = mg.width(p.edge) * eps - p.dist;
  if (auto j = junction_at(g, eps, x)) {
    for (const Incidence& inc : j->incident) {
      if (inc.edge == p.edge) continue;
      const ParamCurve& c = mg.edge(inc.edge).curve;
      const double s_hint = inc.at_start ? 0.0 : c.length();
      Projection q = c.project(x, s_hint);
      q.edge = inc.edge;
      const double mq = mg.width(inc.edge) * eps - q.dist;
      if (mq > m) {
        m = mq;
        p = q;
      }
    }
  }
  out.proj = p;
  out.margin = m;
  return out;
}

double tube_margin(const Graph& g, double eps, const Vec& x, const Projection* hint) {
  return tube_clearance(g, eps, x, hint).margin;
}

}  // namespace graphtube
