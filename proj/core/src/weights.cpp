#include "graphtube/weights.hpp"

#include <cmath>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "graphtube/errors.hpp"

namespace graphtube {

double cross_section_mass(const PotentialShape& shape, int ambient_n, double abs_tol) {
  if (ambient_n < 2) throw Error("cross-section mass needs ambient dimension >= 2");
  const double k = static_cast<double>(ambient_n - 2);
  const auto f = [&](double r) {
    if (r >= 1.0) return 0.0;  // exp(-u) vanishes at the wall
    return std::pow(r, k) * std::exp(-shape.value(r));
  };
  double err = 0.0;
  // Requesting tolerances far below abs_tol over-subdivides and inflates the
  // roundoff part of the error estimate; ask for exactly what the caller needs.
  const double mass = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
      f, 0.0, 1.0, 15, abs_tol, &err);
  if (!(err <= abs_tol))
    throw QuadratureError("cross-section quadrature error estimate above tolerance");
  if (!(mass > 0.0)) throw QuadratureError("cross-section mass must be positive");
  return mass;
}

namespace {

struct VertexEdges {
  int vertex;
  std::vector<Incidence> incident;
  std::vector<double> width;
};

VertexEdges vertex_edges(const Graph& g, int vertex) {
  VertexEdges ve;
  ve.vertex = vertex;
  if (const auto* sp = std::get_if<SpiderGraph>(&g)) {
    if (vertex != 0) throw Error("a spider has a single vertex, index 0");
    for (int i = 0; i < sp->num_edges(); ++i) {
      ve.incident.push_back({i, true});
      ve.width.push_back(sp->width(i));
    }
  } else {
    const auto& mg = std::get<MetricGraph>(g);
    if (vertex < 0 || vertex >= mg.num_vertices()) throw Error("vertex index out of range");
    for (const Incidence& inc : mg.incident(vertex)) {
      ve.incident.push_back(inc);
      ve.width.push_back(mg.width(inc.edge));
    }
  }
  if (ve.incident.empty()) throw Error("vertex has no incident edges");
  return ve;
}

KirchhoffWeights normalize(VertexEdges ve, std::vector<double> raw) {
  double sum = 0.0;
  for (double w : raw) {
    if (!(w > 0.0)) throw Error("Kirchhoff weight must be positive");
    sum += w;
  }
  KirchhoffWeights out;
  out.vertex = ve.vertex;
  out.incident = std::move(ve.incident);
  out.p.resize(static_cast<int>(raw.size()));
  for (size_t k = 0; k < raw.size(); ++k) out.p[static_cast<int>(k)] = raw[k] / sum;
  return out;
}

}  // namespace

KirchhoffWeights kirchhoff_weights(const Graph& g, const std::vector<PotentialShape>& shapes,
                                   int vertex, double abs_tol) {
  if (static_cast<int>(shapes.size()) != num_edges(g))
    throw Error("kirchhoff_weights needs one shape per edge");
  const int n = ambient_dim(g);
  VertexEdges ve = vertex_edges(g, vertex);

  // Identical shapes share one quadrature so the profile factor cancels
  // exactly and p reduces to the width ratio.
  std::vector<double> mass(ve.incident.size());
  std::vector<int> same(ve.incident.size(), -1);
  for (size_t k = 0; k < ve.incident.size(); ++k) {
    const auto& sk = shapes[ve.incident[k].edge];
    for (size_t j = 0; j < k; ++j) {
      if (sk.same_as(shapes[ve.incident[j].edge])) {
        same[k] = static_cast<int>(j);
        break;
      }
    }
    mass[k] = same[k] >= 0 ? mass[same[k]] : cross_section_mass(sk, n, abs_tol);
  }

  std::vector<double> raw(ve.incident.size());
  for (size_t k = 0; k < ve.incident.size(); ++k)
    raw[k] = std::pow(ve.width[k], n - 1) * mass[k];
  return normalize(std::move(ve), std::move(raw));
}

KirchhoffWeights reflecting_weights(const Graph& g, int vertex) {
  const int n = ambient_dim(g);
  VertexEdges ve = vertex_edges(g, vertex);
  std::vector<double> raw(ve.incident.size());
  for (size_t k = 0; k < ve.incident.size(); ++k)
    raw[k] = std::pow(ve.width[k], n - 1);
  return normalize(std::move(ve), std::move(raw));
}

std::vector<KirchhoffWeights> all_kirchhoff_weights(const Graph& g,
                                                    const std::vector<PotentialShape>& shapes,
                                                    bool reflecting) {
  std::vector<KirchhoffWeights> out;
  if (std::holds_alternative<SpiderGraph>(g)) {
    out.push_back(reflecting ? reflecting_weights(g, 0) : kirchhoff_weights(g, shapes, 0));
    return out;
  }
  const auto& mg = std::get<MetricGraph>(g);
  for (int v = 0; v < mg.num_vertices(); ++v)
    out.push_back(reflecting ? reflecting_weights(g, v) : kirchhoff_weights(g, shapes, v));
  return out;
}

}  // namespace graphtube
