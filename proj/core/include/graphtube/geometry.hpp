#pragma once

#include <memory>
#include <variant>
#include <vector>

#include "graphtube/curve.hpp"
#include "graphtube/metric_graph.hpp"
#include "graphtube/spider.hpp"

namespace graphtube {

/// A single free-standing curve is modelled as a metric graph with one edge
/// and two degree-1 endpoint vertices, so the embedded-graph API has exactly
/// two concrete shapes.
using Graph = std::variant<SpiderGraph, MetricGraph>;

/// Wrap a lone curve as a metric graph (degree-1 vertices at both ends).
MetricGraph single_curve_graph(ParamCurve curve, double width);

int ambient_dim(const Graph& g);
int num_edges(const Graph& g);
double edge_width(const Graph& g, int e);

/// Nearest point on the graph; `hint` accelerates repeated nearby queries.
Projection project_graph(const Graph& g, const Vec& x, const Projection* hint = nullptr);

/// View of the junction region a point falls into: the vertex, its
/// separation radius, and the incident edges.
struct JunctionView {
  int vertex = 0;
  double kappa = 0.0;
  Vec center;
  std::vector<Incidence> incident;
};

/// Returns the junction whose ball of radius kappa_v * eps contains x, if
/// any.  For a spider this is the origin junction with every ray incident.
std::optional<JunctionView> junction_at(const Graph& g, double eps, const Vec& x);

/// Distance from x to an edge (spider ray or metric-graph curve).
double edge_distance(const Graph& g, int e, const Vec& x);

/// Signed clearance to the tube boundary, together with the edge projection
/// realizing it.  Away from junctions the margin is c_e * eps - d(x, edge e)
/// for the projected edge e; inside a junction ball it is the best clearance
/// over the incident edges' tubes (the region where the blended confining
/// potential is finite).  `proj` is the foot on the argmax edge.
struct Clearance {
  Projection proj;
  double margin = 0.0;
};
Clearance tube_clearance(const Graph& g, double eps, const Vec& x,
                         const Projection* hint = nullptr);

/// Signed clearance only: positive inside the open tube Omega^eps, zero on
/// its boundary, negative outside.
double tube_margin(const Graph& g, double eps, const Vec& x,
                   const Projection* hint = nullptr);

}  // namespace graphtube
