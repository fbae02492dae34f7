#pragma once

#include <optional>
#include <vector>

#include "graphtube/curve.hpp"
#include "graphtube/spider.hpp"
#include "graphtube/types.hpp"

namespace graphtube {

/// One finite edge of a metric graph: a curve running from vertex `from`
/// (at s = 0) to vertex `to` (at s = length) with tube width `width`.
struct MetricEdge {
  int from = 0;
  int to = 0;
  ParamCurve curve;
  double width = 1.0;
};

/// Incidence record: edge `edge` meets the vertex at its s = 0 end when
/// `at_start` is true, at its s = length end otherwise.
struct Incidence {
  int edge = 0;
  bool at_start = true;
};

/// Finite graph of C^2 edges embedded in R^n.  Every edge is straight on a
/// terminal neighborhood of each endpoint (a ParamCurve invariant), so the
/// tangents of the edges incident to a vertex are well defined there and
/// each vertex carries its own separation radius kappa, computed from the
/// outgoing tangent pairs exactly as for a spider.
class MetricGraph {
 public:
  MetricGraph(std::vector<Vec> vertices, std::vector<MetricEdge> edges);

  int ambient_dim() const { return static_cast<int>(vertices_[0].size()); }
  int num_vertices() const { return static_cast<int>(vertices_.size()); }
  int num_edges() const { return static_cast<int>(edges_.size()); }
  const Vec& vertex(int v) const { return vertices_[v]; }
  const MetricEdge& edge(int e) const { return edges_[e]; }
  double width(int e) const { return edges_[e].width; }
  const std::vector<Incidence>& incident(int v) const { return incident_[v]; }
  int degree(int v) const { return static_cast<int>(incident_[v].size()); }
  double kappa(int v) const { return kappa_[v]; }
  double max_kappa() const { return max_kappa_; }

  /// Unit tangent at vertex v pointing into edge `inc`.
  Vec outgoing_tangent(const Incidence& inc) const;

  /// Nearest point over all edges.  `hint` short-circuits to Newton on the
  /// hinted edge when its foot stays clear of that edge's endpoints;
  /// otherwise every edge is searched.
  Projection project(const Vec& x, const Projection* hint = nullptr) const;

  /// Distance from x to edge e (endpoints included).
  double edge_distance(int e, const Vec& x, std::optional<double> hint = std::nullopt) const;

 private:
  std::vector<Vec> vertices_;
  std::vector<MetricEdge> edges_;
  std::vector<std::vector<Incidence>> incident_;
  std::vector<double> kappa_;
  std::vector<Vec> sphere_center_;
  std::vector<double> sphere_radius_;
  double max_kappa_ = 0.0;
};

}  // namespace graphtube
