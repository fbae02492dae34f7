#include "graphtube/metric_graph.hpp"

#include <cmath>
#include <limits>

namespace graphtube {

namespace {
constexpr double kEndpointTol = 1e-9;
}

MetricGraph::MetricGraph(std::vector<Vec> vertices, std::vector<MetricEdge> edges)
    : vertices_(std::move(vertices)), edges_(std::move(edges)) {
  if (vertices_.empty()) throw GeometryError("metric graph needs vertices");
  if (edges_.empty()) throw GeometryError("metric graph needs edges");
  const Eigen::Index n = vertices_[0].size();
  if (n < 2) throw GeometryError("ambient dimension must be >= 2");
  for (const Vec& v : vertices_)
    if (v.size() != n) throw GeometryError("metric graph vertices have mixed dimensions");

  incident_.assign(vertices_.size(), {});
  for (size_t e = 0; e < edges_.size(); ++e) {
    const MetricEdge& me = edges_[e];
    if (me.from < 0 || me.from >= num_vertices() || me.to < 0 || me.to >= num_vertices())
      throw GeometryError("edge endpoint index out of range");
    if (!(me.width > 0.0)) throw GeometryError("edge width must be positive");
    if (me.curve.ambient_dim() != n)
      throw GeometryError("edge curve dimension mismatch");
    if ((me.curve.grid_point(0) - vertices_[me.from]).norm() > kEndpointTol)
      throw GeometryError("edge start does not coincide with its vertex");
    if ((me.curve.grid_point(me.curve.grid_size() - 1) - vertices_[me.to]).norm() > kEndpointTol)
      throw GeometryError("edge end does not coincide with its vertex");
    incident_[me.from].push_back({static_cast<int>(e), true});
    incident_[me.to].push_back({static_cast<int>(e), false});
  }
  for (size_t v = 0; v < vertices_.size(); ++v)
    if (incident_[v].empty()) throw GeometryError("isolated vertex in metric graph");

  kappa_.assign(vertices_.size(), 0.0);
  for (int v = 0; v < num_vertices(); ++v) {
    const auto& inc = incident_[v];
    if (inc.size() == 1) {
      // Degree-1 vertices have no tangent pair; the cap region scale 2c is
      // the natural stand-in for the separation radius.
      kappa_[v] = 2.0 * edges_[inc[0].edge].width;
    } else {
      for (size_t a = 0; a < inc.size(); ++a) {
        for (size_t b = 0; b < inc.size(); ++b) {
          if (a == b) continue;
          const Vec ta = outgoing_tangent(inc[a]);
          const Vec tb = outgoing_tangent(inc[b]);
          const double dot = ta.dot(tb);
          if (dot > 1.0 - kEndpointTol)
            throw GeometryError("incident edges leave a vertex in the same direction");
          kappa_[v] = std::max(kappa_[v], 2.0 * std::sqrt(2.0) *
                                              edges_[inc[a].edge].width /
                                              std::sqrt(1.0 - dot));
        }
      }
    }
    max_kappa_ = std::max(max_kappa_, kappa_[v]);
  }

  for (const MetricEdge& me : edges_) {
    if (me.curve.length() <= 0.0) throw GeometryError("edge has zero length");
  }

  sphere_center_.reserve(edges_.size());
  sphere_radius_.reserve(edges_.size());
  for (const MetricEdge& me : edges_) {
    Vec c = Vec::Zero(n);
    for (int k = 0; k < me.curve.grid_size(); ++k) c += me.curve.grid_point(k);
    c /= static_cast<double>(me.curve.grid_size());
    double r = 0.0;
    for (int k = 0; k < me.curve.grid_size(); ++k)
      r = std::max(r, (me.curve.grid_point(k) - c).norm());
    // Half a grid interval covers points between samples.
    sphere_center_.push_back(std::move(c));
    sphere_radius_.push_back(r + me.curve.grid_spacing());
  }
}

Vec MetricGraph::outgoing_tangent(const Incidence& inc) const {
  const ParamCurve& c = edges_[inc.edge].curve;
  Vec g, t;
  c.eval(inc.at_start ? 0.0 : c.length(), g, &t, nullptr);
  return inc.at_start ? t : Vec(-t);
}

double MetricGraph::edge_distance(int e, const Vec& x, std::optional<double> hint) const {
  return edges_[e].curve.project(x, hint).dist;
}

Projection MetricGraph::project(const Vec& x, const Projection* hint) const {
  const double tie = 1e-12 * std::max(1.0, x.norm());
  Projection best;
  best.edge = -1;
  best.dist = std::numeric_limits<double>::infinity();

  auto consider = [&](Projection p, int e) {
    p.edge = e;
    p.on_ambiguity_set = false;
    if (best.edge < 0 || p.dist < best.dist - tie) {
      best = p;
    } else if (std::abs(p.dist - best.dist) <= tie) {
      if (e < best.edge) p.on_ambiguity_set = true, best = p;
      else best.on_ambiguity_set = true;
    }
  };

  const int hinted = (hint && hint->edge >= 0 && hint->edge < num_edges()) ? hint->edge : -1;
  if (hinted >= 0) consider(edges_[hinted].curve.project(x, hint->s), hinted);

  for (int e = 0; e < num_edges(); ++e) {
    if (e == hinted) continue;
    // Bounding-sphere prune: e cannot beat the current best.
    if (best.edge >= 0 &&
        (x - sphere_center_[e]).norm() - sphere_radius_[e] > best.dist + tie)
      continue;
    const ParamCurve& c = edges_[e].curve;
    if (hinted >= 0) {
      // Fast path: coarse scan for a Newton seed.
      const int probes = std::min(64, c.grid_size());
      double seed = 0.0, seed_d2 = std::numeric_limits<double>::infinity();
      for (int j = 0; j < probes; ++j) {
        const int k = static_cast<int>((static_cast<long>(j) * (c.grid_size() - 1)) /
                                       std::max(1, probes - 1));
        const double d2 = (x - c.grid_point(k)).squaredNorm();
        if (d2 < seed_d2) {
          seed_d2 = d2;
          seed = c.grid()[k];
        }
      }
      consider(c.project(x, seed), e);
    } else {
      consider(c.project(x), e);  // exhaustive grid-scan seed
    }
  }
  return best;
}

}  // namespace graphtube
