#pragma once

#include <vector>

#include "graphtube/coefficients.hpp"
#include "graphtube/geometry.hpp"
#include "graphtube/types.hpp"

namespace graphtube {

/// One-dimensional coefficients of the limit diffusion along a single edge,
/// tabulated in arc length and linearly interpolated:
///   diffusion_sq(s) = |sigma(gamma(s))^T gamma_dot(s)|^2
///   drift(s)        = <b(gamma(s)), gamma_dot(s)>
///                     + <sigma^T gamma_ddot(s), sigma^T gamma_dot(s)>
/// Straight edges have gamma_ddot = 0, so the drift reduces to the
/// tangential component of b.  Spider rays are tabulated up to a caller
/// horizon and clamp-extrapolated beyond it; metric-graph edges use the
/// curve's own grid and are bounded.
class EdgeSde {
 public:
  /// Spider ray `ray`, sampled on [0, s_max] with `samples` points.
  static EdgeSde for_ray(const SpiderGraph& g, int ray, const SdeCoefficients& coeffs,
                         double s_max, int samples = 129);

  /// Metric-graph edge `e`, sampled on the edge curve's grid.
  static EdgeSde for_curve_edge(const MetricGraph& g, int e, const SdeCoefficients& coeffs);

  /// Tabulated range; the physical edge length for metric edges.
  double s_max() const { return s_.back(); }
  bool bounded() const { return bounded_; }

  double diffusion_sq(double s) const;
  double drift(double s) const;
  double min_diffusion_sq() const { return min_diffusion_sq_; }

 private:
  EdgeSde() = default;
  void finalize();
  double interp(const std::vector<double>& v, double s) const;

  std::vector<double> s_, diffusion_sq_, drift_;
  double min_diffusion_sq_ = 0.0;
  bool bounded_ = true;
};

/// One EdgeSde per edge of the graph.  `ray_s_max` bounds the tabulation of
/// spider rays (ignored for metric graphs).  Throws Error when any edge's
/// tangential diffusion falls below `floor` (degenerate limit SDE).
std::vector<EdgeSde> make_edge_sdes(const Graph& g, const SdeCoefficients& coeffs,
                                    double ray_s_max = 0.0, double floor = 1e-10);

}  // namespace graphtube
