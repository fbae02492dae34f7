#pragma once

#include <vector>

#include "graphtube/geometry.hpp"
#include "graphtube/potential.hpp"
#include "graphtube/types.hpp"

namespace graphtube {

/// Edge-selection weights of the weighted Kirchhoff condition at one vertex.
/// `p[k]` belongs to `incident[k]`; every entry is positive and the vector
/// sums to 1 within 1e-12.
struct KirchhoffWeights {
  int vertex = 0;
  std::vector<Incidence> incident;
  Vec p;
};

/// Cross-section mass of one edge profile: integral over [0, 1) of
/// r^(n-2) exp(-u(r)) dr, n = ambient dimension.  Adaptive Gauss-Kronrod
/// to absolute tolerance `abs_tol`; throws QuadratureError when the error
/// estimate does not reach it.
double cross_section_mass(const PotentialShape& shape, int ambient_n,
                          double abs_tol = 1e-12);

/// Confined-case weights at `vertex`:
///   p_k proportional to c_k^(n-1) * cross_section_mass(shape_k, n).
/// For a spider the only vertex is 0 and the incident edges are all rays in
/// index order.  `shapes` has one entry per edge of the graph.
KirchhoffWeights kirchhoff_weights(const Graph& g,
                                   const std::vector<PotentialShape>& shapes,
                                   int vertex = 0, double abs_tol = 1e-12);

/// Reflected-case weights: p_k proportional to c_k^(n-1) alone (the profile
/// integral cancels; identical shapes make the confined weights equal these).
KirchhoffWeights reflecting_weights(const Graph& g, int vertex = 0);

/// Weights at every vertex of the graph (a spider has exactly one).
std::vector<KirchhoffWeights> all_kirchhoff_weights(const Graph& g,
                                                    const std::vector<PotentialShape>& shapes,
                                                    bool reflecting = false);

}  // namespace graphtube
