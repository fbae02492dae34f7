#pragma once

#include <vector>

#include "graphtube/errors.hpp"
#include "graphtube/types.hpp"

namespace graphtube {

/// Result of a nearest-point search onto an embedded graph.
struct Projection {
  int edge = 0;                  ///< index of the nearest edge
  double s = 0.0;                ///< arc length of the foot along that edge
  Vec foot;                      ///< nearest point in ambient coordinates
  double dist = 0.0;             ///< distance from the query to the foot
  bool on_ambiguity_set = false; ///< true when the nearest edge is not unique
};

/// Star of N >= 2 rays leaving the origin along unit directions e_i, each
/// ray carrying a relative tube width c_i > 0.  The separation radius kappa
/// is the largest 2*sqrt(2)*c_i / sqrt(1 - <e_i,e_j>) over ordered pairs
/// i != j; beyond |x| >= kappa*eps the width-c_i*eps tubes of distinct rays
/// are disjoint.  kappa0 in (0, kappa) bounds the inner junction ball.
class SpiderGraph {
 public:
  /// Throws GeometryError unless all directions are unit vectors of a common
  /// dimension n >= 2, pairwise distinct, and all widths are positive.
  SpiderGraph(std::vector<Vec> directions, std::vector<double> widths);

  int ambient_dim() const { return static_cast<int>(directions_[0].size()); }
  int num_edges() const { return static_cast<int>(directions_.size()); }
  const Vec& direction(int i) const { return directions_[i]; }
  double width(int i) const { return widths_[i]; }
  const std::vector<double>& widths() const { return widths_; }
  double kappa() const { return kappa_; }
  double kappa0() const { return kappa0_; }

  /// Distance from x to the closed ray I_i = {s e_i : s >= 0}.
  double ray_distance(int i, const Vec& x) const;

  /// Foot parameter of x on ray i: s = max(<x, e_i>, 0).
  double ray_param(int i, const Vec& x) const;

  /// Nearest point on the union of rays.  Ties (relative gap below 1e-12)
  /// resolve to the lowest edge index and set on_ambiguity_set.
  Projection project(const Vec& x) const;

 private:
  std::vector<Vec> directions_;
  std::vector<double> widths_;
  double kappa_ = 0.0;
  double kappa0_ = 0.0;
};

/// Convenience factory mirroring the constructor.
SpiderGraph make_spider(std::vector<Vec> directions, std::vector<double> widths);

}  // namespace graphtube
