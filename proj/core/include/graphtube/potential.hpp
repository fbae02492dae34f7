#pragma once

#include <string>
#include <vector>

#include "graphtube/geometry.hpp"
#include "graphtube/types.hpp"

namespace graphtube {

/// Outcome of the numeric admissibility probes of a radial profile.
struct ShapeValidation {
  bool u0_zero = false;            ///< u(0) = 0
  bool monotone = false;           ///< u' >= 0 on the probe grid
  bool uprime_diverges = false;    ///< u'(r) blows up as r -> 1
  bool log_ratio_diverges = false; ///< -u(r)/log(1-r) grows and exceeds 1e3
  double log_ratio_near_one = 0.0;
  bool pass() const { return u0_zero && monotone && uprime_diverges && log_ratio_diverges; }
};

/// Radial confinement profile u on [0, 1): u(0) = 0, u nondecreasing, and
/// u(r) -> infinity fast enough that exp(-u) crushes mass at the wall.
/// Canonical family: u(r) = r^alpha / (1 - r^alpha), alpha > 0.
class PotentialShape {
 public:
  /// u(r) = r^alpha / (1 - r^alpha).  Requires alpha > 0.  For alpha <= 1
  /// u' does not vanish at 0; the field still defines the on-axis gradient
  /// as zero (see ConfinementField).
  static PotentialShape power_ratio(double alpha);

  /// Profile given by samples (r_k, u_k, u'_k) on an ascending grid in
  /// [0, 1); evaluation is cubic Hermite, clamped-extrapolated past the
  /// last sample.
  static PotentialShape tabulated(std::vector<double> r, std::vector<double> u,
                                  std::vector<double> du);

  /// (u(r), u'(r)).  Throws OutOfTubeError for r >= 1 and Error for r < 0.
  std::pair<double, double> eval(double r) const;

  double value(double r) const { return eval(r).first; }
  double slope(double r) const { return eval(r).second; }

  /// Numeric divergence probes; see ShapeValidation.
  ShapeValidation validate() const;

  bool is_power_ratio() const { return kind_ == Kind::PowerRatio; }
  double alpha() const { return alpha_; }

  /// Shapes with identical definitions give identical weight integrals.
  bool same_as(const PotentialShape& o) const;

  std::string describe() const;

 private:
  enum class Kind { PowerRatio, Tabulated };
  PotentialShape() = default;

  Kind kind_ = Kind::PowerRatio;
  double alpha_ = 2.0;
  std::vector<double> r_, u_, du_;
};

/// Confining potential of a tube of half-width c_e * eps around each edge:
///   U^eps(x) = u_e(d(x, edge e) / (c_e * eps))        away from junctions,
///   U^eps(x) = softmin_tau over incident edges         inside a junction
/// with softmin_tau(a) = -tau * log(sum_i exp(-a_i / tau)).  U is finite
/// exactly on the open tube and its gradient points away from the graph.
class ConfinementField {
 public:
  /// `shapes` has one entry per edge of `graph`.
  ConfinementField(const Graph& graph, std::vector<PotentialShape> shapes,
                   double blend_tau = 0.05);

  const Graph& graph() const { return *graph_; }
  const PotentialShape& shape(int e) const { return shapes_[e]; }
  double blend_tau() const { return blend_tau_; }

  /// U^eps(x); +infinity outside the open tube.
  double value(double eps, const Vec& x, const Projection* hint = nullptr) const;

  /// grad U^eps(x).  Defined as zero on the graph itself (d < 1e-14 on
  /// every contributing edge).  Throws OutOfTubeError outside the open tube.
  Vec gradient(double eps, const Vec& x, const Projection* hint = nullptr) const;

  /// Both at once, reusing one projection; the simulation hot path.
  /// Returns U and fills grad (sized to the ambient dimension).
  double value_and_gradient(double eps, const Vec& x, Vec& grad,
                            const Projection* hint = nullptr) const;

 private:
  const Graph* graph_;
  std::vector<PotentialShape> shapes_;
  double blend_tau_;
};

}  // namespace graphtube
