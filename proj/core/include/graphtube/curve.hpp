#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "graphtube/errors.hpp"
#include "graphtube/spider.hpp"
#include "graphtube/types.hpp"

namespace graphtube {

/// Arc-length parametrized C^2 curve sampled on a grid, with cubic Hermite
/// interpolation between samples.  Construction enforces:
///   - |gamma_dot| = 1 at every grid point (arc-length parametrization),
///   - <gamma_dot, gamma_ddot> = 0 at every grid point,
///   - gamma_ddot = 0 at the first and last two grid points (edges are
///     straight on a terminal neighborhood of each endpoint),
///   - no two non-adjacent grid points coincide (no self-crossing on grid).
class ParamCurve {
 public:
  ParamCurve(std::vector<double> s, std::vector<Vec> gamma,
             std::vector<Vec> tangent, std::vector<Vec> curvature);

  /// Straight segment from a to b sampled with spacing ~h.
  static ParamCurve line(const Vec& a, const Vec& b, double h);

  /// Planar curve integrated from a signed-curvature profile kappa(s) on
  /// [0, length], starting at `origin` with heading angle `theta0`.
  /// The tangent (cos theta, sin theta) is exactly unit by construction.
  static ParamCurve from_curvature_profile(const std::function<double(double)>& kappa,
                                           double length, const Vec& origin,
                                           double theta0, double h);

  int ambient_dim() const { return static_cast<int>(gamma_[0].size()); }
  double length() const { return s_.back(); }
  int grid_size() const { return static_cast<int>(s_.size()); }
  double grid_spacing() const { return h_; }
  double max_curvature() const { return max_curv_; }

  const std::vector<double>& grid() const { return s_; }
  const Vec& grid_point(int k) const { return gamma_[k]; }
  const Vec& grid_tangent(int k) const { return tangent_[k]; }
  const Vec& grid_curvature(int k) const { return curvature_[k]; }

  /// Evaluate position (cubic Hermite), tangent (its derivative) and
  /// curvature vector (linear interpolation of grid samples) at s,
  /// clamped to [0, length].
  void eval(double s, Vec& gamma, Vec* tangent = nullptr, Vec* curvature = nullptr) const;

  /// Nearest point on the curve.  Runs safeguarded Newton on
  /// g(s) = <x - gamma(s), gamma_dot(s)>, seeded from `hint` when given and
  /// from a full grid scan otherwise; interior solutions satisfy
  /// |g| < 1e-10, endpoint solutions are clamped.  Throws ProjectionError
  /// after 50 iterations without convergence.
  Projection project(const Vec& x, std::optional<double> hint = std::nullopt) const;

 private:
  double newton_refine(const Vec& x, double s0) const;
  void validate() const;

  std::vector<double> s_;
  std::vector<Vec> gamma_;
  std::vector<Vec> tangent_;
  std::vector<Vec> curvature_;
  double h_ = 0.0;
  double max_curv_ = 0.0;
};

}  // namespace graphtube
