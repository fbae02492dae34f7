#pragma once

#include <cstdint>
#include <optional>

#include "graphtube/geometry.hpp"
#include "graphtube/types.hpp"

namespace graphtube {

/// Uniform-ellipticity check result: smallest eigenvalue of a = sigma sigma^T
/// over a documented probe set (in-tube rejection samples from a fixed seed).
struct EllipticityCertificate {
  double lambda_min = 0.0;
  int probes = 0;
  uint64_t seed = 0;
};

/// Diffusion matrix sigma(x) and drift b(x), bounded and C^2, assembled from
/// the preset catalog:
///   sigma: identity | constant matrix | radial_scalar g(|x|) * I
///   b:     zero | constant vector | tangential_pull (g * tangent at the
///          projection of x onto the graph)
class SdeCoefficients {
 public:
  static SdeCoefficients identity(int dim);
  static SdeCoefficients constant(Mat sigma, Vec b);

  /// sigma(x) = g(|x|) I with g(r) = g0 + (g1 - g0) r^2/(r^2 + scale^2):
  /// smooth, bounded, g(0) = g0.
  static SdeCoefficients radial_scalar(int dim, double g0, double g1, double scale);

  /// Adds drift g * (unit tangent at the nearest edge point); needs a graph.
  SdeCoefficients& with_tangential_pull(const Graph& graph, double strength);
  SdeCoefficients& with_constant_drift(Vec b);

  int dim() const { return dim_; }

  void sigma(const Vec& x, Mat& out) const;
  void b(const Vec& x, Vec& out) const;

  bool sigma_is_constant() const { return sigma_kind_ != SigmaKind::RadialScalar; }

  /// True when sigma(x) is the identity matrix within `tol`.
  bool sigma_identity_at(const Vec& x, double tol = 1e-12) const;

  /// Sample `n_probes` in-tube points (rejection sampling around the graph
  /// edges, PathRng(seed, 0) stream) and certify min eig(sigma sigma^T).
  EllipticityCertificate certify_ellipticity(const Graph& g, double eps,
                                             uint64_t seed = 0x5eedULL,
                                             int n_probes = 1000) const;

 private:
  enum class SigmaKind { Identity, Constant, RadialScalar };
  enum class DriftKind { Zero, Constant, TangentialPull };

  int dim_ = 0;
  SigmaKind sigma_kind_ = SigmaKind::Identity;
  DriftKind drift_kind_ = DriftKind::Zero;
  Mat sigma_const_;
  Vec b_const_;
  double g0_ = 1.0, g1_ = 1.0, scale_ = 1.0;
  double pull_ = 0.0;
  const Graph* graph_ = nullptr;
};

}  // namespace graphtube
