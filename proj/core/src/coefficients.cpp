#include "graphtube/coefficients.hpp"

#include <cmath>

#include "graphtube/errors.hpp"
#include "graphtube/rng.hpp"

namespace graphtube {

SdeCoefficients SdeCoefficients::identity(int dim) {
  SdeCoefficients c;
  c.dim_ = dim;
  c.sigma_kind_ = SigmaKind::Identity;
  c.drift_kind_ = DriftKind::Zero;
  return c;
}

SdeCoefficients SdeCoefficients::constant(Mat sigma, Vec b) {
  if (sigma.rows() != sigma.cols() || sigma.rows() < 2)
    throw Error("sigma must be a square matrix of dimension >= 2");
  if (b.size() != sigma.rows()) throw Error("drift dimension mismatch");
  SdeCoefficients c;
  c.dim_ = static_cast<int>(sigma.rows());
  c.sigma_kind_ = SigmaKind::Constant;
  c.sigma_const_ = std::move(sigma);
  c.drift_kind_ = DriftKind::Constant;
  c.b_const_ = std::move(b);
  return c;
}

SdeCoefficients SdeCoefficients::radial_scalar(int dim, double g0, double g1, double scale) {
  if (!(g0 > 0.0) || !(g1 > 0.0) || !(scale > 0.0))
    throw Error("radial_scalar parameters must be positive");
  SdeCoefficients c;
  c.dim_ = dim;
  c.sigma_kind_ = SigmaKind::RadialScalar;
  c.g0_ = g0;
  c.g1_ = g1;
  c.scale_ = scale;
  return c;
}

SdeCoefficients& SdeCoefficients::with_tangential_pull(const Graph& graph, double strength) {
  drift_kind_ = DriftKind::TangentialPull;
  pull_ = strength;
  graph_ = &graph;
  return *this;
}

SdeCoefficients& SdeCoefficients::with_constant_drift(Vec b) {
  if (b.size() != dim_) throw Error("drift dimension mismatch");
  drift_kind_ = DriftKind::Constant;
  b_const_ = std::move(b);
  return *this;
}

void SdeCoefficients::sigma(const Vec& x, Mat& out) const {
  switch (sigma_kind_) {
    case SigmaKind::Identity:
      out = Mat::Identity(dim_, dim_);
      break;
    case SigmaKind::Constant:
      out = sigma_const_;
      break;
    case SigmaKind::RadialScalar: {
      const double r2 = x.squaredNorm();
      const double g = g0_ + (g1_ - g0_) * r2 / (r2 + scale_ * scale_);
      out = g * Mat::Identity(dim_, dim_);
      break;
    }
  }
}

void SdeCoefficients::b(const Vec& x, Vec& out) const {
  switch (drift_kind_) {
    case DriftKind::Zero:
      out = Vec::Zero(dim_);
      break;
    case DriftKind::Constant:
      out = b_const_;
      break;
    case DriftKind::TangentialPull: {
      const Projection p = project_graph(*graph_, x);
      if (const auto* sp = std::get_if<SpiderGraph>(graph_)) {
        out = pull_ * sp->direction(p.edge);
      } else {
        const auto& mg = std::get<MetricGraph>(*graph_);
        Vec g, t;
        mg.edge(p.edge).curve.eval(p.s, g, &t, nullptr);
        out = pull_ * t;
      }
      break;
    }
  }
}

bool SdeCoefficients::sigma_identity_at(const Vec& x, double tol) const {
  Mat s;
  sigma(x, s);
  return (s - Mat::Identity(dim_, dim_)).cwiseAbs().maxCoeff() <= tol;
}

EllipticityCertificate SdeCoefficients::certify_ellipticity(const Graph& g, double eps,
                                                            uint64_t seed,
                                                            int n_probes) const {
  EllipticityCertificate cert;
  cert.seed = seed;
  cert.lambda_min = std::numeric_limits<double>::infinity();
  PathRng rng(seed, 0);
  const int n = ambient_dim(g);
  Mat s(n, n);
  int accepted = 0;
  int attempts = 0;
  const int max_attempts = n_probes * 1000;
  while (accepted < n_probes && attempts < max_attempts) {
    ++attempts;
    // Sample a point near a random edge: pick an edge, a longitudinal
    // parameter, and a uniform offset in the enclosing box of its tube.
    const int e = static_cast<int>(rng.uniform01() * num_edges(g)) % num_edges(g);
    Vec center(n);
    double reach = 0.0;
    if (const auto* sp = std::get_if<SpiderGraph>(&g)) {
      const double smax = 3.0 * sp->kappa() * eps + 1.0;
      center = (rng.uniform01() * smax) * sp->direction(e);
      reach = sp->width(e) * eps;
    } else {
      const auto& mg = std::get<MetricGraph>(g);
      const ParamCurve& c = mg.edge(e).curve;
      Vec gp;
      c.eval(rng.uniform01() * c.length(), gp, nullptr, nullptr);
      center = gp;
      reach = mg.width(e) * eps;
    }
    Vec x(n);
    for (int i = 0; i < n; ++i) x[i] = center[i] + (2.0 * rng.uniform01() - 1.0) * reach;
    if (tube_margin(g, eps, x) <= 0.0) continue;
    ++accepted;
    sigma(x, s);
    const Mat a = s * s.transpose();
    Eigen::SelfAdjointEigenSolver<Mat> es(a);
    cert.lambda_min = std::min(cert.lambda_min, es.eigenvalues().minCoeff());
  }
  cert.probes = accepted;
  if (accepted < n_probes)
    throw Error("ellipticity certification could not sample enough in-tube probes");
  return cert;
}

}  // namespace graphtube
