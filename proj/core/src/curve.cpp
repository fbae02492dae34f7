#include "graphtube/curve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace graphtube {

namespace {
constexpr double kUnitTol = 1e-8;
constexpr double kOrthoTol = 1e-6;
constexpr double kNewtonTol = 1e-10;
constexpr int kNewtonMaxIter = 50;
}  // namespace

ParamCurve::ParamCurve(std::vector<double> s, std::vector<Vec> gamma,
                       std::vector<Vec> tangent, std::vector<Vec> curvature)
    : s_(std::move(s)),
      gamma_(std::move(gamma)),
      tangent_(std::move(tangent)),
      curvature_(std::move(curvature)) {
  if (s_.size() < 4) throw GeometryError("curve grid needs at least 4 samples");
  if (gamma_.size() != s_.size() || tangent_.size() != s_.size() ||
      curvature_.size() != s_.size())
    throw GeometryError("curve grid arrays have mismatched sizes");
  for (size_t k = 1; k < s_.size(); ++k)
    if (!(s_[k] > s_[k - 1])) throw GeometryError("curve grid is not increasing");
  h_ = (s_.back() - s_.front()) / static_cast<double>(s_.size() - 1);
  validate();
  for (const Vec& c : curvature_) max_curv_ = std::max(max_curv_, c.norm());
}

void ParamCurve::validate() const {
  const Eigen::Index n = gamma_[0].size();
  if (n < 2) throw GeometryError("curve ambient dimension must be >= 2");
  for (size_t k = 0; k < s_.size(); ++k) {
    if (gamma_[k].size() != n || tangent_[k].size() != n || curvature_[k].size() != n)
      throw GeometryError("curve grid has mixed dimensions");
    if (std::abs(tangent_[k].norm() - 1.0) > kUnitTol)
      throw GeometryError("curve tangent is not unit at a grid point");
    if (std::abs(tangent_[k].dot(curvature_[k])) > kOrthoTol)
      throw GeometryError("curve tangent and curvature are not orthogonal at a grid point");
  }
  // Straight terminal neighborhoods: curvature vanishes at the two first and
  // two last grid points.
  const size_t m = s_.size();
  for (size_t k : {size_t{0}, size_t{1}, m - 2, m - 1})
    if (curvature_[k].norm() > 1e-9)
      throw GeometryError("curve must be straight near its endpoints");
  // No self-crossing on the grid: non-adjacent samples must not coincide.
  // Subsample large grids to keep this O(few * 10^6).
  const size_t stride = std::max<size_t>(1, m / 2000);
  for (size_t i = 0; i < m; i += stride) {
    for (size_t j = i + 2 * stride; j < m; j += stride) {
      if ((gamma_[i] - gamma_[j]).norm() < 1e-12)
        throw GeometryError("curve self-crosses on the grid");
    }
  }
}

ParamCurve ParamCurve::line(const Vec& a, const Vec& b, double h) {
  const double len = (b - a).norm();
  if (!(len > 0.0)) throw GeometryError("degenerate segment");
  if (!(h > 0.0)) throw GeometryError("grid spacing must be positive");
  const int m = std::max(4, static_cast<int>(std::ceil(len / h)) + 1);
  const Vec dir = (b - a) / len;
  std::vector<double> s(m);
  std::vector<Vec> g(m), t(m), c(m);
  for (int k = 0; k < m; ++k) {
    s[k] = len * static_cast<double>(k) / (m - 1);
    g[k] = a + s[k] * dir;
    t[k] = dir;
    c[k] = Vec::Zero(a.size());
  }
  return ParamCurve(std::move(s), std::move(g), std::move(t), std::move(c));
}

ParamCurve ParamCurve::from_curvature_profile(const std::function<double(double)>& kappa,
                                              double length, const Vec& origin,
                                              double theta0, double h) {
  if (origin.size() != 2)
    throw GeometryError("curvature-profile curves are planar (n = 2)");
  if (!(length > 0.0) || !(h > 0.0)) throw GeometryError("bad curve length or spacing");
  const int m = std::max(8, static_cast<int>(std::ceil(length / h)) + 1);
  const double dh = length / (m - 1);
  std::vector<double> s(m), theta(m);
  std::vector<Vec> g(m), t(m), c(m);
  s[0] = 0.0;
  theta[0] = theta0;
  g[0] = origin;
  // RK4 on y = (theta, x, y): y' = (kappa(s), cos theta, sin theta).
  struct State {
    double th, x, y;
  };
  State y{theta0, origin[0], origin[1]};
  auto f = [&kappa](double sv, const State& v) {
    return State{kappa(sv), std::cos(v.th), std::sin(v.th)};
  };
  auto axpy = [](const State& a, double w, const State& b) {
    return State{a.th + w * b.th, a.x + w * b.x, a.y + w * b.y};
  };
  for (int k = 1; k < m; ++k) {
    const double s0 = s[k - 1];
    const State k1 = f(s0, y);
    const State k2 = f(s0 + 0.5 * dh, axpy(y, 0.5 * dh, k1));
    const State k3 = f(s0 + 0.5 * dh, axpy(y, 0.5 * dh, k2));
    const State k4 = f(s0 + dh, axpy(y, dh, k3));
    y.th += dh / 6.0 * (k1.th + 2 * k2.th + 2 * k3.th + k4.th);
    y.x += dh / 6.0 * (k1.x + 2 * k2.x + 2 * k3.x + k4.x);
    y.y += dh / 6.0 * (k1.y + 2 * k2.y + 2 * k3.y + k4.y);
    s[k] = s0 + dh;
    theta[k] = y.th;
    g[k] = Vec(2);
    g[k] << y.x, y.y;
  }
  for (int k = 0; k < m; ++k) {
    t[k] = Vec(2);
    t[k] << std::cos(theta[k]), std::sin(theta[k]);
    c[k] = Vec(2);
    const double kv = kappa(s[k]);
    c[k] << -kv * std::sin(theta[k]), kv * std::cos(theta[k]);
  }
  return ParamCurve(std::move(s), std::move(g), std::move(t), std::move(c));
}

void ParamCurve::eval(double s, Vec& gamma, Vec* tangent, Vec* curvature) const {
  const double sc = std::clamp(s, s_.front(), s_.back());
  const auto it = std::upper_bound(s_.begin(), s_.end(), sc);
  size_t k = static_cast<size_t>(std::distance(s_.begin(), it));
  k = std::min(std::max<size_t>(k, 1), s_.size() - 1) - 1;
  const double hk = s_[k + 1] - s_[k];
  const double u = (sc - s_[k]) / hk;
  const double u2 = u * u, u3 = u2 * u;
  // Cubic Hermite basis.
  const double h00 = 2 * u3 - 3 * u2 + 1;
  const double h10 = u3 - 2 * u2 + u;
  const double h01 = -2 * u3 + 3 * u2;
  const double h11 = u3 - u2;
  gamma = h00 * gamma_[k] + (h10 * hk) * tangent_[k] + h01 * gamma_[k + 1] +
          (h11 * hk) * tangent_[k + 1];
  if (tangent) {
    const double d00 = (6 * u2 - 6 * u) / hk;
    const double d10 = 3 * u2 - 4 * u + 1;
    const double d01 = (-6 * u2 + 6 * u) / hk;
    const double d11 = 3 * u2 - 2 * u;
    *tangent = d00 * gamma_[k] + d10 * tangent_[k] + d01 * gamma_[k + 1] +
               d11 * tangent_[k + 1];
  }
  if (curvature) *curvature = (1.0 - u) * curvature_[k] + u * curvature_[k + 1];
}

double ParamCurve::newton_refine(const Vec& x, double s0) const {
  // Safeguarded Newton on g(s) = <x - gamma(s), gamma_dot(s)>.  g is the
  // negative derivative of s -> |x - gamma(s)|^2 / 2, so at the foot g = 0
  // with g(lo) > 0 and g(hi) < 0 on a bracketing interval.  The bracket is
  // grown geometrically from the seed, then Newton runs inside it with
  // bisection as fallback.
  Vec g, t, c;
  auto geval = [&](double s) {
    eval(s, g, &t, &c);
    return (x - g).dot(t);
  };
  const double L = length();
  double lo = std::max(0.0, s0 - 2.0 * h_);
  double hi = std::min(L, s0 + 2.0 * h_);
  double expand = 4.0 * h_;
  while (geval(lo) < 0.0 && lo > 0.0) {
    lo = std::max(0.0, lo - expand);
    expand *= 2.0;
  }
  if (lo == 0.0 && geval(0.0) <= 0.0) return 0.0;  // distance grows for s > 0
  expand = 4.0 * h_;
  while (geval(hi) > 0.0 && hi < L) {
    hi = std::min(L, hi + expand);
    expand *= 2.0;
  }
  if (hi == L && geval(L) >= 0.0) return L;  // distance shrinks up to the end

  double s = std::clamp(s0, lo, hi);
  for (int it = 0; it < kNewtonMaxIter; ++it) {
    eval(s, g, &t, &c);
    const Vec r = x - g;
    const double gv = r.dot(t);
    if (std::abs(gv) < kNewtonTol) return s;
    if (gv > 0.0) {
      lo = s;
    } else {
      hi = s;
    }
    const double gp = -t.squaredNorm() + r.dot(c);
    double snew = (gp != 0.0 && std::isfinite(gp)) ? s - gv / gp
                                                   : 0.5 * (lo + hi);
    if (!(snew > lo && snew < hi)) snew = 0.5 * (lo + hi);
    s = snew;
  }
  if (std::abs(geval(s)) < kNewtonTol) return s;
  throw ProjectionError("curve projection did not converge");
}

Projection ParamCurve::project(const Vec& x, std::optional<double> hint) const {
  double seed;
  if (hint) {
    seed = std::clamp(*hint, 0.0, length());
  } else {
    size_t best = 0;
    double best_d2 = std::numeric_limits<double>::infinity();
    for (size_t k = 0; k < s_.size(); ++k) {
      const double d2 = (x - gamma_[k]).squaredNorm();
      if (d2 < best_d2) {
        best_d2 = d2;
        best = k;
      }
    }
    seed = s_[best];
  }
  double s = newton_refine(x, seed);
  if (!hint) {
    // A grid-scan seed can sit on the wrong side of a ridge; nudging once
    // from both neighbours of the refined foot guards against it.
    for (double probe : {s - h_, s + h_}) {
      if (probe <= 0.0 || probe >= length()) continue;
      const double alt = newton_refine(x, probe);
      Vec ga, gb;
      eval(alt, ga, nullptr, nullptr);
      eval(s, gb, nullptr, nullptr);
      if ((x - ga).squaredNorm() < (x - gb).squaredNorm()) s = alt;
    }
  }
  Projection p;
  Vec g;
  eval(s, g, nullptr, nullptr);
  p.edge = 0;
  p.s = s;
  p.foot = g;
  p.dist = (x - g).norm();
  p.on_ambiguity_set = false;
  return p;
}

}  // namespace graphtube
