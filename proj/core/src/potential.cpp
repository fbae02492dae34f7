#include "graphtube/potential.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "graphtube/errors.hpp"

namespace graphtube {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kOnAxisTol = 1e-14;
}  // namespace

PotentialShape PotentialShape::power_ratio(double alpha) {
  if (!(alpha > 0.0)) throw Error("power_ratio shape requires alpha > 0");
  PotentialShape s;
  s.kind_ = Kind::PowerRatio;
  s.alpha_ = alpha;
  return s;
}

PotentialShape PotentialShape::tabulated(std::vector<double> r, std::vector<double> u,
                                         std::vector<double> du) {
  if (r.size() < 4 || u.size() != r.size() || du.size() != r.size())
    throw Error("tabulated shape needs >= 4 consistent samples");
  for (size_t k = 0; k < r.size(); ++k) {
    if (k > 0 && !(r[k] > r[k - 1])) throw Error("tabulated shape grid not increasing");
    if (!(r[k] >= 0.0 && r[k] < 1.0)) throw Error("tabulated shape grid must lie in [0,1)");
  }
  PotentialShape s;
  s.kind_ = Kind::Tabulated;
  s.r_ = std::move(r);
  s.u_ = std::move(u);
  s.du_ = std::move(du);
  return s;
}

std::pair<double, double> PotentialShape::eval(double r) const {
  if (r < 0.0) throw Error("radial profile evaluated at r < 0");
  if (r >= 1.0) throw OutOfTubeError("radial profile evaluated at r >= 1");
  if (kind_ == Kind::PowerRatio) {
    if (r == 0.0) {
      const double du = alpha_ > 1.0 ? 0.0 : (alpha_ == 1.0 ? 1.0 : kInf);
      return {0.0, du};
    }
    const double ra = std::pow(r, alpha_);
    const double den = 1.0 - ra;
    const double u = ra / den;
    const double du = alpha_ * std::pow(r, alpha_ - 1.0) / (den * den);
    return {u, du};
  }
  // Tabulated: cubic Hermite on the sample grid, clamped extrapolation along
  // the terminal segments.
  const auto it = std::upper_bound(r_.begin(), r_.end(), r);
  size_t k = static_cast<size_t>(std::distance(r_.begin(), it));
  k = std::min(std::max<size_t>(k, 1), r_.size() - 1) - 1;
  const double h = r_[k + 1] - r_[k];
  const double t = (r - r_[k]) / h;  // may fall outside [0,1] when extrapolating
  const double t2 = t * t, t3 = t2 * t;
  const double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + t;
  const double h01 = -2 * t3 + 3 * t2, h11 = t3 - t2;
  const double u = h00 * u_[k] + h10 * h * du_[k] + h01 * u_[k + 1] + h11 * h * du_[k + 1];
  const double d00 = (6 * t2 - 6 * t) / h, d10 = 3 * t2 - 4 * t + 1;
  const double d01 = (-6 * t2 + 6 * t) / h, d11 = 3 * t2 - 2 * t;
  const double du = d00 * u_[k] + d10 * du_[k] + d01 * u_[k + 1] + d11 * du_[k + 1];
  return {u, du};
}

ShapeValidation PotentialShape::validate() const {
  ShapeValidation v;
  v.u0_zero = std::abs(eval(0.0).first) <= 1e-12;
  v.monotone = true;
  for (int k = 0; k <= 256; ++k) {
    const double r = (static_cast<double>(k) / 256.0) * (1.0 - 1e-6);
    const double du = eval(r).second;
    if (!(du >= -1e-12) && !(du == kInf)) v.monotone = false;
  }
  const double du_mid = eval(0.5).second;
  const double du_wall = eval(1.0 - 1e-6).second;
  v.uprime_diverges = du_wall > 1e6 * du_mid + 1.0;
  auto log_ratio = [this](double r) {
    return eval(r).first / (-std::log1p(-r));
  };
  const double w1 = log_ratio(1.0 - 1e-4);
  const double w2 = log_ratio(1.0 - 1e-6);
  v.log_ratio_near_one = w2;
  v.log_ratio_diverges = (w2 > w1) && (w2 > 1e3);
  return v;
}

bool PotentialShape::same_as(const PotentialShape& o) const {
  if (kind_ != o.kind_) return false;
  if (kind_ == Kind::PowerRatio) return alpha_ == o.alpha_;
  return r_ == o.r_ && u_ == o.u_ && du_ == o.du_;
}

std::string PotentialShape::describe() const {
  if (kind_ == Kind::PowerRatio)
    return "power_ratio(alpha=" + std::to_string(alpha_) + ")";
  return "tabulated(" + std::to_string(r_.size()) + " samples)";
}

ConfinementField::ConfinementField(const Graph& graph, std::vector<PotentialShape> shapes,
                                   double blend_tau)
    : graph_(&graph), shapes_(std::move(shapes)), blend_tau_(blend_tau) {
  if (static_cast<int>(shapes_.size()) != num_edges(graph))
    throw Error("confinement field needs one shape per edge");
  if (!(blend_tau_ > 0.0)) throw Error("blend temperature must be positive");
}

namespace {

/// Per-edge distance, unit outward direction and width scale used by both
/// the edge formula and the junction blend.
struct EdgeTerm {
  double a = kInf;       // u_e(r_e)
  double du_over_c = 0;  // u'_e(r_e) / (c_e eps)
  Vec dir;               // (x - foot_e)/d_e, zero on the axis
};

EdgeTerm edge_term(const Graph& g, const std::vector<PotentialShape>& shapes,
                   double eps, int e, const Vec& x, std::optional<double> s_hint) {
  EdgeTerm t;
  double d;
  Vec foot;
  if (const auto* sp = std::get_if<SpiderGraph>(&g)) {
    const double s = sp->ray_param(e, x);
    foot = s * sp->direction(e);
    d = (x - foot).norm();
  } else {
    const auto& mg = std::get<MetricGraph>(g);
    const Projection p = mg.edge(e).curve.project(x, s_hint);
    foot = p.foot;
    d = p.dist;
  }
  const double c = edge_width(g, e) * eps;
  const double r = d / c;
  if (r >= 1.0) return t;  // infinite barrier from this edge
  const auto [u, du] = shapes[e].eval(r);
  t.a = u;
  if (d < kOnAxisTol) {
    t.du_over_c = 0.0;
    t.dir = Vec::Zero(x.size());
  } else {
    t.du_over_c = du / c;
    t.dir = (x - foot) / d;
  }
  return t;
}

}  // namespace

double ConfinementField::value_and_gradient(double eps, const Vec& x, Vec& grad,
                                            const Projection* hint) const {
  grad = Vec::Zero(x.size());
  const auto junction = junction_at(*graph_, eps, x);
  if (!junction) {
    const Projection p = project_graph(*graph_, x, hint);
    const double c = edge_width(*graph_, p.edge) * eps;
    const double r = p.dist / c;
    if (r >= 1.0) return kInf;
    const auto [u, du] = shapes_[p.edge].eval(r);
    if (p.dist >= kOnAxisTol) grad = (du / c / p.dist) * (x - p.foot);
    return u;
  }

  // Junction blend: softmin_tau of the incident edges' radial barriers.
  // The blend set matches tube_margin's edge set (incident edges plus the
  // projected edge), so U is finite exactly where the margin is positive.
  const double tau = blend_tau_;
  std::vector<EdgeTerm> terms;
  terms.reserve(junction->incident.size() + 1);
  double amin = kInf;
  for (const Incidence& inc : junction->incident) {
    std::optional<double> s_hint;
    if (std::holds_alternative<MetricGraph>(*graph_)) {
      const auto& mg = std::get<MetricGraph>(*graph_);
      s_hint = inc.at_start ? 0.0 : mg.edge(inc.edge).curve.length();
    }
    terms.push_back(edge_term(*graph_, shapes_, eps, inc.edge, x, s_hint));
    amin = std::min(amin, terms.back().a);
  }
  if (std::holds_alternative<MetricGraph>(*graph_)) {
    const Projection p = project_graph(*graph_, x, hint);
    const bool listed = std::any_of(junction->incident.begin(), junction->incident.end(),
                                    [&](const Incidence& i) { return i.edge == p.edge; });
    if (!listed) {
      terms.push_back(edge_term(*graph_, shapes_, eps, p.edge, x, p.s));
      amin = std::min(amin, terms.back().a);
    }
  }
  if (amin == kInf) return kInf;
  double wsum = 0.0;
  for (const EdgeTerm& t : terms) {
    if (t.a == kInf) continue;
    wsum += std::exp(-(t.a - amin) / tau);
  }
  for (const EdgeTerm& t : terms) {
    if (t.a == kInf || t.du_over_c == 0.0) continue;
    const double w = std::exp(-(t.a - amin) / tau) / wsum;
    grad += (w * t.du_over_c) * t.dir;
  }
  return amin - tau * std::log(wsum);
}

double ConfinementField::value(double eps, const Vec& x, const Projection* hint) const {
  Vec scratch;
  return value_and_gradient(eps, x, scratch, hint);
}

Vec ConfinementField::gradient(double eps, const Vec& x, const Projection* hint) const {
  Vec g;
  const double u = value_and_gradient(eps, x, g, hint);
  if (u == kInf) throw OutOfTubeError("gradient requested outside the open tube");
  return g;
}

}  // namespace graphtube
