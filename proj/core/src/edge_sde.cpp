#include "graphtube/edge_sde.hpp"

#include <algorithm>
#include <cmath>

#include "graphtube/errors.hpp"

namespace graphtube {

namespace {

void sample_point(const SdeCoefficients& coeffs, const Vec& x, const Vec& tangent,
                  const Vec* curvature, Mat& sigma, Vec& b, double& diff_sq, double& drift) {
  coeffs.sigma(x, sigma);
  coeffs.b(x, b);
  const Vec st = sigma.transpose() * tangent;
  diff_sq = st.squaredNorm();
  drift = b.dot(tangent);
  if (curvature) drift += (sigma.transpose() * (*curvature)).dot(st);
}

}  // namespace

EdgeSde EdgeSde::for_ray(const SpiderGraph& g, int ray, const SdeCoefficients& coeffs,
                         double s_max, int samples) {
  if (!(s_max > 0.0)) throw Error("ray tabulation horizon must be positive");
  if (samples < 2) throw Error("ray tabulation needs at least 2 samples");
  EdgeSde e;
  e.bounded_ = false;
  const Vec& t = g.direction(ray);
  Mat sigma;
  Vec b;
  e.s_.resize(samples);
  e.diffusion_sq_.resize(samples);
  e.drift_.resize(samples);
  for (int k = 0; k < samples; ++k) {
    const double s = s_max * static_cast<double>(k) / static_cast<double>(samples - 1);
    e.s_[k] = s;
    sample_point(coeffs, Vec(s * t), t, nullptr, sigma, b, e.diffusion_sq_[k], e.drift_[k]);
  }
  e.finalize();
  return e;
}

EdgeSde EdgeSde::for_curve_edge(const MetricGraph& g, int eidx, const SdeCoefficients& coeffs) {
  EdgeSde e;
  e.bounded_ = true;
  const ParamCurve& c = g.edge(eidx).curve;
  Mat sigma;
  Vec b;
  const int m = c.grid_size();
  e.s_.resize(m);
  e.diffusion_sq_.resize(m);
  e.drift_.resize(m);
  for (int k = 0; k < m; ++k) {
    e.s_[k] = c.grid()[k];
    sample_point(coeffs, c.grid_point(k), c.grid_tangent(k), &c.grid_curvature(k), sigma, b,
                 e.diffusion_sq_[k], e.drift_[k]);
  }
  e.finalize();
  return e;
}

void EdgeSde::finalize() {
  min_diffusion_sq_ = *std::min_element(diffusion_sq_.begin(), diffusion_sq_.end());
}

double EdgeSde::interp(const std::vector<double>& v, double s) const {
  if (s <= s_.front()) return v.front();
  if (s >= s_.back()) return v.back();
  const auto it = std::upper_bound(s_.begin(), s_.end(), s);
  const size_t k = static_cast<size_t>(std::distance(s_.begin(), it)) - 1;
  const double t = (s - s_[k]) / (s_[k + 1] - s_[k]);
  return v[k] + t * (v[k + 1] - v[k]);
}

double EdgeSde::diffusion_sq(double s) const { return interp(diffusion_sq_, s); }
double EdgeSde::drift(double s) const { return interp(drift_, s); }

std::vector<EdgeSde> make_edge_sdes(const Graph& g, const SdeCoefficients& coeffs,
                                    double ray_s_max, double floor) {
  std::vector<EdgeSde> out;
  if (const auto* sp = std::get_if<SpiderGraph>(&g)) {
    for (int i = 0; i < sp->num_edges(); ++i)
      out.push_back(EdgeSde::for_ray(*sp, i, coeffs, ray_s_max));
  } else {
    const auto& mg = std::get<MetricGraph>(g);
    for (int e = 0; e < mg.num_edges(); ++e)
      out.push_back(EdgeSde::for_curve_edge(mg, e, coeffs));
  }
  for (const EdgeSde& e : out) {
    if (!(e.min_diffusion_sq() >= floor))
      throw Error("tangential diffusion degenerates along an edge");
  }
  return out;
}

}  // namespace graphtube
