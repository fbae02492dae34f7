#include "graphtube/spider.hpp"

#include <cmath>
#include <limits>

namespace graphtube {

namespace {
constexpr double kUnitTol = 1e-9;
constexpr double kTieTol = 1e-12;
}  // namespace

SpiderGraph::SpiderGraph(std::vector<Vec> directions, std::vector<double> widths)
    : directions_(std::move(directions)), widths_(std::move(widths)) {
  if (directions_.size() < 2) throw GeometryError("spider needs at least 2 rays");
  if (widths_.size() != directions_.size())
    throw GeometryError("spider widths/directions size mismatch");
  const Eigen::Index n = directions_[0].size();
  if (n < 2) throw GeometryError("ambient dimension must be >= 2");
  for (const Vec& e : directions_) {
    if (e.size() != n) throw GeometryError("spider directions have mixed dimensions");
    if (std::abs(e.norm() - 1.0) > kUnitTol)
      throw GeometryError("spider direction is not a unit vector");
  }
  for (double c : widths_)
    if (!(c > 0.0)) throw GeometryError("spider width must be positive");

  kappa_ = 0.0;
  for (size_t i = 0; i < directions_.size(); ++i) {
    for (size_t j = 0; j < directions_.size(); ++j) {
      if (i == j) continue;
      const double dot = directions_[i].dot(directions_[j]);
      if (dot > 1.0 - kUnitTol)
        throw GeometryError("spider has coincident ray directions");
      const double denom = std::sqrt(1.0 - dot);
      kappa_ = std::max(kappa_, 2.0 * std::sqrt(2.0) * widths_[i] / denom);
    }
  }
  kappa0_ = 0.5 * kappa_;
}

double SpiderGraph::ray_param(int i, const Vec& x) const {
  return std::max(x.dot(directions_[i]), 0.0);
}

double SpiderGraph::ray_distance(int i, const Vec& x) const {
  const double s = ray_param(i, x);
  // |x - s e_i| without forming the foot: sqrt(|x|^2 - s^2) when s = <x,e>.
  if (s == 0.0) return x.norm();
  const double d2 = x.squaredNorm() - s * s;
  return d2 > 0.0 ? std::sqrt(d2) : 0.0;
}

Projection SpiderGraph::project(const Vec& x) const {
  const int m = num_edges();
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  double second_d = best_d;
  for (int i = 0; i < m; ++i) {
    const double d = ray_distance(i, x);
    if (d < best_d) {
      second_d = best_d;
      best_d = d;
      best = i;
    } else if (d < second_d) {
      second_d = d;
    }
  }
  Projection p;
  p.edge = best;
  p.s = ray_param(best, x);
  p.foot = p.s * directions_[best];
  p.dist = best_d;
  const double scale = std::max(1.0, x.norm());
  p.on_ambiguity_set = (second_d - best_d) <= kTieTol * scale;
  return p;
}

SpiderGraph make_spider(std::vector<Vec> directions, std::vector<double> widths) {
  return SpiderGraph(std::move(directions), std::move(widths));
}

}  // namespace graphtube
