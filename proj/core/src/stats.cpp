#include "graphtube/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/distributions/chi_squared.hpp>

#include "graphtube/errors.hpp"
#include "graphtube/rng.hpp"

namespace graphtube {

double pairwise_sum(const double* data, long n) {
  if (n <= 32) {
    double acc = 0.0;
    for (long i = 0; i < n; ++i) acc += data[i];
    return acc;
  }
  const long half = n / 2;
  return pairwise_sum(data, half) + pairwise_sum(data + half, n - half);
}

double pairwise_sum(const std::vector<double>& v) {
  return pairwise_sum(v.data(), static_cast<long>(v.size()));
}

MeanSE mean_se(const std::vector<double>& v) {
  MeanSE r;
  r.n = static_cast<long>(v.size());
  if (r.n == 0) return r;
  r.mean = pairwise_sum(v) / static_cast<double>(r.n);
  if (r.n == 1) return r;
  std::vector<double> sq(v.size());
  for (size_t i = 0; i < v.size(); ++i) sq[i] = (v[i] - r.mean) * (v[i] - r.mean);
  const double var = pairwise_sum(sq) / static_cast<double>(r.n - 1);
  r.se = std::sqrt(var / static_cast<double>(r.n));
  return r;
}

Interval wilson_interval(long successes, long trials, double z) {
  if (trials <= 0) throw Error("Wilson interval needs trials > 0");
  const double n = static_cast<double>(trials);
  const double phat = static_cast<double>(successes) / n;
  const double z2n = z * z / n;
  const double denom = 1.0 + z2n;
  const double center = (phat + z2n / 2.0) / denom;
  const double half = z * std::sqrt(phat * (1.0 - phat) / n + z2n / (4.0 * n)) / denom;
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf) {
  if (samples.empty()) throw Error("KS statistic needs samples");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    d = std::max(d, static_cast<double>(i + 1) / n - f);
    d = std::max(d, f - static_cast<double>(i) / n);
  }
  return d;
}

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw Error("two-sample KS needs samples");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() || j < b.size()) {
    const double xa = i < a.size() ? a[i] : std::numeric_limits<double>::infinity();
    const double xb = j < b.size() ? b[j] : std::numeric_limits<double>::infinity();
    const double x = std::min(xa, xb);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

double ks_critical(double n_effective, double c_alpha) {
  const double rn = std::sqrt(n_effective);
  return c_alpha / (rn + 0.12 + 0.11 / rn);
}

double wasserstein1(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw Error("Wasserstein distance needs samples");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  size_t i = 0, j = 0;
  double w = 0.0;
  double x_prev = std::min(a[0], b[0]);
  while (i < a.size() || j < b.size()) {
    const double xa = i < a.size() ? a[i] : std::numeric_limits<double>::infinity();
    const double xb = j < b.size() ? b[j] : std::numeric_limits<double>::infinity();
    const double x = std::min(xa, xb);
    w += std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb) * (x - x_prev);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    x_prev = x;
  }
  return w;
}

namespace {

std::vector<double> normalized_counts(const std::vector<long>& c) {
  double total = 0.0;
  for (long v : c) total += static_cast<double>(v);
  std::vector<double> p(c.size(), 0.0);
  if (total > 0.0)
    for (size_t k = 0; k < c.size(); ++k) p[k] = static_cast<double>(c[k]) / total;
  return p;
}

double tv_of_labels(const std::vector<int>& labels, size_t na, int n_categories) {
  std::vector<long> ca(n_categories, 0), cb(n_categories, 0);
  for (size_t i = 0; i < labels.size(); ++i) ++(i < na ? ca : cb)[labels[i]];
  std::vector<double> pa = normalized_counts(ca), pb = normalized_counts(cb);
  double tv = 0.0;
  for (int k = 0; k < n_categories; ++k) tv += std::abs(pa[k] - pb[k]);
  return 0.5 * tv;
}

}  // namespace

double tv_distance(const std::vector<long>& a, const std::vector<long>& b) {
  if (a.size() != b.size()) throw Error("TV distance needs matching category counts");
  std::vector<double> pa = normalized_counts(a), pb = normalized_counts(b);
  double tv = 0.0;
  for (size_t k = 0; k < a.size(); ++k) tv += std::abs(pa[k] - pb[k]);
  return 0.5 * tv;
}

PermutationResult permutation_tv_test(const std::vector<int>& labels_a,
                                      const std::vector<int>& labels_b, int n_categories,
                                      long n_permutations, uint64_t seed) {
  if (labels_a.empty() || labels_b.empty()) throw Error("permutation test needs samples");
  for (int v : labels_a)
    if (v < 0 || v >= n_categories) throw Error("label out of category range");
  for (int v : labels_b)
    if (v < 0 || v >= n_categories) throw Error("label out of category range");
  std::vector<int> pool = labels_a;
  pool.insert(pool.end(), labels_b.begin(), labels_b.end());
  const size_t na = labels_a.size();

  PermutationResult r;
  r.seed = seed;
  r.n_permutations = n_permutations;
  r.statistic = tv_of_labels(pool, na, n_categories);

  long at_least = 0;
  std::vector<int> work(pool.size());
  for (long perm = 0; perm < n_permutations; ++perm) {
    work = pool;
    PathRng rng(seed, static_cast<uint64_t>(perm));
    for (size_t i = work.size(); i > 1; --i) {
      const size_t j = static_cast<size_t>(rng.uniform01() * static_cast<double>(i));
      std::swap(work[i - 1], work[j < i ? j : i - 1]);
    }
    if (tv_of_labels(work, na, n_categories) >= r.statistic - 1e-15) ++at_least;
  }
  r.p_value = static_cast<double>(1 + at_least) / static_cast<double>(1 + n_permutations);
  return r;
}

double chi2_statistic(const std::vector<long>& counts, const std::vector<double>& probs) {
  if (counts.size() != probs.size()) throw Error("chi2 needs matching counts and probs");
  double n = 0.0;
  for (long c : counts) n += static_cast<double>(c);
  double stat = 0.0;
  for (size_t k = 0; k < counts.size(); ++k) {
    const double expect = n * probs[k];
    if (!(expect > 0.0)) throw Error("chi2 expected count must be positive");
    const double diff = static_cast<double>(counts[k]) - expect;
    stat += diff * diff / expect;
  }
  return stat;
}

double chi2_critical(int dof, double level) {
  boost::math::chi_squared dist(dof);
  return boost::math::quantile(dist, level);
}

double chi2_pvalue(double statistic, int dof) {
  boost::math::chi_squared dist(dof);
  return boost::math::cdf(boost::math::complement(dist, statistic));
}

}  // namespace graphtube
