#pragma once

#include <cstdint>
#include <functional>
#include <vector>

namespace graphtube {

/// Two-sided 99% standard normal quantile.
inline constexpr double kZ99 = 2.5758293035489004;

/// Deterministic summation: fixed pairwise reduction tree, independent of
/// chunking or thread count (estimators promise bitwise-stable reports).
double pairwise_sum(const double* data, long n);
double pairwise_sum(const std::vector<double>& v);

struct MeanSE {
  double mean = 0.0;
  double se = 0.0;
  long n = 0;
};
MeanSE mean_se(const std::vector<double>& v);

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
};
/// Wilson score interval for a binomial proportion.
Interval wilson_interval(long successes, long trials, double z = kZ99);

/// One-sample Kolmogorov-Smirnov statistic against a model CDF.
/// The sample vector is sorted internally.
double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf);

/// Two-sample KS statistic between empirical CDFs.
double ks_two_sample(std::vector<double> a, std::vector<double> b);

/// Stephens-corrected KS critical value c_alpha / (sqrt(n) + 0.12 +
/// 0.11/sqrt(n)); c_alpha = 1.628 at the 99% level.
double ks_critical(double n_effective, double c_alpha = 1.628);

/// 1-Wasserstein distance between empirical measures (merged-CDF integral;
/// sample sizes may differ).
double wasserstein1(std::vector<double> a, std::vector<double> b);

/// Total variation distance between the normalized count vectors.
double tv_distance(const std::vector<long>& a, const std::vector<long>& b);

struct PermutationResult {
  double statistic = 0.0;
  double p_value = 1.0;
  long n_permutations = 0;
  uint64_t seed = 0;
};
/// Permutation test of equality of two categorical samples under the TV
/// statistic.  Labels are category indices in [0, n_categories).  Each
/// permutation shuffles the pooled labels with its own documented stream
/// derived from `seed`, so the p-value is reproducible.
PermutationResult permutation_tv_test(const std::vector<int>& labels_a,
                                      const std::vector<int>& labels_b, int n_categories,
                                      long n_permutations, uint64_t seed);

/// Pearson chi-squared goodness-of-fit pieces.
double chi2_statistic(const std::vector<long>& counts, const std::vector<double>& probs);
double chi2_critical(int dof, double level);
double chi2_pvalue(double statistic, int dof);

}  // namespace graphtube
