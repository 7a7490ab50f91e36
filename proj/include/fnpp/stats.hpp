#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace fnpp::stats {

/// sup_x |F_n(x) - F(x)| for the sample (sorted in place) against cdf.
double ks_statistic(std::vector<double>& sample, const std::function<double(double)>& cdf);

/// Two-sample Kolmogorov-Smirnov distance (both samples sorted in place).
double ks_two_sample(std::vector<double>& a, std::vector<double>& b);

/// Asymptotic p-value of a KS distance d at effective sample size n.
double ks_pvalue(double d, double n);

/// (1/2) sum |p - q|; the shorter vector is padded with zeros.
double total_variation(std::span<const double> p, std::span<const double> q);

/// Relative frequencies of counts 0..max(count).
std::vector<double> empirical_pmf(std::span<const std::int64_t> counts);

/// Hill estimate of the tail index from the k largest observations.
double hill_estimator(std::vector<double> sample, std::size_t k);

struct MeanEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  double variance = 0.0;  // unbiased sample variance
};

MeanEstimate mean_estimate(std::span<const double> x);

}  // namespace fnpp::stats
