#include "fnpp/stats.hpp"

#include <algorithm>
#include <cmath>

#include "fnpp/errors.hpp"

namespace fnpp::stats {

double ks_statistic(std::vector<double>& sample, const std::function<double(double)>& cdf) {
  if (sample.empty()) throw DomainError("ks_statistic: empty sample");
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

double ks_two_sample(std::vector<double>& a, std::vector<double>& b) {
  if (a.empty() || b.empty()) throw DomainError("ks_two_sample: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

double ks_pvalue(double d, double n) {
  const double sn = std::sqrt(n);
  const double lam = (sn + 0.12 + 0.11 / sn) * d;
  if (lam < 0.2) return 1.0;
  double sum = 0.0;
  double sign = 1.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lam * lam);
    sum += sign * term;
    sign = -sign;
    if (term < 1e-16) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

double total_variation(std::span<const double> p, std::span<const double> q) {
  const std::size_t n = std::max(p.size(), q.size());
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = i < p.size() ? p[i] : 0.0;
    const double b = i < q.size() ? q[i] : 0.0;
    s += std::abs(a - b);
  }
  return 0.5 * s;
}

std::vector<double> empirical_pmf(std::span<const std::int64_t> counts) {
  if (counts.empty()) throw DomainError("empirical_pmf: no counts");
  std::int64_t top = 0;
  for (auto c : counts) {
    if (c < 0) throw DomainError("empirical_pmf: negative count");
    top = std::max(top, c);
  }
  std::vector<std::int64_t> freq(static_cast<std::size_t>(top) + 1, 0);
  for (auto c : counts) ++freq[static_cast<std::size_t>(c)];
  std::vector<double> p(freq.size());
  const double n = static_cast<double>(counts.size());
  for (std::size_t i = 0; i < freq.size(); ++i) p[i] = static_cast<double>(freq[i]) / n;
  return p;
}

double hill_estimator(std::vector<double> sample, std::size_t k) {
  if (k < 1 || k >= sample.size()) throw DomainError("hill_estimator: need 1 <= k < n");
  std::nth_element(sample.begin(), sample.begin() + static_cast<std::ptrdiff_t>(k),
                   sample.end(), std::greater<>());
  const double threshold = sample[k];
  if (!(threshold > 0.0)) throw DomainError("hill_estimator: threshold must be positive");
  double s = 0.0;
  for (std::size_t i = 0; i < k; ++i) s += std::log(sample[i] / threshold);
  return static_cast<double>(k) / s;
}

MeanEstimate mean_estimate(std::span<const double> x) {
  if (x.size() < 2) throw DomainError("mean_estimate: need at least 2 values");
  const double n = static_cast<double>(x.size());
  double m = 0.0;
  for (double v : x) m += v;
  m /= n;
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  MeanEstimate e;
  e.mean = m;
  e.variance = ss / (n - 1.0);
  e.std_error = std::sqrt(e.variance / n);
  return e;
}

}  // namespace fnpp::stats
