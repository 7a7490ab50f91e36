#include "fnpp/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <boost/math/special_functions/gamma.hpp>

#include "fnpp/parallel.hpp"
#include "fnpp/quadrature.hpp"
#include "fnpp/random.hpp"
#include "fnpp/special.hpp"
#include "fnpp/subordinator.hpp"

namespace fnpp {
namespace {

namespace bm = boost::math;

void check_alpha(double alpha, const char* who) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    std::ostringstream os;
    os << who << ": alpha must lie in (0, 1), got " << alpha;
    throw DomainError(os.str());
  }
}

void check_positive(double t, const char* who, const char* name) {
  if (!(t > 0.0) || !std::isfinite(t)) {
    throw DomainError(std::string(who) + ": " + name + " must be positive and finite");
  }
}

// P(Poisson(m) >= n), n >= 1.
double poisson_upper(int n, double m) {
  if (m <= 0.0) return 0.0;
  if (std::isinf(m)) return 1.0;
  return bm::gamma_p(static_cast<double>(n), m);
}

// Poisson(m) pmf for x = 0..x_max into out, in log space.
void poisson_pmf(double m, std::span<const double> log_fact, std::span<double> out) {
  if (m <= 0.0) {
    std::fill(out.begin(), out.end(), 0.0);
    out[0] = 1.0;
    return;
  }
  if (std::isinf(m)) {
    std::fill(out.begin(), out.end(), 0.0);
    return;
  }
  const double lm = std::log(m);
  for (std::size_t x = 0; x < out.size(); ++x) {
    out[x] = std::exp(-m + static_cast<double>(x) * lm - log_fact[x]);
  }
}

std::vector<double> log_factorials(int n) {
  std::vector<double> lf(static_cast<std::size_t>(n) + 1);
  for (int x = 0; x <= n; ++x) lf[static_cast<std::size_t>(x)] = bm::lgamma(x + 1.0);
  return lf;
}

// Scale of Y_alpha(t) used by the semi-infinite quadrature maps.
double y_scale(double alpha, double t) { return std::pow(t, alpha); }

}  // namespace

double PmfTable::total() const {
  double s = tail_bound;
  for (double p : probs) s += p;
  return s;
}

PmfTable npp_pmf(const RateFunction& rate, double t, double v, int x_max) {
  check_positive(t, "npp_pmf", "t");
  if (!(v >= 0.0)) throw DomainError("npp_pmf: v must be >= 0");
  if (x_max < 0) throw DomainError("npp_pmf: x_max must be >= 0");
  PmfTable p;
  p.t = t;
  p.v = v;
  p.x_max = x_max;
  p.probs.resize(static_cast<std::size_t>(x_max) + 1);
  const double m = rate.increment(v, t + v);
  const auto lf = log_factorials(x_max);
  poisson_pmf(m, lf, p.probs);
  p.tail_bound = poisson_upper(x_max + 1, m);
  return p;
}

double fhpp_pmf(double alpha, double lam, double t, int x, const Accuracy& acc) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw DomainError("fhpp_pmf: alpha must lie in (0, 1]");
  check_positive(lam, "fhpp_pmf", "lambda");
  check_positive(t, "fhpp_pmf", "t");
  if (x < 0) throw DomainError("fhpp_pmf: x must be >= 0");
  const double xx = static_cast<double>(x);
  if (alpha == 1.0) {
    const double m = lam * t;
    return std::exp(-m + xx * std::log(m) - bm::lgamma(xx + 1.0));
  }
  const double w = lam * std::pow(t, alpha);
  // w^x E computed as one scaled quantity; E alone underflows for large x.
  // The exact value is positive, so clamping only removes round-off.
  const double p =
      mittag_leffler_scaled(MLOrder{alpha, alpha * xx + 1.0, xx + 1.0}, -w, xx * std::log(w), acc);
  return std::max(0.0, p);
}

int suggest_x_max(double alpha, const RateFunction& rate, double t, double v, double tail) {
  check_alpha(alpha, "suggest_x_max");
  check_positive(t, "suggest_x_max", "t");
  // Operational time beyond which Y_alpha(t) has mass < tail / 2.
  const double scale = y_scale(alpha, t);
  double u = scale;
  while (inv_sub_survival(alpha, t, u) > 0.5 * tail) u *= 1.5;
  const double m = std::min(rate.supremum(), rate.increment(v, u + v));
  int x = std::max(0, static_cast<int>(std::floor(m)));
  while (poisson_upper(x + 1, m) > 0.5 * tail) ++x;
  return x;
}

PmfTable fnpp_pmf(double alpha, const RateFunction& rate, double t, double v, int x_max,
                  const Accuracy& acc) {
  check_alpha(alpha, "fnpp_pmf");
  check_positive(t, "fnpp_pmf", "t");
  if (!(v >= 0.0)) throw DomainError("fnpp_pmf: v must be >= 0");
  if (x_max < 0) throw DomainError("fnpp_pmf: x_max must be >= 0");
  const std::size_t n = static_cast<std::size_t>(x_max) + 1;
  const auto lf = log_factorials(x_max);
  auto integrand = [&](double u, std::span<double> out) {
    const double h = inv_sub_pdf(alpha, t, u, acc);
    if (h == 0.0) {
      std::fill(out.begin(), out.end(), 0.0);
      return;
    }
    const double m = rate.increment(v, u + v);
    poisson_pmf(m, lf, out.first(n));
    out[n] = poisson_upper(x_max + 1, m);
    for (double& o : out) o *= h;
  };
  const auto r = quad::integrate_upper(integrand, n + 1, 0.0, y_scale(alpha, t), acc);
  PmfTable p;
  p.t = t;
  p.v = v;
  p.x_max = x_max;
  p.probs.assign(r.value.begin(), r.value.begin() + static_cast<std::ptrdiff_t>(n));
  for (double& q : p.probs) q = std::max(0.0, q);
  p.tail_bound = std::max(0.0, r.value[n]);
  return p;
}

std::vector<double> lambda_moments(double alpha, const RateFunction& rate, double t, int k,
                                   const Accuracy& acc) {
  check_alpha(alpha, "lambda_moments");
  check_positive(t, "lambda_moments", "t");
  if (k < 1) throw DomainError("lambda_moments: k must be >= 1");
  auto integrand = [&](double u, std::span<double> out) {
    const double h = inv_sub_pdf(alpha, t, u, acc);
    const double m = rate.cumulative(u);
    if (h == 0.0 || m == 0.0) {
      std::fill(out.begin(), out.end(), 0.0);
      return;
    }
    // Log space: Lambda^i overflows long before h underflows for Makeham.
    const double lh = std::log(h);
    const double lm = std::log(m);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::exp(lh + (i + 1.0) * lm);
  };
  return quad::integrate_upper(integrand, static_cast<std::size_t>(k), 0.0, y_scale(alpha, t),
                               acc)
      .value;
}

double fnpp_mean(double alpha, const RateFunction& rate, double t, const Accuracy& acc) {
  return lambda_moments(alpha, rate, t, 1, acc)[0];
}

double fnpp_variance(double alpha, const RateFunction& rate, double t, const Accuracy& acc) {
  const auto m = lambda_moments(alpha, rate, t, 2, acc);
  const double var_lambda = m[1] - m[0] * m[0];
  if (var_lambda < -acc.abs_tol) {
    std::ostringstream os;
    os << "fnpp_variance: Var[Lambda(Y)] = " << var_lambda << " is negative";
    throw NegativeVariance(os.str());
  }
  return m[0] + std::max(0.0, var_lambda);
}

double fnpp_moment(double alpha, const RateFunction& rate, double t, int k,
                   const Accuracy& acc) {
  if (k < 1) throw DomainError("fnpp_moment: k must be >= 1");
  const auto m = lambda_moments(alpha, rate, t, k, acc);
  double s = 0.0;
  for (int i = 1; i <= k; ++i) {
    s += static_cast<double>(stirling2(k, i)) * m[static_cast<std::size_t>(i - 1)];
  }
  return s;
}

double npp_covariance(const RateFunction& rate, double s, double t) {
  if (!(s >= 0.0) || !(t >= 0.0)) throw DomainError("npp_covariance: s, t must be >= 0");
  return rate.cumulative(std::min(s, t));
}

CovarianceEstimate fnpp_covariance(double alpha, const RateFunction& rate, double s, double t,
                                   std::int64_t n_paths, double grid_step, std::uint64_t seed,
                                   unsigned workers, const Accuracy& acc) {
  check_alpha(alpha, "fnpp_covariance");
  if (!(s >= 0.0) || !(t >= 0.0)) throw DomainError("fnpp_covariance: s, t must be >= 0");
  if (n_paths < 2) throw DomainError("fnpp_covariance: n_paths must be >= 2");
  if (s > t) std::swap(s, t);
  CovarianceEstimate c;
  if (s == 0.0) return c;
  c.mean_term = fnpp_mean(alpha, rate, s, acc);

  const auto n = static_cast<std::size_t>(n_paths);
  std::vector<double> xs(n), zs(n);
  parallel_for(n, workers, [&](std::size_t i) {
    RngStream rng(seed, i);
    const auto [ys, yt] = sample_joint_inverse(alpha, s, t, grid_step, rng);
    xs[i] = rate.cumulative(ys);
    zs[i] = rate.cumulative(yt);
  });
  double mx = 0.0, mz = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += xs[i];
    mz += zs[i];
  }
  mx /= static_cast<double>(n);
  mz /= static_cast<double>(n);
  double sum = 0.0, sum2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = (xs[i] - mx) * (zs[i] - mz);
    sum += d;
    sum2 += d * d;
  }
  const double nn = static_cast<double>(n);
  const double mean_d = sum / nn;
  c.cov_term = sum / (nn - 1.0);
  const double var_d = std::max(0.0, (sum2 - nn * mean_d * mean_d) / (nn - 1.0));
  c.std_error = std::sqrt(var_d / nn);
  c.estimate = c.mean_term + c.cov_term;
  return c;
}

double arrival_total_mass(const RateFunction& rate, int n) {
  if (n < 1) throw DomainError("arrival_total_mass: n must be >= 1");
  return poisson_upper(n, rate.supremum());
}

double arrival_cdf(double alpha, const RateFunction& rate, int n, double t,
                   const Accuracy& acc) {
  check_alpha(alpha, "arrival_cdf");
  if (n < 1) throw DomainError("arrival_cdf: n must be >= 1");
  if (t == 0.0) return 0.0;
  check_positive(t, "arrival_cdf", "t");
  const double lg = bm::lgamma(static_cast<double>(n));
  // With y = Lambda(u): lambda(u) du = dy and u = Lambda^{-1}(y).
  auto integrand = [&](double y) {
    if (y == 0.0) return n == 1 ? 1.0 : 0.0;
    const double w = std::exp(-y + (n - 1) * std::log(y) - lg);
    if (w == 0.0) return 0.0;
    return inv_sub_survival(alpha, t, rate.inverse_cumulative(y), acc) * w;
  };
  double value = 0.0;
  if (rate.bounded()) {
    value = quad::integrate(integrand, 0.0, rate.supremum(), acc).value;
  } else {
    value = quad::integrate_upper(integrand, 0.0, static_cast<double>(n), acc).value;
  }
  return std::clamp(value, 0.0, 1.0);
}

}  // namespace fnpp
