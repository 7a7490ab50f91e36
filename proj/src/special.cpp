#include "fnpp/special.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>

#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/special_functions/sin_pi.hpp>
#include <boost/multiprecision/cpp_int.hpp>

#include "fnpp/quadrature.hpp"

namespace fnpp {
namespace {

using std::numbers::pi;
constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kInf = std::numeric_limits<double>::infinity();

namespace bm = boost::math;
using FastPolicy = bm::policies::policy<bm::policies::promote_double<false>,
                                        bm::policies::overflow_error<bm::policies::ignore_error>>;

double log_gamma(double x) { return bm::lgamma(x, FastPolicy()); }

// log|1/Gamma(x)| and its sign; sign = 0 at the poles x = 0, -1, -2, ...
double log_abs_rgamma(double x, int& sign) {
  if (x > 0.0) {
    sign = 1;
    return -log_gamma(x);
  }
  if (x == std::floor(x)) {
    sign = 0;
    return -kInf;
  }
  // 1/Gamma(x) = Gamma(1 - x) sin(pi x) / pi
  const double s = bm::sin_pi(x, FastPolicy());
  sign = s > 0.0 ? 1 : -1;
  return log_gamma(1.0 - x) + std::log(std::abs(s)) - std::log(pi);
}

double rgamma(double x) {
  int sign = 0;
  const double l = log_abs_rgamma(x, sign);
  return sign == 0 ? 0.0 : sign * std::exp(l);
}

// Neumaier-compensated running sum that also tracks sum of |terms|.
struct Accumulator {
  double sum = 0.0;
  double comp = 0.0;
  double abs_sum = 0.0;

  void add(double v) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v)) {
      comp += (sum - t) + v;
    } else {
      comp += (v - t) + sum;
    }
    sum = t;
    abs_sum += std::abs(v);
  }
  double value() const { return sum + comp; }
};

struct SeriesResult {
  double value = 0.0;
  double error = kInf;
  bool converged = false;
};

// Power series of e^{log_scale} E_{a,b}^c(z). Gives up early once the
// absolute term sum passes `abort_abs_sum` (hopeless cancellation for negative z).
SeriesResult ml_series(const MLOrder& o, double z, double log_scale, const Accuracy& acc,
                       double abort_abs_sum) {
  SeriesResult r;
  if (z == 0.0) {
    r.value = std::exp(log_scale) * rgamma(o.b);
    r.error = 0.0;
    r.converged = true;
    return r;
  }
  const double log_abs_z = std::log(std::abs(z));
  const bool negative = z < 0.0;
  const bool unit_c = o.c == 1.0;
  const double lg_c = log_gamma(o.c);
  Accumulator acc_sum;
  double prev_log = -kInf;
  double max_log = 0.0;
  int small_run = 0;
  for (int j = 0; j < acc.max_terms; ++j) {
    const double jj = static_cast<double>(j);
    double log_term = log_scale + jj * log_abs_z - log_gamma(o.a * jj + o.b);
    if (!unit_c) log_term += log_gamma(o.c + jj) - lg_c - log_gamma(jj + 1.0);
    double term = std::exp(log_term);
    if (negative && (j % 2 == 1)) term = -term;
    acc_sum.add(term);
    max_log = std::max(max_log, std::abs(log_term));
    if (!std::isfinite(acc_sum.abs_sum) || acc_sum.abs_sum > abort_abs_sum) {
      r.value = acc_sum.value();
      return r;
    }
    const bool decreasing = log_term < prev_log;
    prev_log = log_term;
    if (decreasing && std::abs(term) <= 0.25 * acc.target(acc_sum.value())) {
      if (++small_run >= 2) {
        r.value = acc_sum.value();
        r.error = 8.0 * kEps * (1.0 + max_log) * acc_sum.abs_sum + std::abs(term);
        r.converged = true;
        return r;
      }
    } else {
      small_run = 0;
    }
  }
  r.value = acc_sum.value();
  return r;
}

// E_{a,b}^c(-x), x > 0, 0 < a <= 1, by trapezoidal Laplace inversion of
// F(s) = s^{ac-b} / (s^a + x)^c on the parabola s(th) = n (0.1309 - 0.1194 th^2 + 0.25 i th).
// Conjugate symmetry halves the work: result = (2/n) sum_{th>0} Im(e^s F(s) s'(th)).
struct ContourResult {
  double value;
  double magnitude;  // sum of |contributions|, sets the round-off floor
};

ContourResult ml_contour(const MLOrder& o, double x, double log_scale, int n) {
  using cd = std::complex<double>;
  const double p = o.a * o.c - o.b;
  double sum = 0.0;
  double mag = 0.0;
  const double h = 2.0 * pi / n;
  for (int k = n / 2; k < n; ++k) {
    const double th = -pi + (k + 0.5) * h;
    const cd s(n * (0.1309 - 0.1194 * th * th), n * 0.25 * th);
    const cd ds(n * (-0.2388 * th), n * 0.25);
    const cd log_s = std::log(s);
    const cd w = std::exp(o.a * log_s) + x;
    const cd term = std::exp(s + p * log_s - o.c * std::log(w) + log_scale) * ds;
    sum += term.imag();
    mag += std::abs(term);
  }
  return {2.0 * sum / n, 2.0 * mag / n};
}

std::string describe(const MLOrder& o, double z) {
  std::ostringstream os;
  os << "E_{" << o.a << "," << o.b << "}^" << o.c << "(" << z << ")";
  return os.str();
}

// --- stable density --------------------------------------------------------

void check_alpha(double alpha, const char* who) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    std::ostringstream os;
    os << who << ": alpha must lie in (0, 1), got " << alpha;
    throw DomainError(os.str());
  }
}

// w*(alpha) such that the series in w = z^{-alpha} loses at most ~e^5 to
// cancellation (largest term ~ exp((1 - alpha) (alpha^alpha w)^{1/(1-alpha)})).
double series_w_limit(double alpha) {
  return std::pow(5.0 / (1.0 - alpha), 1.0 - alpha) / std::pow(alpha, alpha);
}

// log of Kanter's function A(phi) = [sin(a phi)/sin(phi)]^{1/(1-a)} sin((1-a) phi)/sin(a phi).
double kanter_log_a(double alpha, double phi) {
  const double sa = std::sin(alpha * phi);
  const double s1 = std::sin(phi);
  const double sb = std::sin((1.0 - alpha) * phi);
  return std::log(sa / s1) / (1.0 - alpha) + std::log(sb / sa);
}

// g_alpha(z) = alpha / ((1-alpha) pi) z^{-1/(1-alpha)} int_0^pi A e^{-z^{-alpha/(1-alpha)} A} dphi
double stable_pdf_kanter(double alpha, double z, const Accuracy& acc) {
  const double log_z = std::log(z);
  const double log_k = -alpha / (1.0 - alpha) * log_z;
  const double log_pref = std::log(alpha / ((1.0 - alpha) * pi)) - log_z / (1.0 - alpha);
  auto integrand = [&](double phi) {
    const double la = kanter_log_a(alpha, phi);
    const double ka = std::exp(log_k + la);
    return std::exp(log_pref + la - ka);
  };
  Accuracy inner = acc;
  inner.abs_tol = std::min(acc.abs_tol, 1e-300);
  const auto r = quad::integrate(integrand, 0.0, pi, inner);
  return std::max(0.0, r.value);
}

// W_{gamma,beta}(z) series with an envelope-based stopping rule; the
// magnitude envelope ignores the |sin| factor of 1/Gamma at negative arguments.
SeriesResult wright_series(double gamma, double beta, double z, const Accuracy& acc) {
  SeriesResult r;
  if (z == 0.0) {
    r.value = rgamma(beta);
    r.error = 0.0;
    r.converged = true;
    return r;
  }
  const double log_abs_z = std::log(std::abs(z));
  const bool negative = z < 0.0;
  Accumulator acc_sum;
  double prev_env = -kInf;
  double max_log = 0.0;
  int small_run = 0;
  for (int k = 0; k < acc.max_terms; ++k) {
    const double kk = static_cast<double>(k);
    const double arg = beta + gamma * kk;
    const double base = kk * log_abs_z - log_gamma(kk + 1.0);
    int sign = 0;
    const double lr = log_abs_rgamma(arg, sign);
    double env = base;
    if (arg > 0.0) {
      env += lr;
    } else {
      env += log_gamma(1.0 - arg) - std::log(pi);
    }
    if (sign != 0) {
      double term = sign * std::exp(base + lr);
      if (negative && (k % 2 == 1)) term = -term;
      acc_sum.add(term);
      max_log = std::max(max_log, std::abs(base + lr));
    }
    const double env_val = std::exp(env);
    const bool decreasing = env < prev_env;
    prev_env = env;
    if (decreasing && env_val <= 0.25 * acc.target(acc_sum.value())) {
      if (++small_run >= 2) {
        r.value = acc_sum.value();
        r.error = 8.0 * kEps * (1.0 + max_log) * acc_sum.abs_sum + env_val;
        r.converged = true;
        return r;
      }
    } else {
      small_run = 0;
    }
  }
  r.value = acc_sum.value();
  return r;
}

}  // namespace

void MLOrder::validate() const {
  if (!(a > 0.0) || !(b > 0.0) || !(c > 0.0)) {
    std::ostringstream os;
    os << "Mittag-Leffler parameters must be positive, got (a, b, c) = (" << a << ", " << b
       << ", " << c << ")";
    throw DomainError(os.str());
  }
}

double mittag_leffler_scaled(const MLOrder& order, double z, double log_scale,
                             const Accuracy& acc) {
  order.validate();
  acc.validate();
  if (std::isnan(z)) throw DomainError("mittag_leffler: z is NaN");
  if (!std::isfinite(log_scale)) throw DomainError("mittag_leffler: log_scale must be finite");

  if (z >= 0.0 || order.a > 1.0) {
    const auto r = ml_series(order, z, log_scale, acc, kInf);
    if (!std::isfinite(r.value)) {
      throw OverflowError("mittag_leffler: " + describe(order, z) + " overflows double");
    }
    if (!r.converged) {
      throw NonConvergence("mittag_leffler: series for " + describe(order, z) +
                           " did not converge within max_terms");
    }
    if (z < 0.0 && r.error > acc.target(r.value)) {
      throw NonConvergence("mittag_leffler: series for " + describe(order, z) +
                           " loses too much to cancellation (a > 1 has no contour branch)");
    }
    return r.value;
  }

  // Negative argument with a <= 1.
  if (z > -5.0) {
    const auto r = ml_series(order, z, log_scale, acc, 1e6);
    if (r.converged && r.error <= acc.target(r.value)) return r.value;
  }
  // Trapezoidal contour sums with growing node counts until two agree. Large
  // c makes (s^a + x)^{-c} sharply peaked and needs the finer rules.
  const double x = -z;
  auto prev = ml_contour(order, x, log_scale, 32);
  double err = kInf;
  for (int n : {40, 56, 80, 112, 160, 224, 320}) {
    const auto cur = ml_contour(order, x, log_scale, n);
    err = std::abs(cur.value - prev.value);
    const double floor = 1e3 * kEps * std::max(cur.magnitude, prev.magnitude);
    if (err <= std::max(acc.target(cur.value), floor)) return cur.value;
    prev = cur;
  }
  std::ostringstream os;
  os << "mittag_leffler: contour inversion for " << describe(order, z)
     << " did not settle (estimate " << err << ")";
  throw NonConvergence(os.str());
}

double mittag_leffler(const MLOrder& order, double z, const Accuracy& acc) {
  return mittag_leffler_scaled(order, z, 0.0, acc);
}

double wright(double gamma, double beta, double z, const Accuracy& acc) {
  if (!(gamma > -1.0)) {
    std::ostringstream os;
    os << "wright: gamma must exceed -1, got " << gamma;
    throw DomainError(os.str());
  }
  acc.validate();
  const auto r = wright_series(gamma, beta, z, acc);
  if (!r.converged) {
    std::ostringstream os;
    os << "wright: series W_{" << gamma << "," << beta << "}(" << z
       << ") did not converge within max_terms";
    throw NonConvergence(os.str());
  }
  return r.value;
}

double stable_pdf_threshold(double alpha) {
  check_alpha(alpha, "stable_pdf_threshold");
  return std::pow(series_w_limit(alpha), -1.0 / alpha);
}

double stable_pdf(double alpha, double z, const Accuracy& acc) {
  check_alpha(alpha, "stable_pdf");
  if (!(z > 0.0)) throw DomainError("stable_pdf: z must be positive");
  if (std::isinf(z)) return 0.0;
  acc.validate();

  std::string series_failure;
  std::string integral_failure;
  auto try_series = [&](double& out) {
    const double w = std::pow(z, -alpha);
    const auto r = wright_series(-alpha, 0.0, -w, acc);
    if (!r.converged) {
      series_failure = "series did not converge";
      return false;
    }
    const double g = r.value / z;
    if (r.error / z > acc.target(g)) {
      series_failure = "series cancellation exceeds the target";
      return false;
    }
    out = std::max(0.0, g);
    return true;
  };
  auto try_integral = [&](double& out) {
    try {
      out = stable_pdf_kanter(alpha, z, acc);
      return true;
    } catch (const QuadratureFailure& e) {
      integral_failure = e.what();
      return false;
    }
  };

  double g = 0.0;
  if (z >= stable_pdf_threshold(alpha)) {
    if (try_series(g) || try_integral(g)) return g;
  } else {
    if (try_integral(g) || try_series(g)) return g;
  }
  std::ostringstream os;
  os << "stable_pdf(" << alpha << ", " << z << "): series branch: " << series_failure
     << "; integral branch: " << integral_failure;
  throw NonConvergence(os.str());
}

double inv_sub_pdf(double alpha, double t, double x, const Accuracy& acc) {
  check_alpha(alpha, "inv_sub_pdf");
  if (!(t > 0.0)) throw DomainError("inv_sub_pdf: t must be positive");
  if (!(x >= 0.0)) throw DomainError("inv_sub_pdf: x must be non-negative");
  if (x == 0.0) return std::pow(t, -alpha) * rgamma(1.0 - alpha);
  if (std::isinf(x)) return 0.0;

  // w = z^{-alpha} with z = t x^{-1/alpha}; h = z g(z) / (alpha x).
  const double w = x * std::pow(t, -alpha);
  if (w <= series_w_limit(alpha)) {
    const auto r = wright_series(-alpha, 0.0, -w, acc);
    if (r.converged && r.error / x <= acc.target(r.value / x)) {
      return std::max(0.0, r.value / (alpha * x));
    }
  }
  const double z = std::pow(w, -1.0 / alpha);
  if (z == 0.0) return 0.0;
  return z * stable_pdf(alpha, z, acc) / (alpha * x);
}

namespace {

Accuracy cdf_accuracy(const Accuracy& acc) {
  Accuracy a = acc;
  a.abs_tol = std::max(acc.abs_tol, 1e-15);
  return a;
}

void check_t(double alpha, double t, const char* who) {
  check_alpha(alpha, who);
  if (!(t > 0.0)) throw DomainError(std::string(who) + ": t must be positive");
}

}  // namespace

double inv_sub_cdf(double alpha, double t, double u, const Accuracy& acc) {
  check_t(alpha, t, "inv_sub_cdf");
  if (!(u >= 0.0)) throw DomainError("inv_sub_cdf: u must be non-negative");
  if (u == 0.0) return 0.0;
  if (std::isinf(u)) return 1.0;
  const Accuracy a = cdf_accuracy(acc);
  auto h = [&](double v) { return inv_sub_pdf(alpha, t, v, acc); };
  // Geometric breakpoints on the natural scale t^alpha of Y_alpha(t).
  const double scale = std::pow(t, alpha);
  double lo = 0.0;
  double hi = std::min(u, scale);
  double total = 0.0;
  while (lo < u) {
    total += quad::integrate(h, lo, hi, a).value;
    lo = hi;
    hi = std::min(u, 2.0 * hi);
  }
  return std::clamp(total, 0.0, 1.0);
}

double inv_sub_survival(double alpha, double t, double u, const Accuracy& acc) {
  check_t(alpha, t, "inv_sub_survival");
  if (!(u >= 0.0)) throw DomainError("inv_sub_survival: u must be non-negative");
  if (std::isinf(u)) return 0.0;
  const Accuracy a = cdf_accuracy(acc);
  auto h = [&](double v) { return inv_sub_pdf(alpha, t, v, acc); };
  const double scale = std::pow(t, alpha);
  return std::clamp(quad::integrate_upper(h, u, scale, a).value, 0.0, 1.0);
}

std::vector<double> inv_sub_cdf_grid(double alpha, double t, std::span<const double> u,
                                     const Accuracy& acc) {
  check_t(alpha, t, "inv_sub_cdf_grid");
  const Accuracy a = cdf_accuracy(acc);
  auto h = [&](double v) { return inv_sub_pdf(alpha, t, v, acc); };
  const double scale = std::pow(t, alpha);
  std::vector<double> out;
  out.reserve(u.size());
  double prev = 0.0;
  double total = 0.0;
  for (double ui : u) {
    if (!(ui >= prev)) throw GridError("inv_sub_cdf_grid: grid must be nondecreasing and >= 0");
    if (std::isinf(ui)) {
      out.push_back(1.0);
      prev = ui;
      continue;
    }
    // Split long pieces at geometric breakpoints so that no panel is much wider
    // than the scale of the density.
    double lo = prev;
    while (lo < ui) {
      const double hi = std::min(ui, std::max(lo + scale, 2.0 * lo));
      total += std::max(0.0, quad::integrate(h, lo, hi, a).value);
      lo = hi;
    }
    prev = ui;
    out.push_back(std::min(total, 1.0));
  }
  return out;
}

double cox_spectral_density(double alpha, double r) {
  check_alpha(alpha, "cox_spectral_density");
  if (!(r > 0.0)) throw DomainError("cox_spectral_density: r must be positive");
  if (std::isinf(r)) return 0.0;
  const double rho = std::pow(r, alpha);
  const double s = std::sin(alpha * pi);
  const double c = std::cos(alpha * pi);
  // (1/pi) r^{alpha-1} sin / (rho^2 + 2 rho cos + 1), rearranged to avoid overflow.
  if (rho > 1.0) {
    const double inv = 1.0 / rho;
    return s * inv / r / (1.0 + 2.0 * c * inv + inv * inv) / pi;
  }
  return s * rho / r / (rho * rho + 2.0 * rho * c + 1.0) / pi;
}

std::uint64_t stirling2(int k, int i) {
  if (k < 0 || i < 0 || i > k) {
    std::ostringstream os;
    os << "stirling2 requires 0 <= i <= k, got (k, i) = (" << k << ", " << i << ")";
    throw DomainError(os.str());
  }
  using boost::multiprecision::cpp_int;
  cpp_int sum = 0;
  cpp_int binom = 1;  // C(i, j)
  for (int j = 0; j <= i; ++j) {
    if (j > 0) binom = binom * (i - j + 1) / j;
    cpp_int power = boost::multiprecision::pow(cpp_int(j), static_cast<unsigned>(k));
    if ((i - j) % 2 == 0) {
      sum += binom * power;
    } else {
      sum -= binom * power;
    }
  }
  cpp_int factorial = 1;
  for (int j = 2; j <= i; ++j) factorial *= j;
  const cpp_int value = sum / factorial;
  if (value > cpp_int(std::numeric_limits<std::uint64_t>::max())) {
    std::ostringstream os;
    os << "stirling2(" << k << ", " << i << ") exceeds 64 bits (exact for k <= "
       << kStirlingMaxK << ")";
    throw OverflowError(os.str());
  }
  return value.convert_to<std::uint64_t>();
}

}  // namespace fnpp
