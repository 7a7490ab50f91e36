#include <algorithm>
#include <cmath>
#include <sstream>

#include <boost/math/special_functions/gamma.hpp>

#include "fnpp/analytics.hpp"
#include "fnpp/parallel.hpp"
#include "fnpp/quadrature.hpp"
#include "fnpp/special.hpp"

namespace fnpp {
namespace {

namespace bm = boost::math;

// L1 sums for several sampled functions sharing one grid; out[f][n-1] is the
// value at t_n.
std::vector<std::vector<double>> l1_apply(const std::vector<double>& t, double alpha,
                                          const std::vector<const std::vector<double>*>& fs) {
  const std::size_t m = t.size() - 1;
  const double g = bm::tgamma(2.0 - alpha);
  std::vector<std::vector<double>> out(fs.size(), std::vector<double>(m, 0.0));
  std::vector<double> coef(m + 1);
  for (std::size_t n = 1; n <= m; ++n) {
    // coef[k] multiplies f_k - f_{k-1}.
    double prev = std::pow(t[n] - t[0], 1.0 - alpha);
    for (std::size_t k = 1; k <= n; ++k) {
      const double cur = k == n ? 0.0 : std::pow(t[n] - t[k], 1.0 - alpha);
      coef[k] = (prev - cur) / (g * (t[k] - t[k - 1]));
      prev = cur;
    }
    for (std::size_t f = 0; f < fs.size(); ++f) {
      const auto& v = *fs[f];
      double s = 0.0;
      for (std::size_t k = 1; k <= n; ++k) s += coef[k] * (v[k] - v[k - 1]);
      out[f][n - 1] = s;
    }
  }
  return out;
}

// Solves the small dense system a x = b in place (partial pivoting).
std::vector<double> solve_dense(std::vector<std::vector<double>> a, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    for (std::size_t r = c + 1; r < n; ++r) {
      if (std::abs(a[r][c]) > std::abs(a[p][c])) p = r;
    }
    if (a[p][c] == 0.0) throw GridError("caputo_l1_corrected: singular starting-weight system");
    std::swap(a[p], a[c]);
    std::swap(b[p], b[c]);
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = a[r][c] / a[c][c];
      for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
      b[r] -= f * b[c];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= a[i][k] * x[k];
    x[i] = s / a[i][i];
  }
  return x;
}

void check_time_grid(std::span<const double> t, const char* who) {
  if (t.size() < 3) throw GridError(std::string(who) + ": grid needs at least 3 points");
  if (t[0] != 0.0) throw GridError(std::string(who) + ": grid must start at 0");
  for (std::size_t i = 1; i < t.size(); ++i) {
    if (!(t[i] > t[i - 1]) || !std::isfinite(t[i])) {
      throw GridError(std::string(who) + ": grid must be strictly increasing");
    }
  }
}

}  // namespace

void CaputoGrid::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("CaputoGrid: alpha must lie in (0, 1)");
  check_time_grid(times, "CaputoGrid");
  if (values.size() != times.size()) {
    throw GridError("CaputoGrid: values and times differ in length");
  }
}

std::vector<double> caputo_l1(const CaputoGrid& grid) {
  grid.validate();
  return l1_apply(grid.times, grid.alpha, {&grid.values})[0];
}

std::vector<double> caputo_l1_corrected(const CaputoGrid& grid,
                                        std::span<const double> exponents) {
  grid.validate();
  const std::size_t m = exponents.size();
  const std::size_t big_m = grid.times.size() - 1;
  if (m == 0) return caputo_l1(grid);
  if (m > big_m) throw GridError("caputo_l1_corrected: more exponents than grid points");
  const auto& t = grid.times;
  const double alpha = grid.alpha;

  std::vector<std::vector<double>> mono(m, std::vector<double>(t.size()));
  std::vector<const std::vector<double>*> fs{&grid.values};
  for (std::size_t k = 0; k < m; ++k) {
    for (std::size_t i = 0; i < t.size(); ++i) mono[k][i] = std::pow(t[i], exponents[k]);
    fs.push_back(&mono[k]);
  }
  const auto l1 = l1_apply(t, alpha, fs);

  std::vector<std::vector<double>> v(m, std::vector<double>(m));
  for (std::size_t k = 0; k < m; ++k) {
    for (std::size_t j = 0; j < m; ++j) v[k][j] = mono[k][j + 1];
  }
  std::vector<double> out(big_m);
  std::vector<double> rhs(m);
  for (std::size_t n = 1; n <= big_m; ++n) {
    for (std::size_t k = 0; k < m; ++k) {
      const double s = exponents[k];
      const double exact =
          bm::tgamma(s + 1.0) / bm::tgamma(s + 1.0 - alpha) * std::pow(t[n], s - alpha);
      rhs[k] = exact - l1[k + 1][n - 1];
    }
    const auto w = solve_dense(v, rhs);
    double corr = 0.0;
    for (std::size_t j = 0; j < m; ++j) corr += w[j] * (grid.values[j + 1] - grid.values[0]);
    out[n - 1] = l1[0][n - 1] + corr;
  }
  return out;
}

double GoverningResidual::max_abs() const {
  double m = 0.0;
  for (double r : residual) m = std::max(m, std::abs(r));
  return m;
}

GoverningResidual governing_residual(double alpha, const RateFunction& rate, int x, double v,
                                     std::span<const double> t_grid, const Accuracy& acc,
                                     unsigned workers) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw DomainError("governing_residual: alpha must lie in (0, 1)");
  }
  if (x < 0) throw DomainError("governing_residual: x must be >= 0");
  if (!(v >= 0.0)) throw DomainError("governing_residual: v must be >= 0");
  check_time_grid(t_grid, "governing_residual");

  const std::size_t big_m = t_grid.size() - 1;
  std::vector<double> f(t_grid.size());
  std::vector<double> rhs(big_m);
  f[0] = x == 0 ? 1.0 : 0.0;
  const double log_fact_x = bm::lgamma(x + 1.0);

  parallel_for(big_m, workers, [&](std::size_t i) {
    const double t = t_grid[i + 1];
    // Components: p_x(u, v) h and lambda(u + v) [p_{x-1} - p_x] h.
    auto integrand = [&](double u, std::span<double> out) {
      const double h = inv_sub_pdf(alpha, t, u, acc);
      if (h == 0.0) {
        out[0] = out[1] = 0.0;
        return;
      }
      const double m = rate.increment(v, u + v);
      double px = 0.0;
      double pxm1 = 0.0;
      if (m > 0.0) {
        const double lm = std::log(m);
        px = std::exp(-m + x * lm - log_fact_x);
        if (x > 0) pxm1 = px * x / m;
      } else {
        px = x == 0 ? 1.0 : 0.0;
        pxm1 = x == 1 ? 1.0 : 0.0;
      }
      const double lam = rate.intensity(u + v);
      out[0] = px * h;
      out[1] = (pxm1 - px) == 0.0 ? 0.0 : lam * (pxm1 - px) * h;
    };
    const auto r = quad::integrate_upper(integrand, 2, 0.0, std::pow(t, alpha), acc);
    f[i + 1] = r.value[0];
    rhs[i] = r.value[1];
  });

  CaputoGrid grid{std::vector<double>(t_grid.begin(), t_grid.end()), f, alpha};
  const double ex[] = {alpha, 2.0 * alpha, 3.0 * alpha};
  GoverningResidual g;
  g.times.assign(t_grid.begin() + 1, t_grid.end());
  g.lhs = caputo_l1_corrected(grid, ex);
  g.rhs = std::move(rhs);
  g.residual.resize(big_m);
  for (std::size_t i = 0; i < big_m; ++i) g.residual[i] = g.lhs[i] - g.rhs[i];
  return g;
}

CoxReport cox_identity_check(double alpha, std::span<const double> t_values,
                             std::span<const double> s_values, const Accuracy& acc) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw DomainError("cox_identity_check: alpha must lie in (0, 1)");
  }
  CoxReport rep;
  rep.alpha = alpha;
  for (double t : t_values) {
    if (!(t >= 0.0) || !std::isfinite(t)) throw DomainError("cox_identity_check: bad t value");
    const double center = t > 0.0 ? 1.0 / t : 1.0;
    const double lhs = quad::integrate_log_scale(
                           [&](double r) {
                             const double e = std::exp(-r * t);
                             return e == 0.0 ? 0.0 : e * cox_spectral_density(alpha, r);
                           },
                           center, acc)
                           .value;
    const double rhs = mittag_leffler(alpha, -std::pow(t, alpha), acc);
    rep.t_values.push_back(t);
    rep.kernel_transform.push_back(lhs);
    rep.ml_value.push_back(rhs);
    rep.max_dev_t = std::max(rep.max_dev_t, std::abs(lhs - rhs));
  }
  for (double s : s_values) {
    if (!(s > 0.0) || !std::isfinite(s)) throw DomainError("cox_identity_check: bad s value");
    // Density of the unit-rate ML interarrival: tau^{alpha-1} E_{alpha,alpha}(-tau^alpha).
    const double lhs = quad::integrate_log_scale(
                           [&](double tau) {
                             const double e = std::exp(-s * tau);
                             if (e == 0.0) return 0.0;
                             const double ta = std::pow(tau, alpha);
                             return e * ta / tau * mittag_leffler(alpha, alpha, -ta, acc);
                           },
                           1.0 / s, acc)
                           .value;
    const double rhs = 1.0 / (1.0 + std::pow(s, alpha));
    rep.s_values.push_back(s);
    rep.density_transform.push_back(lhs);
    rep.closed_form.push_back(rhs);
    rep.max_dev_s = std::max(rep.max_dev_s, std::abs(lhs - rhs));
  }
  return rep;
}

}  // namespace fnpp
