#include <cmath>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "fnpp/analytics.hpp"
#include "fnpp/errors.hpp"
#include "fnpp/special.hpp"
#include "oracles.hpp"

using namespace fnpp;

namespace {

double sum(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

// P(N = x) for a Weibull(1, 2) rate at alpha = 1/2 from the closed-form density of Y.
double weibull_half_pmf(double t, int x) {
  return oracle::integrate_half_line([&](double u) {
    return oracle::poisson_pmf(u * u, x) * oracle::inv_sub_half_pdf(t, u);
  });
}

}  // namespace

TEST_CASE("npp_pmf is Poisson over (v, v + t]") {
  const auto r = RateFunction::weibull(1.0, 2.0);
  const auto p = npp_pmf(r, 1.0, 0.5, 20);
  for (int x = 0; x <= 20; ++x) CHECK(p.probs[x] == doctest::Approx(oracle::poisson_pmf(2.0, x)));
  CHECK(p.total() == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("fhpp_pmf: Poisson at alpha = 1, E_alpha at x = 0, normalized") {
  for (int x : {0, 3, 9}) CHECK(fhpp_pmf(1.0, 2.0, 1.5, x) == doctest::Approx(oracle::poisson_pmf(3.0, x)));
  for (double a : {0.3, 0.8}) {
    CHECK(fhpp_pmf(a, 2.0, 1.5, 0) ==
          doctest::Approx(mittag_leffler(a, -2.0 * std::pow(1.5, a))).epsilon(1e-13));
  }
  for (double a : {0.3, 0.7, 0.9}) {
    for (double lam : {0.5, 10.0, 40.0}) {
      const auto r = RateFunction::constant(lam);
      const int xm = suggest_x_max(a, r, 1.0, 0.0, 1e-12);
      double s = 0.0;
      for (int x = 0; x <= xm; ++x) {
        const double p = fhpp_pmf(a, lam, 1.0, x);
        REQUIRE(p >= 0.0);
        s += p;
      }
      CAPTURE(a);
      CAPTURE(lam);
      CHECK(s == doctest::Approx(1.0).epsilon(1e-10));
    }
  }
}

TEST_CASE("fnpp_pmf: constant rate equals the closed form") {
  for (double a : {0.25, 0.5, 0.85}) {
    for (double lam : {0.4, 3.0}) {
      const auto table = fnpp_pmf(a, RateFunction::constant(lam), 2.0, 0.0, 25);
      for (int x = 0; x <= 25; ++x) {
        CAPTURE(a);
        CAPTURE(x);
        CHECK(std::abs(table.probs[x] - fhpp_pmf(a, lam, 2.0, x)) < 1e-12);
      }
      CHECK(std::abs(table.total() - 1.0) < 1e-10);
    }
  }
}

TEST_CASE("fnpp_pmf: Weibull rate against an independent integral") {
  const auto table = fnpp_pmf(0.5, RateFunction::weibull(1.0, 2.0), 1.5, 0.0, 12);
  for (int x = 0; x <= 12; ++x) {
    CAPTURE(x);
    CHECK(std::abs(table.probs[x] - weibull_half_pmf(1.5, x)) < 1e-11);
  }
  CHECK(table.tail_bound > 0.0);
  CHECK(std::abs(table.total() - 1.0) < 1e-10);
}

TEST_CASE("fnpp_pmf: shift v and bounded rates") {
  // Constant rate: the shift does not matter.
  const auto c0 = fnpp_pmf(0.6, RateFunction::constant(1.0), 1.0, 0.0, 10);
  const auto c1 = fnpp_pmf(0.6, RateFunction::constant(1.0), 1.0, 3.0, 10);
  for (int x = 0; x <= 10; ++x) CHECK(std::abs(c0.probs[x] - c1.probs[x]) < 1e-13);
  // Weibull with c = 2: the shift raises the intensity and the mean count.
  const auto w0 = fnpp_pmf(0.6, RateFunction::weibull(1.0, 2.0), 1.0, 0.0, 30);
  const auto w1 = fnpp_pmf(0.6, RateFunction::weibull(1.0, 2.0), 1.0, 1.0, 30);
  CHECK(w1.probs[0] < w0.probs[0]);
  // Bounded Lambda: at most a Poisson(sup) number of events.
  const auto b = fnpp_pmf(0.5, RateFunction::tabulated({1.0}, {2.0}), 1e4, 0.0, 30);
  CHECK(std::abs(b.total() - 1.0) < 1e-10);
  CHECK(b.probs[0] > oracle::poisson_pmf(2.0, 0));
  CHECK_THROWS_AS(fnpp_pmf(1.0, RateFunction::constant(1.0), 1.0, 0.0, 5), DomainError);
  CHECK_THROWS_AS(fnpp_pmf(0.5, RateFunction::constant(1.0), 1.0, -1.0, 5), DomainError);
}

TEST_CASE("moments of Lambda(Y)") {
  const double a = 0.4, t = 2.0;
  const auto c = lambda_moments(a, RateFunction::constant(3.0), t, 4);
  for (int k = 1; k <= 4; ++k) {
    CHECK(c[k - 1] == doctest::Approx(std::pow(3.0, k) * oracle::inv_sub_moment(a, t, k)).epsilon(1e-10));
  }
  const auto w = lambda_moments(a, RateFunction::weibull(1.0, 2.0), t, 3);
  for (int k = 1; k <= 3; ++k) {
    CHECK(w[k - 1] == doctest::Approx(oracle::inv_sub_moment(a, t, 2 * k)).epsilon(1e-10));
  }
}

TEST_CASE("count moments") {
  const auto r = RateFunction::constant(1.0);
  CHECK(std::abs(fnpp_mean(0.5, r, 1.0) - 1.0 / std::tgamma(1.5)) < 1e-12);
  const RateFunction rates[] = {RateFunction::constant(2.0), RateFunction::weibull(1.0, 2.0),
                                RateFunction::makeham(0.3, 1.0, 0.1)};
  for (const auto& rate : rates) {
    for (double a : {0.3, 0.7}) {
      const double m = fnpp_mean(a, rate, 1.5);
      const double v = fnpp_variance(a, rate, 1.5);
      CAPTURE(rate.describe());
      CAPTURE(a);
      CHECK(v > m);
      CHECK(fnpp_moment(a, rate, 1.5, 1) == doctest::Approx(m).epsilon(1e-12));
      CHECK(fnpp_moment(a, rate, 1.5, 2) == doctest::Approx(v + m * m).epsilon(1e-10));
      // Third factorial moment E[N(N-1)(N-2)] = E[Lambda(Y)^3].
      const double l3 = lambda_moments(a, rate, 1.5, 3)[2];
      const double m3 = fnpp_moment(a, rate, 1.5, 3);
      CHECK(m3 - 3.0 * (v + m * m) + 2.0 * m == doctest::Approx(l3).epsilon(1e-9));
    }
  }
  CHECK_THROWS_AS(fnpp_moment(0.5, r, 1.0, 0), DomainError);
  CHECK(npp_covariance(RateFunction::weibull(1.0, 2.0), 2.0, 1.0) == doctest::Approx(1.0));
}

TEST_CASE("fnpp_covariance against the exact homogeneous value") {
  const double a = 0.5, s = 0.5, t = 1.0, lam = 2.0;
  const auto r = RateFunction::constant(lam);
  const auto est = fnpp_covariance(a, r, s, t, 4000, 2e-3, 9, 1);
  const double ey_s = oracle::inv_sub_moment(a, s, 1);
  const double ey_t = oracle::inv_sub_moment(a, t, 1);
  const double exact = lam * ey_s + lam * lam * (oracle::inv_sub_cross_moment(a, s, t) - ey_s * ey_t);
  CHECK(est.mean_term == doctest::Approx(lam * ey_s).epsilon(1e-10));
  CHECK(std::abs(est.estimate - exact) < 4.0 * est.std_error + 0.01);
  const auto again = fnpp_covariance(a, r, s, t, 4000, 2e-3, 9, 3);
  CHECK(again.estimate == est.estimate);
  CHECK(again.std_error == est.std_error);
  // Argument order does not matter.
  const auto swapped = fnpp_covariance(a, r, t, s, 4000, 2e-3, 9, 1);
  CHECK(swapped.estimate == est.estimate);
}

TEST_CASE("arrival_cdf") {
  const double a = 0.6;
  const auto c = RateFunction::constant(1.3);
  for (double t : {0.2, 1.0, 6.0}) {
    CHECK(std::abs(arrival_cdf(a, c, 1, t) - (1.0 - mittag_leffler(a, -1.3 * std::pow(t, a)))) < 1e-10);
  }
  const auto w = RateFunction::weibull(1.0, 2.0);
  const auto table = fnpp_pmf(a, w, 1.0, 0.0, suggest_x_max(a, w, 1.0, 0.0, 1e-12));
  double tail = 1.0;
  for (int n = 1; n <= 4; ++n) {
    tail -= table.probs[n - 1];
    CAPTURE(n);
    CHECK(std::abs(arrival_cdf(a, w, n, 1.0) - tail) < 1e-9);
  }
  CHECK(arrival_cdf(a, w, 2, 0.0) == 0.0);
  CHECK(arrival_cdf(a, w, 2, 0.5) < arrival_cdf(a, w, 2, 1.0));
  CHECK(arrival_cdf(a, w, 3, 1.0) < arrival_cdf(a, w, 2, 1.0));
  CHECK_THROWS_AS(arrival_cdf(a, w, 0, 1.0), DomainError);
}

TEST_CASE("defective arrival distribution for bounded Lambda") {
  const auto b = RateFunction::tabulated({1.0, 2.0}, {0.5, 1.5});
  for (int n : {1, 2, 4}) {
    const double mass = arrival_total_mass(b, n);
    double ref = 1.0;
    for (int k = 0; k < n; ++k) ref -= oracle::poisson_pmf(1.5, k);
    CHECK(mass == doctest::Approx(ref).epsilon(1e-13));
    CHECK(arrival_cdf(0.5, b, n, 1e12) <= mass + 1e-12);
    CHECK(arrival_cdf(0.5, b, n, 1e12) == doctest::Approx(mass).epsilon(1e-4));
  }
  CHECK(arrival_total_mass(RateFunction::constant(1.0), 3) == 1.0);
}

TEST_CASE("L1 Caputo schemes") {
  const double a = 0.4;
  std::vector<double> t;
  for (int i = 0; i <= 200; ++i) t.push_back(std::pow(i / 200.0, 1.0) * 2.0);
  CaputoGrid lin{t, t, a};
  const auto d = caputo_l1(lin);
  for (std::size_t i = 0; i < d.size(); ++i) {
    CHECK(d[i] == doctest::Approx(std::pow(t[i + 1], 1.0 - a) / std::tgamma(2.0 - a)).epsilon(1e-12));
  }
  // The corrected scheme is exact on its exponents.
  std::vector<double> f(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) f[i] = 1.0 + std::pow(t[i], a) - 2.0 * std::pow(t[i], 2 * a);
  const double ex[] = {a, 2 * a};
  const auto dc = caputo_l1_corrected(CaputoGrid{t, f, a}, ex);
  for (std::size_t i = 0; i < dc.size(); ++i) {
    const double ti = t[i + 1];
    const double ref = std::tgamma(1 + a) - 2.0 * std::tgamma(1 + 2 * a) / std::tgamma(1 + a) * std::pow(ti, a);
    CHECK(dc[i] == doctest::Approx(ref).epsilon(1e-9));
  }
  // Plain L1 on t^2 converges at order 2 - alpha.
  auto err = [&](int m) {
    std::vector<double> g(m + 1), s(m + 1);
    for (int i = 0; i <= m; ++i) {
      g[i] = static_cast<double>(i) / m;
      s[i] = g[i] * g[i];
    }
    const auto v = caputo_l1(CaputoGrid{g, s, a});
    return std::abs(v.back() - 2.0 / std::tgamma(3.0 - a));
  };
  CHECK(std::log2(err(100) / err(200)) == doctest::Approx(2.0 - a).epsilon(0.05));
  CHECK_THROWS_AS(caputo_l1(CaputoGrid{{0.0, 1.0}, {0.0, 1.0}, a}), GridError);
  CHECK_THROWS_AS(caputo_l1(CaputoGrid{{0.1, 1.0, 2.0}, {0.0, 1.0, 2.0}, a}), GridError);
  CHECK_THROWS_AS(caputo_l1(CaputoGrid{{0.0, 1.0, 2.0}, {0.0, 1.0}, a}), GridError);
}

TEST_CASE("governing residual is small and shrinks") {
  auto grid = [](int m) {
    std::vector<double> g(m + 1);
    for (int i = 0; i <= m; ++i) g[i] = static_cast<double>(i) / m;
    return g;
  };
  const auto r = RateFunction::weibull(1.0, 2.0);
  const auto coarse = governing_residual(0.5, r, 1, 0.0, grid(100));
  const auto fine = governing_residual(0.5, r, 1, 0.0, grid(200));
  CHECK(coarse.max_abs() < 1e-2);
  CHECK(fine.max_abs() < coarse.max_abs());
  CHECK(coarse.lhs.size() == 100);
  const auto par = governing_residual(0.5, r, 1, 0.0, grid(100), {}, 3);
  CHECK(par.residual == coarse.residual);
  CHECK_THROWS_AS(governing_residual(0.5, r, -1, 0.0, grid(10)), DomainError);
}

TEST_CASE("Cox identities") {
  const double ts[] = {0.1, 1.0, 5.0};
  const double ss[] = {0.2, 1.0, 4.0};
  for (double a : {0.3, 0.5, 0.9}) {
    const auto rep = cox_identity_check(a, ts, ss);
    CHECK(rep.max_dev_t < 1e-9);
    CHECK(rep.max_dev_s < 1e-9);
    CHECK(rep.kernel_transform.size() == 3);
  }
}

TEST_CASE("scaled Mittag-Leffler keeps representable products") {
  // w^x E_{a, a x + 1}^{x + 1}(-w) with w^x far beyond double range.
  const double w = 30.0;
  const int x = 250;
  const double p = mittag_leffler_scaled(MLOrder{0.5, 0.5 * x + 1.0, x + 1.0}, -w, x * std::log(w));
  const auto table = fnpp_pmf(0.5, RateFunction::constant(w), 1.0, 0.0, x);
  CHECK(p > 0.0);
  CHECK(p == doctest::Approx(table.probs[x]).epsilon(1e-6));
}
