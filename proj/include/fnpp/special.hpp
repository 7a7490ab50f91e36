#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fnpp/accuracy.hpp"

namespace fnpp {

/// Parameters (a, b, c) of the three-parameter (Prabhakar) Mittag-Leffler
/// function E_{a,b}^c. c = 1 gives E_{a,b}; b = c = 1 gives E_a.
struct MLOrder {
  double a = 1.0;
  double b = 1.0;
  double c = 1.0;

  void validate() const;
};

/// E_{a,b}^c(z) = sum_j (c)_j z^j / (j! Gamma(a j + b)) with the rising
/// factorial (c)_j = c (c+1) ... (c+j-1).
///
/// Non-negative z and small |z| use the power series. For z < 0 with
/// 0 < a <= 1 the series is kept only while its cancellation estimate meets
/// the target; beyond that the value is recovered by numerical Laplace
/// inversion of s^{ac-b} / (s^a + |z|)^c along a parabolic contour.
double mittag_leffler(const MLOrder& order, double z, const Accuracy& acc = {});

/// e^{log_scale} E_{a,b}^c(z) with the factor folded into every series term
/// and contour node, for products that are representable when E is not.
/// Tolerances apply to the scaled value.
double mittag_leffler_scaled(const MLOrder& order, double z, double log_scale,
                             const Accuracy& acc = {});

/// Convenience overloads for the two- and one-parameter functions.
inline double mittag_leffler(double a, double b, double z, const Accuracy& acc = {}) {
  return mittag_leffler(MLOrder{a, b, 1.0}, z, acc);
}
inline double mittag_leffler(double a, double z, const Accuracy& acc = {}) {
  return mittag_leffler(MLOrder{a, 1.0, 1.0}, z, acc);
}

/// Wright's generalized Bessel function
/// W_{gamma,beta}(z) = sum_k z^k / (k! Gamma(beta + gamma k)), gamma > -1.
/// Terms at poles of Gamma(beta + gamma k) vanish.
double wright(double gamma, double beta, double z, const Accuracy& acc = {});

/// Density g_alpha of L_alpha(1), the one-sided stable law with Laplace
/// transform exp(-s^alpha), 0 < alpha < 1.
///
/// For z >= stable_pdf_threshold(alpha) the value is (1/z) W_{-alpha,0}(-z^{-alpha});
/// below it the series cancels badly and Kanter's angular integral is used.
double stable_pdf(double alpha, double z, const Accuracy& acc = {});

/// Branch point z*(alpha) of stable_pdf.
double stable_pdf_threshold(double alpha);

/// Density h_alpha(t, x) of the inverse stable subordinator Y_alpha(t).
/// At x = 0 returns the continuous limit t^{-alpha} / Gamma(1 - alpha).
double inv_sub_pdf(double alpha, double t, double x, const Accuracy& acc = {});

/// H_alpha(t, u) = P(Y_alpha(t) <= u) = int_0^u h_alpha(t, v) dv, in [0, 1].
double inv_sub_cdf(double alpha, double t, double u, const Accuracy& acc = {});

/// 1 - H_alpha(t, u) = int_u^inf h_alpha(t, v) dv, computed directly.
double inv_sub_survival(double alpha, double t, double u, const Accuracy& acc = {});

/// H_alpha(t, .) on a nondecreasing grid. Accumulates nonnegative panel
/// integrals, so the output is nondecreasing by construction.
std::vector<double> inv_sub_cdf_grid(double alpha, double t, std::span<const double> u,
                                     const Accuracy& acc = {});

/// Spectral density K_alpha(r) of the FHPP Cox representation.
double cox_spectral_density(double alpha, double r);

/// Largest k for which every S(k, i) fits in 64 bits.
inline constexpr int kStirlingMaxK = 26;

/// Stirling number of the second kind S(k, i), evaluated exactly from the
/// alternating sum (1/i!) sum_j (-1)^{i-j} C(i, j) j^k. Throws OverflowError
/// when the value does not fit in std::uint64_t.
std::uint64_t stirling2(int k, int i);

}  // namespace fnpp
