#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "fnpp/accuracy.hpp"

namespace fnpp::quad {

/// Scalar integral value with its estimated absolute error.
struct Estimate {
  double value = 0.0;
  double error = 0.0;
};

/// Vector integral: one value/error per component.
struct VectorEstimate {
  std::vector<double> value;
  std::vector<double> error;
  int evaluations = 0;
};

using ScalarIntegrand = std::function<double(double)>;
/// Writes the integrand components at x into `out` (size fixed per call).
using VectorIntegrand = std::function<void(double x, std::span<double> out)>;

/// Globally adaptive 21-point Gauss-Kronrod quadrature on [a, b].
///
/// The interval with the largest scaled error is bisected until every
/// component meets acc.target(value). Throws QuadratureFailure when
/// acc.max_terms subintervals are exhausted first.
VectorEstimate integrate(const VectorIntegrand& f, std::size_t dim, double a, double b,
                         const Accuracy& acc);
Estimate integrate(const ScalarIntegrand& f, double a, double b, const Accuracy& acc);

/// Integral over [a, inf) through x = a + scale * s / (1 - s), s in [0, 1).
/// Suited to integrands with exponential or faster decay on length `scale`.
VectorEstimate integrate_upper(const VectorIntegrand& f, std::size_t dim, double a,
                               double scale, const Accuracy& acc);
Estimate integrate_upper(const ScalarIntegrand& f, double a, double scale,
                         const Accuracy& acc);

/// Integral over (0, inf) through x = center * e^y, with each half-line in y
/// mapped to [0, 1). Handles algebraic behaviour at both 0 and infinity
/// (x^p with p > -1 at zero, x^p with p < -1 at infinity).
Estimate integrate_log_scale(const ScalarIntegrand& f, double center, const Accuracy& acc);

}  // namespace fnpp::quad
