#pragma once

#include <algorithm>
#include <cmath>

#include "fnpp/errors.hpp"

namespace fnpp {

/// Accuracy target shared by the series and quadrature routines.
///
/// A computed value v is accepted once its error estimate is below
/// max(abs_tol, rel_tol * |v|). `max_terms` caps series length and the
/// number of adaptive quadrature subintervals.
struct Accuracy {
  double abs_tol = 1e-13;
  double rel_tol = 1e-11;
  int max_terms = 4000;

  void validate() const {
    if (!(abs_tol > 0.0) || !(rel_tol > 0.0) || max_terms < 1) {
      throw DomainError("Accuracy requires abs_tol > 0, rel_tol > 0, max_terms >= 1");
    }
  }

  double target(double value) const {
    return std::max(abs_tol, rel_tol * std::abs(value));
  }
};

}  // namespace fnpp
