#pragma once

#include <string>
#include <variant>
#include <vector>

#include "fnpp/errors.hpp"

namespace fnpp {

struct ConstantRate {
  double lambda = 1.0;
};

/// Lambda(t) = (t/b)^c.
struct WeibullRate {
  double b = 1.0;
  double c = 1.0;
};

/// Lambda(t) = (c/b)(e^{bt} - 1) + mu t.
struct MakehamRate {
  double c = 1.0;
  double b = 1.0;
  double mu = 0.0;
};

/// Cumulative rate given at knots and joined by a monotone (Fritsch-Carlson)
/// cubic Hermite interpolant. Lambda is held constant past the last knot, so
/// sup Lambda is the last knot value.
struct TabulatedRate {
  std::vector<double> t;
  std::vector<double> cum;
  std::vector<double> slope;  // interpolant derivative at the knots
  std::string source;         // file name when loaded from CSV
};

/// A rate function lambda(t) together with its cumulative Lambda(t).
class RateFunction {
 public:
  using Kind = std::variant<ConstantRate, WeibullRate, MakehamRate, TabulatedRate>;

  static RateFunction constant(double lambda);
  static RateFunction weibull(double b, double c);
  static RateFunction makeham(double c, double b, double mu);
  /// Knots must be strictly increasing in t (starting at t >= 0) and
  /// nondecreasing in Lambda. A knot (0, 0) is prepended when missing.
  static RateFunction tabulated(std::vector<double> t, std::vector<double> cum,
                                std::string source = {});
  /// Reads a CSV with header `t,Lambda`.
  static RateFunction from_csv(const std::string& path);

  const Kind& kind() const noexcept { return kind_; }

  /// Lambda(t) = Lambda(0, t).
  double cumulative(double t) const;
  /// Lambda(s, t) = Lambda(t) - Lambda(s); OrderError if s > t.
  double increment(double s, double t) const;
  /// lambda(t); +inf at t = 0 for Weibull with c < 1.
  double intensity(double t) const;
  /// inf{t : Lambda(t) >= y}; OutOfRange if y > sup Lambda.
  double inverse_cumulative(double y) const;

  /// sup_t Lambda(t); +inf for the closed-form families.
  double supremum() const;
  bool bounded() const;
  bool is_constant() const { return std::holds_alternative<ConstantRate>(kind_); }

  /// Spec string in the CLI grammar, e.g. "weibull(b=1,c=2)".
  std::string describe() const;

 private:
  explicit RateFunction(Kind k) : kind_(std::move(k)) {}
  Kind kind_;
};

inline double cumulative(const RateFunction& r, double t) { return r.cumulative(t); }
inline double increment(const RateFunction& r, double s, double t) { return r.increment(s, t); }
inline double intensity(const RateFunction& r, double t) { return r.intensity(t); }
inline double inverse_cumulative(const RateFunction& r, double y) {
  return r.inverse_cumulative(y);
}

}  // namespace fnpp
