#include "fnpp/rates.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <boost/math/tools/toms748_solve.hpp>

namespace fnpp {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Shortest round-trip decimal form.
std::string num(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

void require(bool ok, const std::string& what) {
  if (!ok) throw DomainError(what);
}

// Derivatives for the shape-preserving piecewise cubic Hermite interpolant.
std::vector<double> pchip_slopes(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  std::vector<double> d(n, 0.0);
  if (n == 2) {
    d[0] = d[1] = (y[1] - y[0]) / (x[1] - x[0]);
    return d;
  }
  std::vector<double> h(n - 1), delta(n - 1);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    h[k] = x[k + 1] - x[k];
    delta[k] = (y[k + 1] - y[k]) / h[k];
  }
  for (std::size_t k = 1; k + 1 < n; ++k) {
    if (delta[k - 1] == 0.0 || delta[k] == 0.0) continue;
    const double w1 = 2.0 * h[k] + h[k - 1];
    const double w2 = h[k] + 2.0 * h[k - 1];
    d[k] = (w1 + w2) / (w1 / delta[k - 1] + w2 / delta[k]);
  }
  auto end_slope = [](double h0, double h1, double d0, double d1) {
    double s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if (s * d0 <= 0.0) return 0.0;
    if (d0 * d1 <= 0.0 && std::abs(s) > std::abs(3.0 * d0)) return 3.0 * d0;
    return s;
  };
  d[0] = end_slope(h[0], h[1], delta[0], delta[1]);
  d[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
  return d;
}

struct Segment {
  double x0, x1, y0, y1, d0, d1;

  double value(double x) const {
    const double h = x1 - x0;
    const double s = (x - x0) / h;
    const double s2 = s * s;
    const double s3 = s2 * s;
    return (2 * s3 - 3 * s2 + 1) * y0 + (s3 - 2 * s2 + s) * h * d0 + (-2 * s3 + 3 * s2) * y1 +
           (s3 - s2) * h * d1;
  }
  double derivative(double x) const {
    const double h = x1 - x0;
    const double s = (x - x0) / h;
    const double s2 = s * s;
    return (6 * s2 - 6 * s) * (y0 - y1) / h + (3 * s2 - 4 * s + 1) * d0 + (3 * s2 - 2 * s) * d1;
  }
};

Segment segment(const TabulatedRate& tab, std::size_t k) {
  return {tab.t[k], tab.t[k + 1], tab.cum[k], tab.cum[k + 1], tab.slope[k], tab.slope[k + 1]};
}

// Index k with t[k] <= x < t[k+1]; caller guarantees t[0] <= x < t.back().
std::size_t locate(const TabulatedRate& tab, double x) {
  const auto it = std::upper_bound(tab.t.begin(), tab.t.end(), x);
  return static_cast<std::size_t>(it - tab.t.begin()) - 1;
}

// Bracketed root of the increasing function f on [lo, hi] to 1e-13 (1 + t).
template <class F>
double solve_increasing(F f, double lo, double hi) {
  double flo = f(lo);
  double fhi = f(hi);
  if (flo >= 0.0) return lo;
  if (fhi <= 0.0) return hi;
  auto tol = [](double a, double b) { return std::abs(a - b) <= 1e-13 * (1.0 + std::abs(b)); };
  std::uintmax_t iters = 200;
  const auto r = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi, tol, iters);
  return 0.5 * (r.first + r.second);
}

struct CumulativeVisitor {
  double t;
  double operator()(const ConstantRate& r) const { return r.lambda * t; }
  double operator()(const WeibullRate& r) const { return std::pow(t / r.b, r.c); }
  double operator()(const MakehamRate& r) const {
    return r.c / r.b * std::expm1(r.b * t) + r.mu * t;
  }
  double operator()(const TabulatedRate& r) const {
    if (t >= r.t.back()) return r.cum.back();
    return segment(r, locate(r, t)).value(t);
  }
};

struct IntensityVisitor {
  double t;
  double operator()(const ConstantRate& r) const { return r.lambda; }
  double operator()(const WeibullRate& r) const {
    if (t == 0.0) {
      if (r.c < 1.0) return kInf;
      return r.c == 1.0 ? 1.0 / r.b : 0.0;
    }
    return r.c / r.b * std::pow(t / r.b, r.c - 1.0);
  }
  double operator()(const MakehamRate& r) const { return r.c * std::exp(r.b * t) + r.mu; }
  double operator()(const TabulatedRate& r) const {
    if (t >= r.t.back()) return 0.0;
    return std::max(0.0, segment(r, locate(r, t)).derivative(t));
  }
};

struct InverseVisitor {
  double y;
  double operator()(const ConstantRate& r) const { return y / r.lambda; }
  double operator()(const WeibullRate& r) const { return r.b * std::pow(y, 1.0 / r.c); }
  double operator()(const MakehamRate& r) const {
    const double pure = std::log1p(r.b * y / r.c) / r.b;
    if (r.mu == 0.0) return pure;
    auto f = [&](double t) { return r.c / r.b * std::expm1(r.b * t) + r.mu * t - y; };
    // Each term alone reaching y bounds the root from above.
    return solve_increasing(f, 0.0, std::min(pure, y / r.mu));
  }
  double operator()(const TabulatedRate& r) const {
    const auto it = std::lower_bound(r.cum.begin(), r.cum.end(), y);
    const auto k = static_cast<std::size_t>(it - r.cum.begin());
    if (k == 0) return r.t.front();
    const Segment seg = segment(r, k - 1);
    return solve_increasing([&](double t) { return seg.value(t) - y; }, seg.x0, seg.x1);
  }
};

}  // namespace

RateFunction RateFunction::constant(double lambda) {
  require(lambda > 0.0 && std::isfinite(lambda),
          "constant rate needs 0 < lambda < inf, got " + num(lambda));
  return RateFunction(ConstantRate{lambda});
}

RateFunction RateFunction::weibull(double b, double c) {
  require(b > 0.0 && std::isfinite(b), "weibull rate needs b > 0, got " + num(b));
  require(c > 0.0 && std::isfinite(c), "weibull rate needs c > 0, got " + num(c));
  return RateFunction(WeibullRate{b, c});
}

RateFunction RateFunction::makeham(double c, double b, double mu) {
  require(c > 0.0 && std::isfinite(c), "makeham rate needs c > 0, got " + num(c));
  require(b > 0.0 && std::isfinite(b), "makeham rate needs b > 0, got " + num(b));
  require(mu >= 0.0 && std::isfinite(mu), "makeham rate needs mu >= 0, got " + num(mu));
  return RateFunction(MakehamRate{c, b, mu});
}

RateFunction RateFunction::tabulated(std::vector<double> t, std::vector<double> cum,
                                     std::string source) {
  require(t.size() == cum.size(), "tabulated rate: t and Lambda columns differ in length");
  require(!t.empty(), "tabulated rate: no knots");
  for (std::size_t i = 0; i < t.size(); ++i) {
    require(std::isfinite(t[i]) && std::isfinite(cum[i]), "tabulated rate: non-finite knot");
  }
  require(t.front() >= 0.0, "tabulated rate: knots must have t >= 0");
  if (t.front() > 0.0) {
    t.insert(t.begin(), 0.0);
    cum.insert(cum.begin(), 0.0);
  }
  require(cum.front() == 0.0, "tabulated rate: Lambda(0) must be 0");
  require(t.size() >= 2, "tabulated rate: needs a knot with t > 0");
  for (std::size_t i = 1; i < t.size(); ++i) {
    require(t[i] > t[i - 1], "tabulated rate: t must be strictly increasing");
    require(cum[i] >= cum[i - 1], "tabulated rate: Lambda must be nondecreasing");
  }
  TabulatedRate tab{std::move(t), std::move(cum), {}, std::move(source)};
  tab.slope = pchip_slopes(tab.t, tab.cum);
  return RateFunction(std::move(tab));
}

RateFunction RateFunction::from_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open rate table '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw DomainError("rate table '" + path + "' is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "t,Lambda") {
    throw DomainError("rate table '" + path + "': header must be 't,Lambda'");
  }
  std::vector<double> t, cum;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.find(',');
    double a = 0.0, b = 0.0;
    bool ok = comma != std::string::npos;
    if (ok) {
      const char* s = line.data();
      auto r1 = std::from_chars(s, s + comma, a);
      auto r2 = std::from_chars(s + comma + 1, s + line.size(), b);
      ok = r1.ec == std::errc() && r1.ptr == s + comma && r2.ec == std::errc() &&
           r2.ptr == s + line.size();
    }
    if (!ok) {
      throw DomainError("rate table '" + path + "': bad row " + std::to_string(row));
    }
    t.push_back(a);
    cum.push_back(b);
  }
  return tabulated(std::move(t), std::move(cum), path);
}

double RateFunction::cumulative(double t) const {
  if (!(t >= 0.0)) throw DomainError("cumulative: t must be >= 0, got " + num(t));
  if (t == 0.0) return 0.0;
  return std::visit(CumulativeVisitor{t}, kind_);
}

double RateFunction::increment(double s, double t) const {
  if (s > t) throw OrderError("increment: s = " + num(s) + " exceeds t = " + num(t));
  if (s == t) return 0.0;
  return std::max(0.0, cumulative(t) - cumulative(s));
}

double RateFunction::intensity(double t) const {
  if (!(t >= 0.0)) throw DomainError("intensity: t must be >= 0, got " + num(t));
  return std::visit(IntensityVisitor{t}, kind_);
}

double RateFunction::inverse_cumulative(double y) const {
  if (!(y >= 0.0)) throw DomainError("inverse_cumulative: y must be >= 0, got " + num(y));
  if (y > supremum()) {
    throw OutOfRange("inverse_cumulative: y = " + num(y) + " exceeds sup Lambda = " +
                     num(supremum()));
  }
  if (y == 0.0) return 0.0;
  if (std::isinf(y)) return kInf;
  return std::visit(InverseVisitor{y}, kind_);
}

double RateFunction::supremum() const {
  if (const auto* tab = std::get_if<TabulatedRate>(&kind_)) return tab->cum.back();
  return kInf;
}

bool RateFunction::bounded() const { return std::isfinite(supremum()); }

std::string RateFunction::describe() const {
  struct V {
    std::string operator()(const ConstantRate& r) const {
      return "constant(lambda=" + num(r.lambda) + ")";
    }
    std::string operator()(const WeibullRate& r) const {
      return "weibull(b=" + num(r.b) + ",c=" + num(r.c) + ")";
    }
    std::string operator()(const MakehamRate& r) const {
      return "makeham(c=" + num(r.c) + ",b=" + num(r.b) + ",mu=" + num(r.mu) + ")";
    }
    std::string operator()(const TabulatedRate& r) const {
      return "table(file=" + (r.source.empty() ? std::string("<memory>") : r.source) + ")";
    }
  };
  return std::visit(V{}, kind_);
}

}  // namespace fnpp
