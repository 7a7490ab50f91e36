#include "fnpp/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

namespace fnpp::quad {
namespace {

// Gauss-Kronrod 10/21 abscissae and weights (QUADPACK qk21).
constexpr std::array<double, 11> kXgk = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.000000000000000000000000000000000};
constexpr std::array<double, 11> kWgk = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077208980688149, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};
// Gauss weights for kXgk[1], kXgk[3], ..., kXgk[9].
constexpr std::array<double, 5> kWg = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338};

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kTiny = std::numeric_limits<double>::min();

struct Panel {
  double a;
  double b;
  std::vector<double> value;
  std::vector<double> error;
  bool splittable = true;
};

void check_finite(double v, double x) {
  if (!std::isfinite(v)) {
    std::ostringstream os;
    os << "integrand is not finite at x = " << x;
    throw QuadratureFailure(os.str(), std::numeric_limits<double>::infinity());
  }
}

// One 21-point Kronrod panel with QUADPACK-style error estimates.
Panel kronrod_panel(const VectorIntegrand& f, std::size_t dim, double a, double b,
                    std::vector<double>& scratch, int& evaluations) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  std::array<std::vector<double>, 21> fv;
  auto eval = [&](std::size_t slot, double x) {
    fv[slot].assign(dim, 0.0);
    f(x, std::span<double>(fv[slot]));
    for (double v : fv[slot]) check_finite(v, x);
    ++evaluations;
  };
  eval(20, center);
  for (std::size_t j = 0; j < 10; ++j) {
    const double dx = half * kXgk[j];
    eval(2 * j, center - dx);
    eval(2 * j + 1, center + dx);
  }

  Panel p{a, b, std::vector<double>(dim), std::vector<double>(dim)};
  scratch.resize(dim);
  for (std::size_t c = 0; c < dim; ++c) {
    const double fc = fv[20][c];
    double kron = kWgk[10] * fc;
    double gauss = 0.0;
    double resabs = kWgk[10] * std::abs(fc);
    for (std::size_t j = 0; j < 10; ++j) {
      const double lo = fv[2 * j][c];
      const double hi = fv[2 * j + 1][c];
      kron += kWgk[j] * (lo + hi);
      resabs += kWgk[j] * (std::abs(lo) + std::abs(hi));
      if (j % 2 == 1) gauss += kWg[j / 2] * (lo + hi);
    }
    const double mean = 0.5 * kron;
    double resasc = kWgk[10] * std::abs(fc - mean);
    for (std::size_t j = 0; j < 10; ++j) {
      resasc += kWgk[j] * (std::abs(fv[2 * j][c] - mean) + std::abs(fv[2 * j + 1][c] - mean));
    }
    const double habs = std::abs(half);
    double err = std::abs((kron - gauss) * half);
    resasc *= habs;
    resabs *= habs;
    if (resasc != 0.0 && err != 0.0) {
      err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
    }
    if (resabs > kTiny / (50.0 * kEps)) err = std::max(50.0 * kEps * resabs, err);
    p.value[c] = kron * half;
    p.error[c] = err;
  }
  // Bisection stops once the panel is at the resolution of the abscissae.
  p.splittable = std::abs(b - a) > 1e3 * kEps * std::max({std::abs(a), std::abs(b), kTiny});
  return p;
}

}  // namespace

VectorEstimate integrate(const VectorIntegrand& f, std::size_t dim, double a, double b,
                         const Accuracy& acc) {
  acc.validate();
  VectorEstimate out;
  out.value.assign(dim, 0.0);
  out.error.assign(dim, 0.0);
  if (a == b || dim == 0) return out;
  if (!(std::isfinite(a) && std::isfinite(b))) {
    throw DomainError("quad::integrate needs finite limits; use integrate_upper");
  }

  std::vector<double> scratch;
  std::vector<Panel> panels;
  panels.push_back(kronrod_panel(f, dim, a, b, scratch, out.evaluations));

  auto totals = [&] {
    std::fill(out.value.begin(), out.value.end(), 0.0);
    std::fill(out.error.begin(), out.error.end(), 0.0);
    for (const auto& p : panels) {
      for (std::size_t c = 0; c < dim; ++c) {
        out.value[c] += p.value[c];
        out.error[c] += p.error[c];
      }
    }
  };

  for (;;) {
    totals();
    bool done = true;
    for (std::size_t c = 0; c < dim; ++c) {
      if (out.error[c] > acc.target(out.value[c])) {
        done = false;
        break;
      }
    }
    if (done) return out;

    // Pick the panel with the largest error relative to the per-component targets.
    std::size_t worst = panels.size();
    double worst_score = -1.0;
    for (std::size_t i = 0; i < panels.size(); ++i) {
      if (!panels[i].splittable) continue;
      double score = 0.0;
      for (std::size_t c = 0; c < dim; ++c) {
        score = std::max(score, panels[i].error[c] / acc.target(out.value[c]));
      }
      if (score > worst_score) {
        worst_score = score;
        worst = i;
      }
    }
    double max_err = 0.0;
    for (std::size_t c = 0; c < dim; ++c) max_err = std::max(max_err, out.error[c]);
    if (worst == panels.size() || static_cast<int>(panels.size()) >= acc.max_terms) {
      std::ostringstream os;
      os << "adaptive quadrature on [" << a << ", " << b << "] stopped after "
         << panels.size() << " subintervals with error estimate " << max_err;
      throw QuadratureFailure(os.str(), max_err, dim > 1 ? out.error : std::vector<double>{});
    }
    const Panel parent = panels[worst];
    const double mid = 0.5 * (parent.a + parent.b);
    panels[worst] = kronrod_panel(f, dim, parent.a, mid, scratch, out.evaluations);
    panels.push_back(kronrod_panel(f, dim, mid, parent.b, scratch, out.evaluations));
  }
}

Estimate integrate(const ScalarIntegrand& f, double a, double b, const Accuracy& acc) {
  auto r = integrate([&](double x, std::span<double> out) { out[0] = f(x); }, 1, a, b, acc);
  return {r.value[0], r.error[0]};
}

VectorEstimate integrate_upper(const VectorIntegrand& f, std::size_t dim, double a,
                               double scale, const Accuracy& acc) {
  if (!(scale > 0.0)) throw DomainError("integrate_upper needs scale > 0");
  std::vector<double> buf(dim);
  auto mapped = [&](double s, std::span<double> out) {
    const double one_minus = 1.0 - s;
    const double x = a + scale * s / one_minus;
    const double jac = scale / (one_minus * one_minus);
    f(x, out);
    for (double& v : out) v = (v == 0.0) ? 0.0 : v * jac;
  };
  return integrate(mapped, dim, 0.0, 1.0, acc);
}

Estimate integrate_upper(const ScalarIntegrand& f, double a, double scale,
                         const Accuracy& acc) {
  auto r = integrate_upper([&](double x, std::span<double> out) { out[0] = f(x); }, 1, a,
                           scale, acc);
  return {r.value[0], r.error[0]};
}

Estimate integrate_log_scale(const ScalarIntegrand& f, double center, const Accuracy& acc) {
  if (!(center > 0.0)) throw DomainError("integrate_log_scale needs center > 0");
  // Integrand in y = log(x / center): f(center e^y) center e^y.
  auto in_y = [&](double y) {
    if (y > 700.0 || y < -700.0) return 0.0;
    const double x = center * std::exp(y);
    const double v = f(x);
    return v == 0.0 ? 0.0 : v * x;
  };
  auto right = integrate_upper(in_y, 0.0, 1.0, acc);
  auto left = integrate_upper([&](double y) { return in_y(-y); }, 0.0, 1.0, acc);
  return {right.value + left.value, right.error + left.error};
}

}  // namespace fnpp::quad
