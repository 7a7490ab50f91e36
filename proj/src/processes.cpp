#include "fnpp/processes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "fnpp/errors.hpp"
#include "fnpp/subordinator.hpp"

namespace fnpp {
namespace {

void check_horizon(double horizon, const char* who) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw DomainError(std::string(who) + ": horizon must be positive and finite");
  }
}

}  // namespace

std::string to_string(ProcessKind k) {
  switch (k) {
    case ProcessKind::NPP: return "npp";
    case ProcessKind::FHPP: return "fhpp";
    case ProcessKind::FNPP: return "fnpp";
    case ProcessKind::Increment: return "increment";
  }
  return "unknown";
}

std::int64_t count(const EventStream& stream, double t) {
  if (!(t >= 0.0) || t > stream.horizon) {
    std::ostringstream os;
    os << "count: t = " << t << " outside [0, " << stream.horizon << "]";
    throw DomainError(os.str());
  }
  const auto it = std::upper_bound(stream.arrivals.begin(), stream.arrivals.end(), t);
  return static_cast<std::int64_t>(it - stream.arrivals.begin());
}

EventStream simulate_npp(const RateFunction& rate, double horizon, RngStream& rng) {
  check_horizon(horizon, "simulate_npp");
  EventStream s;
  s.horizon = horizon;
  s.kind = ProcessKind::NPP;
  const double top = rate.cumulative(horizon);
  double g = rng.exponential();
  while (g <= top) {
    s.arrivals.push_back(rate.inverse_cumulative(g));
    g += rng.exponential();
  }
  return s;
}

double sample_ml_interarrival(double alpha, double lam, RngStream& rng) {
  if (!(lam > 0.0)) throw DomainError("sample_ml_interarrival: lambda must be positive");
  const double e = rng.exponential();
  return std::pow(e / lam, 1.0 / alpha) * sample_stable_unit(alpha, rng);
}

EventStream simulate_fhpp_renewal(double alpha, double lam, double horizon, RngStream& rng) {
  check_horizon(horizon, "simulate_fhpp_renewal");
  EventStream s;
  s.horizon = horizon;
  s.kind = ProcessKind::FHPP;
  double t = sample_ml_interarrival(alpha, lam, rng);
  while (t <= horizon) {
    s.arrivals.push_back(t);
    t += sample_ml_interarrival(alpha, lam, rng);
  }
  return s;
}

EventStream simulate_fnpp(double alpha, const RateFunction& rate, double horizon,
                          RngStream& rng) {
  check_horizon(horizon, "simulate_fnpp");
  EventStream s;
  s.horizon = horizon;
  s.kind = ProcessKind::FNPP;
  const double sup = rate.supremum();
  double g = 0.0;
  double u_prev = 0.0;
  double level = 0.0;
  for (;;) {
    g += rng.exponential();
    if (g > sup) break;
    const double u = rate.inverse_cumulative(g);
    level += std::pow(u - u_prev, 1.0 / alpha) * sample_stable_unit(alpha, rng);
    u_prev = u;
    if (level > horizon) break;
    s.arrivals.push_back(level);
  }
  return s;
}

double sample_fnpp_arrival(double alpha, const RateFunction& rate, int n, RngStream& rng) {
  if (n < 1) throw DomainError("sample_fnpp_arrival: n must be >= 1");
  double g = 0.0;
  for (int i = 0; i < n; ++i) g += rng.exponential();
  const double u = g > rate.supremum() ? -1.0 : rate.inverse_cumulative(g);
  const double s = sample_stable_unit(alpha, rng);
  if (u < 0.0) return std::numeric_limits<double>::infinity();
  return std::pow(u, 1.0 / alpha) * s;
}

std::vector<std::int64_t> simulate_fnpp_path_counts(double alpha, const RateFunction& rate,
                                                    std::span<const double> times,
                                                    double grid_step, RngStream& rng) {
  if (!(grid_step > 0.0)) throw DomainError("simulate_fnpp_path_counts: grid_step must be > 0");
  std::vector<std::int64_t> out(times.size(), 0);
  if (times.empty()) return out;
  for (std::size_t j = 0; j < times.size(); ++j) {
    if (!(times[j] > 0.0) || (j > 0 && times[j] < times[j - 1])) {
      throw GridError("simulate_fnpp_path_counts: times must be positive and nondecreasing");
    }
  }
  // First passages of the discretized subordinator over every requested time.
  const double jump_scale = std::pow(grid_step, 1.0 / alpha);
  std::vector<double> y(times.size());
  double level = 0.0;
  std::size_t k = 0;
  std::size_t j = 0;
  while (j < times.size()) {
    level += jump_scale * sample_stable_unit(alpha, rng);
    ++k;
    while (j < times.size() && level > times[j]) y[j++] = static_cast<double>(k) * grid_step;
  }
  // Unit-Poisson epochs counted against Lambda(Y(t_j)).
  const double sup = rate.supremum();
  double g = rng.exponential();
  std::int64_t n = 0;
  for (j = 0; j < times.size(); ++j) {
    const double target = std::min(sup, rate.cumulative(y[j]));
    while (g <= target) {
      ++n;
      g += rng.exponential();
    }
    out[j] = n;
  }
  return out;
}

std::int64_t simulate_increment(double alpha, const RateFunction& rate, double t, double v,
                                RngStream& rng) {
  if (!(v >= 0.0)) throw DomainError("simulate_increment: v must be >= 0");
  const double y = sample_inverse_marginal(alpha, t, rng);
  return static_cast<std::int64_t>(rng.poisson(rate.increment(v, y + v)));
}

}  // namespace fnpp
