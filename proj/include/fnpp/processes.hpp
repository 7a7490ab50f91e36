#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fnpp/random.hpp"
#include "fnpp/rates.hpp"

namespace fnpp {

enum class ProcessKind { NPP, FHPP, FNPP, Increment };

std::string to_string(ProcessKind k);

/// Arrival times T_1 < T_2 < ... of a counting process on (0, horizon].
struct EventStream {
  std::vector<double> arrivals;
  double horizon = 0.0;
  ProcessKind kind = ProcessKind::NPP;
  double v = 0.0;  // shift of the increment process, 0 otherwise
};

/// N(t) = #{T_n <= t}; DomainError if t lies outside [0, horizon].
std::int64_t count(const EventStream& stream, double t);

/// NPP by time change of unit-Poisson epochs: T_k = Lambda^{-1}(G_k).
EventStream simulate_npp(const RateFunction& rate, double horizon, RngStream& rng);

/// Interarrival with P(J > t) = E_alpha(-lam t^alpha): J = (E/lam)^{1/alpha} S.
double sample_ml_interarrival(double alpha, double lam, RngStream& rng);

/// Renewal process with Mittag-Leffler interarrivals.
EventStream simulate_fhpp_renewal(double alpha, double lam, double horizon, RngStream& rng);

/// Exact FNPP arrivals T_n = L_alpha(Lambda^{-1}(G_n)), with L_alpha drawn only
/// at the operational times Lambda^{-1}(G_n). For bounded Lambda the stream
/// ends after the last epoch below sup Lambda.
EventStream simulate_fnpp(double alpha, const RateFunction& rate, double horizon,
                          RngStream& rng);

/// One draw of the n-th FNPP arrival time T_n = L_alpha(Lambda^{-1}(G_n)), G_n a
/// sum of n unit exponentials. +inf when G_n exceeds sup Lambda.
double sample_fnpp_arrival(double alpha, const RateFunction& rate, int n, RngStream& rng);

/// FNPP counts N_alpha(t_j) on a discretized subordinator path: Y_alpha(t_j)
/// by first passage on the grid k * grid_step, then unit-Poisson epochs
/// counted up to Lambda(Y_alpha(t_j)). Times must be nondecreasing and > 0.
std::vector<std::int64_t> simulate_fnpp_path_counts(double alpha, const RateFunction& rate,
                                                    std::span<const double> times,
                                                    double grid_step, RngStream& rng);

/// One draw of I_alpha(t, v) = N_1(Lambda(Y_alpha(t) + v)) - N_1(Lambda(v)).
std::int64_t simulate_increment(double alpha, const RateFunction& rate, double t, double v,
                                RngStream& rng);

}  // namespace fnpp
