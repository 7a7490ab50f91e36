#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fnpp/accuracy.hpp"
#include "fnpp/rates.hpp"

namespace fnpp {

/// Probabilities P(N = x), x = 0..x_max, at time t (shift v), plus the mass
/// beyond x_max.
struct PmfTable {
  double t = 0.0;
  double v = 0.0;
  int x_max = 0;
  std::vector<double> probs;
  double tail_bound = 0.0;

  double total() const;
};

/// Poisson marginals of the NPP increment over (v, t + v].
PmfTable npp_pmf(const RateFunction& rate, double t, double v, int x_max);

/// FHPP marginal (lam t^alpha)^x E_{alpha, alpha x + 1}^{x+1}(-lam t^alpha);
/// alpha = 1 gives the Poisson pmf.
double fhpp_pmf(double alpha, double lam, double t, int x, const Accuracy& acc = {});

/// Smallest x_max whose Poisson tail, at the operational times carrying all
/// but `tail` of Y_alpha(t), is below `tail`.
int suggest_x_max(double alpha, const RateFunction& rate, double t, double v,
                  double tail = 1e-8);

/// FNPP marginals by quadrature over the inverse-subordinator density:
/// probs[x] = int p_x(u, v) h_alpha(t, u) du. tail_bound integrates the
/// Poisson upper tail on the same nodes.
PmfTable fnpp_pmf(double alpha, const RateFunction& rate, double t, double v, int x_max,
                  const Accuracy& acc = {});

/// E[Lambda(Y_alpha(t))^i] for i = 1..k from one vector quadrature.
std::vector<double> lambda_moments(double alpha, const RateFunction& rate, double t, int k,
                                   const Accuracy& acc = {});

double fnpp_mean(double alpha, const RateFunction& rate, double t, const Accuracy& acc = {});
/// E[Lambda(Y)] + Var[Lambda(Y)]. NegativeVariance if Var[Lambda(Y)] < -abs_tol.
double fnpp_variance(double alpha, const RateFunction& rate, double t,
                     const Accuracy& acc = {});
/// sum_{i=1}^k S(k, i) E[Lambda(Y)^i].
double fnpp_moment(double alpha, const RateFunction& rate, double t, int k,
                   const Accuracy& acc = {});

/// Cov(N(s), N(t)) = Lambda(min(s, t)) for the NPP.
double npp_covariance(const RateFunction& rate, double s, double t);

struct CovarianceEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
  double mean_term = 0.0;  // E[Lambda(Y(s ^ t))], by quadrature
  double cov_term = 0.0;   // Cov[Lambda(Y(s)), Lambda(Y(t))], by Monte Carlo
};

/// Cov(N_alpha(s), N_alpha(t)) = E[Lambda(Y(s ^ t))] + Cov[Lambda(Y(s)), Lambda(Y(t))].
/// Path i uses RngStream(seed, i); the reduction runs in path order, so the
/// result does not depend on `workers`.
CovarianceEstimate fnpp_covariance(double alpha, const RateFunction& rate, double s, double t,
                                   std::int64_t n_paths, double grid_step, std::uint64_t seed,
                                   unsigned workers = 1, const Accuracy& acc = {});

/// P(T_n <= t) = int_0^inf (1 - H_alpha(t, u)) lambda(u) e^{-Lambda(u)}
/// Lambda(u)^{n-1} / (n-1)! du, evaluated in y = Lambda(u).
double arrival_cdf(double alpha, const RateFunction& rate, int n, double t,
                   const Accuracy& acc = {});

/// P(T_n < inf) = P(Poisson(sup Lambda) >= n); 1 when Lambda is unbounded.
double arrival_total_mass(const RateFunction& rate, int n);

/// Samples of f on 0 = t_0 < t_1 < ... < t_M.
struct CaputoGrid {
  std::vector<double> times;
  std::vector<double> values;
  double alpha = 0.5;

  void validate() const;
};

/// L1 approximation of D^alpha f at t_1..t_M (M values).
std::vector<double> caputo_l1(const CaputoGrid& grid);

/// L1 plus starting weights on t_1..t_m that make the scheme exact for
/// t^sigma, sigma in `exponents` (m = exponents.size() <= M).
std::vector<double> caputo_l1_corrected(const CaputoGrid& grid,
                                        std::span<const double> exponents);

struct GoverningResidual {
  std::vector<double> times;  // t_1..t_M
  std::vector<double> lhs;
  std::vector<double> rhs;
  std::vector<double> residual;

  double max_abs() const;
};

/// LHS - RHS of the fractional governing equation for f_x(t, v) on a grid
/// starting at 0. LHS is the corrected L1 derivative (exponents alpha,
/// 2 alpha, 3 alpha) of the quadrature pmf; RHS is
/// int lambda(u + v) [p_{x-1}(u, v) - p_x(u, v)] h_alpha(t, u) du, computed on
/// the same quadrature nodes as the pmf.
GoverningResidual governing_residual(double alpha, const RateFunction& rate, int x, double v,
                                     std::span<const double> t_grid, const Accuracy& acc = {},
                                     unsigned workers = 1);

struct CoxReport {
  double alpha = 0.5;
  std::vector<double> t_values;
  std::vector<double> kernel_transform;  // int e^{-rt} K_alpha(r) dr
  std::vector<double> ml_value;          // E_alpha(-t^alpha)
  std::vector<double> s_values;
  std::vector<double> density_transform;  // Laplace transform of the ML interarrival density
  std::vector<double> closed_form;        // 1 / (1 + s^alpha)
  double max_dev_t = 0.0;
  double max_dev_s = 0.0;
};

CoxReport cox_identity_check(double alpha, std::span<const double> t_values,
                             std::span<const double> s_values, const Accuracy& acc = {});

}  // namespace fnpp
