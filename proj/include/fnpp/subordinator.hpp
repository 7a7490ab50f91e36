#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "fnpp/random.hpp"

namespace fnpp {

/// One draw of L_alpha(1), the positive stable law with Laplace transform
/// exp(-s^alpha), by Kanter's angle/exponential representation.
double sample_stable_unit(double alpha, RngStream& rng);

/// L_alpha sampled on an operational-time grid u_0 = 0 < u_1 < ... < u_m.
struct SubordinatorPath {
  double alpha = 0.5;
  std::vector<double> grid;
  std::vector<double> values;

  /// Number of zero increments (floating-point ties).
  std::size_t ties() const;
};

/// Independent increments (u_{i+1} - u_i)^{1/alpha} S_i. GridError unless
/// the grid starts at 0 and is strictly increasing.
SubordinatorPath sample_path(double alpha, std::span<const double> grid, RngStream& rng);

/// Smallest grid point u_i with L(u_i) > t. Upper estimate of Y_alpha(t).
/// PathTooShort if the path never exceeds t.
double first_passage(const SubordinatorPath& path, double t);

/// Exact draw of Y_alpha(t) = (t / L_alpha(1))^alpha in distribution.
double sample_inverse_marginal(double alpha, double t, RngStream& rng);

/// (Y_alpha(s), Y_alpha(t)) read off one path on the grid k * grid_step.
/// The path is extended until it passes t; PathTooShort once `max_steps`
/// increments have been drawn without passage.
std::pair<double, double> sample_joint_inverse(double alpha, double s, double t,
                                               double grid_step, RngStream& rng,
                                               std::size_t max_steps = 100'000'000);

}  // namespace fnpp
