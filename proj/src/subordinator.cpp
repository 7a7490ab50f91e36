#include "fnpp/subordinator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

#include "fnpp/errors.hpp"

namespace fnpp {
namespace {

void check_alpha(double alpha, const char* who) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    std::ostringstream os;
    os << who << ": alpha must lie in (0, 1), got " << alpha;
    throw DomainError(os.str());
  }
}

}  // namespace

double sample_stable_unit(double alpha, RngStream& rng) {
  check_alpha(alpha, "sample_stable_unit");
  // phi in (0, pi) strictly, since uniform() avoids both endpoints.
  const double phi = std::numbers::pi * rng.uniform();
  const double e = rng.exponential();
  const double log_a = std::log(std::sin(alpha * phi) / std::sin(phi)) / (1.0 - alpha) +
                       std::log(std::sin((1.0 - alpha) * phi) / std::sin(alpha * phi));
  return std::exp((1.0 - alpha) / alpha * (log_a - std::log(e)));
}

std::size_t SubordinatorPath::ties() const {
  std::size_t n = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] <= values[i - 1]) ++n;
  }
  return n;
}

SubordinatorPath sample_path(double alpha, std::span<const double> grid, RngStream& rng) {
  check_alpha(alpha, "sample_path");
  if (grid.empty() || grid[0] != 0.0) throw GridError("sample_path: grid must start at 0");
  SubordinatorPath p;
  p.alpha = alpha;
  p.grid.assign(grid.begin(), grid.end());
  p.values.assign(grid.size(), 0.0);
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double du = grid[i] - grid[i - 1];
    if (!(du > 0.0) || !std::isfinite(grid[i])) {
      throw GridError("sample_path: grid must be strictly increasing and finite");
    }
    p.values[i] = p.values[i - 1] + std::pow(du, 1.0 / alpha) * sample_stable_unit(alpha, rng);
  }
  return p;
}

double first_passage(const SubordinatorPath& path, double t) {
  if (!(t >= 0.0)) throw DomainError("first_passage: t must be >= 0");
  const auto it = std::upper_bound(path.values.begin(), path.values.end(), t);
  if (it == path.values.end()) {
    std::ostringstream os;
    os << "first_passage: path ends at L = " << (path.values.empty() ? 0.0 : path.values.back())
       << " <= t = " << t;
    throw PathTooShort(os.str());
  }
  return path.grid[static_cast<std::size_t>(it - path.values.begin())];
}

double sample_inverse_marginal(double alpha, double t, RngStream& rng) {
  check_alpha(alpha, "sample_inverse_marginal");
  if (!(t > 0.0)) throw DomainError("sample_inverse_marginal: t must be positive");
  return std::pow(t / sample_stable_unit(alpha, rng), alpha);
}

std::pair<double, double> sample_joint_inverse(double alpha, double s, double t,
                                               double grid_step, RngStream& rng,
                                               std::size_t max_steps) {
  check_alpha(alpha, "sample_joint_inverse");
  if (!(s > 0.0) || s > t) throw DomainError("sample_joint_inverse: need 0 < s <= t");
  if (!(grid_step > 0.0)) throw DomainError("sample_joint_inverse: grid_step must be positive");
  const double jump_scale = std::pow(grid_step, 1.0 / alpha);
  double level = 0.0;
  double ys = -1.0;
  for (std::size_t k = 1; k <= max_steps; ++k) {
    level += jump_scale * sample_stable_unit(alpha, rng);
    const double u = static_cast<double>(k) * grid_step;
    if (ys < 0.0 && level > s) ys = u;
    if (level > t) return {ys, u};
  }
  std::ostringstream os;
  os << "sample_joint_inverse: no passage of t = " << t << " within " << max_steps << " steps";
  throw PathTooShort(os.str());
}

}  // namespace fnpp
