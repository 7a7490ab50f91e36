#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "fnpp/accuracy.hpp"
#include "fnpp/rates.hpp"

namespace fnpp {

inline constexpr const char* kVersion = "0.1.0";

enum class Command { Simulate, Pmf, Moments, Covariance, Arrivals, VerifyGoverning, VerifyCox };

std::string to_string(Command c);
Command parse_command(const std::string& name);

/// Declarative description of one run. Keys in the key=value form use the
/// CLI flag names (alpha, rate, t, horizon, n-paths, seed, x-max, abs-tol,
/// rel-tol, out, ...).
struct ExperimentConfig {
  Command command = Command::Pmf;
  double alpha = 0.5;
  std::string rate = "constant(lambda=1)";
  std::vector<double> times{1.0};
  double horizon = 0.0;  // 0: max(times)
  std::int64_t n_paths = 1000;
  std::uint64_t seed = 1;
  int x_max = -1;  // -1: chosen from the tail bound
  Accuracy tolerances{};
  std::string output_dir = "out";

  unsigned workers = 1;
  std::string process = "fnpp";  // simulate: fnpp | fhpp | npp
  std::string backend = "exact";  // simulate: exact | path
  double grid_step = 0.0;         // 0: 1e-3 min(times)^alpha
  double v = 0.0;
  int max_order = 4;       // moments: highest k
  int n_max = 5;           // arrivals: n = 1..n_max
  int grid_points = 1000;  // verify-governing: grid intervals
  double residual_tol = 0.0;  // verify-governing: 0 picks 5e-3 (constant) or 1e-2
  std::vector<double> s_values{0.5, 1.0, 2.0};  // verify-cox

  /// Throws ConfigError naming the first invalid field.
  void validate() const;
};

/// Raw key -> values map as collected from flags or a config file.
using RawConfig = std::map<std::string, std::vector<std::string>>;

/// Parses key=value lines ('#' starts a comment). Repeated keys accumulate.
RawConfig parse_config_text(const std::string& text);

/// Strict conversion: unknown keys, malformed numbers and out-of-domain
/// values raise ConfigError naming the field.
ExperimentConfig make_config(Command command, const RawConfig& raw);

/// Grammar: constant(lambda=L) | weibull(b=B,c=C) | makeham(c=C,b=B,mu=M)
/// | table(file=PATH) with a CSV of header `t,Lambda`.
RateFunction parse_rate_spec(const std::string& spec);

/// Rebuilds the configuration stored in a meta.json written by run().
ExperimentConfig config_from_meta(const std::string& meta_path);

/// Runs the experiment and writes result.csv, result.json, meta.json and
/// summary.txt into config.output_dir. Returns 0 when every check passes,
/// 1 on a failed check, 2 on a configuration error and 3 on a numerical
/// failure.
int run(const ExperimentConfig& config);

}  // namespace fnpp
