#include "fnpp/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <variant>

#include "json.hpp"

#include "fnpp/analytics.hpp"
#include "fnpp/parallel.hpp"
#include "fnpp/processes.hpp"
#include "fnpp/stats.hpp"

namespace fnpp {
namespace {

using json = nlohmann::json;

std::string num(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

// ---------------------------------------------------------------- parsing

double parse_double(const std::string& field, const std::string& text) {
  const std::string s = trim(text);
  double v = 0.0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || r.ec != std::errc() || r.ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw ConfigError(field, "expected a finite number, got '" + text + "'");
  }
  return v;
}

std::int64_t parse_int(const std::string& field, const std::string& text) {
  const std::string s = trim(text);
  std::int64_t v = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || r.ec != std::errc() || r.ptr != s.data() + s.size()) {
    throw ConfigError(field, "expected an integer, got '" + text + "'");
  }
  return v;
}

std::uint64_t parse_u64(const std::string& field, const std::string& text) {
  const std::string s = trim(text);
  std::uint64_t v = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || r.ec != std::errc() || r.ptr != s.data() + s.size()) {
    throw ConfigError(field, "expected a non-negative integer, got '" + text + "'");
  }
  return v;
}

std::vector<double> parse_list(const std::string& field, const std::vector<std::string>& vals) {
  std::vector<double> out;
  for (const auto& v : vals) {
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_double(field, item));
  }
  return out;
}

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys{
      "alpha",   "rate",  "t",         "horizon",   "n-paths",     "seed",
      "x-max",   "abs-tol", "rel-tol", "max-terms", "out",         "workers",
      "process", "backend", "grid-step", "v",       "max-order",   "n-max",
      "grid-points", "residual-tol", "s"};
  return keys;
}

// ------------------------------------------------------------ rate grammar

class RateParser {
 public:
  explicit RateParser(const std::string& s) : s_(s) {}

  RateFunction parse() {
    skip_ws();
    const std::size_t name_pos = pos_;
    const std::string name = ident();
    static const std::map<std::string, std::vector<std::string>> params{
        {"constant", {"lambda"}},
        {"weibull", {"b", "c"}},
        {"makeham", {"c", "b", "mu"}},
        {"table", {"file"}}};
    const auto it = params.find(name);
    if (it == params.end()) fail(name_pos, "constant, weibull, makeham or table");
    expect('(');
    std::map<std::string, std::string> values;
    std::map<std::string, std::size_t> where;
    skip_ws();
    if (peek() != ')') {
      for (;;) {
        skip_ws();
        const std::size_t key_pos = pos_;
        const std::string key = ident();
        const auto& allowed = it->second;
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
          fail(key_pos, join(allowed));
        }
        if (values.count(key)) fail(key_pos, "a parameter not given before");
        expect('=');
        skip_ws();
        where[key] = pos_;
        values[key] = name == "table" ? path() : number_text();
        skip_ws();
        if (peek() == ',') {
          ++pos_;
          continue;
        }
        break;
      }
    }
    expect(')');
    skip_ws();
    if (pos_ != s_.size()) fail(pos_, "end of rate spec");
    for (const auto& p : it->second) {
      if (!values.count(p)) fail(pos_ - 1, "parameter '" + p + "'");
    }

    auto number = [&](const std::string& key) {
      const std::string& text = values[key];
      double v = 0.0;
      const auto r = std::from_chars(text.data(), text.data() + text.size(), v);
      if (r.ec != std::errc() || r.ptr != text.data() + text.size()) {
        fail(where[key], "a number for '" + key + "'");
      }
      return v;
    };
    try {
      if (name == "constant") return RateFunction::constant(number("lambda"));
      if (name == "weibull") return RateFunction::weibull(number("b"), number("c"));
      if (name == "makeham") {
        return RateFunction::makeham(number("c"), number("b"), number("mu"));
      }
      return RateFunction::from_csv(values["file"]);
    } catch (const DomainError& e) {
      throw ParseError(std::string("rate spec: ") + e.what(), name_pos,
                       name == "table" ? "a readable CSV file with header t,Lambda"
                                       : "parameters inside the family's domain");
    }
  }

 private:
  static std::string join(const std::vector<std::string>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + v[i];
    return out;
  }
  [[noreturn]] void fail(std::size_t pos, const std::string& expected) const {
    std::ostringstream os;
    os << "rate spec '" << s_ << "': at position " << pos << " expected " << expected;
    throw ParseError(os.str(), pos, expected);
  }
  char peek() const { return pos_ < s_.size() ? s_[pos_] : '\0'; }
  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  void expect(char c) {
    skip_ws();
    if (peek() != c) fail(pos_, std::string("'") + c + "'");
    ++pos_;
  }
  std::string ident() {
    const std::size_t b = pos_;
    while (pos_ < s_.size() && (std::isalpha(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) {
      ++pos_;
    }
    if (b == pos_) fail(b, "a name");
    return s_.substr(b, pos_ - b);
  }
  std::string number_text() {
    const std::size_t b = pos_;
    while (pos_ < s_.size() && std::string_view("+-.0123456789eE").find(s_[pos_]) !=
                                   std::string_view::npos) {
      ++pos_;
    }
    if (b == pos_) fail(b, "a number");
    return s_.substr(b, pos_ - b);
  }
  std::string path() {
    const std::size_t b = pos_;
    while (pos_ < s_.size() && s_[pos_] != ')' && s_[pos_] != ',') ++pos_;
    const std::string p = trim(s_.substr(b, pos_ - b));
    if (p.empty()) fail(b, "a file path");
    return p;
  }

  const std::string& s_;
  std::size_t pos_ = 0;
};

// ------------------------------------------------------------- artifacts

using Cell = std::variant<double, std::int64_t, std::string>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

struct Check {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct Outcome {
  Table table;
  std::vector<Check> checks;
  json extra = json::object();
};

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string cell_text(const Cell& c) {
  if (const auto* d = std::get_if<double>(&c)) return num(*d);
  if (const auto* i = std::get_if<std::int64_t>(&c)) return std::to_string(*i);
  return std::get<std::string>(c);
}

json cell_json(const Cell& c) {
  if (const auto* d = std::get_if<double>(&c)) return *d;
  if (const auto* i = std::get_if<std::int64_t>(&c)) return *i;
  return std::get<std::string>(c);
}

void write_file(const std::filesystem::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw ConfigError("out", "cannot write '" + p.string() + "'");
  out << content;
}

std::string csv_text(const Table& t) {
  std::string out;
  for (std::size_t i = 0; i < t.columns.size(); ++i) {
    out += (i ? "," : "") + csv_field(t.columns[i]);
  }
  out += "\r\n";
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + csv_field(cell_text(row[i]));
    out += "\r\n";
  }
  return out;
}

json config_json(const ExperimentConfig& c) {
  json j;
  j["command"] = to_string(c.command);
  j["alpha"] = c.alpha;
  j["rate"] = c.rate;
  j["t"] = c.times;
  j["horizon"] = c.horizon;
  j["n-paths"] = c.n_paths;
  j["seed"] = c.seed;
  j["x-max"] = c.x_max;
  j["abs-tol"] = c.tolerances.abs_tol;
  j["rel-tol"] = c.tolerances.rel_tol;
  j["max-terms"] = c.tolerances.max_terms;
  j["out"] = c.output_dir;
  j["workers"] = c.workers;
  j["process"] = c.process;
  j["backend"] = c.backend;
  j["grid-step"] = c.grid_step;
  j["v"] = c.v;
  j["max-order"] = c.max_order;
  j["n-max"] = c.n_max;
  j["grid-points"] = c.grid_points;
  j["residual-tol"] = c.residual_tol;
  j["s"] = c.s_values;
  return j;
}

std::string fmt_sci(double v) {
  std::ostringstream os;
  os.precision(3);
  os << std::scientific << v;
  return os.str();
}

Check make_check(std::string name, bool ok, std::string detail = {}) {
  return {std::move(name), ok, std::move(detail)};
}

double effective_grid_step(const ExperimentConfig& c) {
  if (c.grid_step > 0.0) return c.grid_step;
  const double tmin = *std::min_element(c.times.begin(), c.times.end());
  return 1e-3 * std::pow(tmin, c.alpha);
}

// --------------------------------------------------------------- commands

Outcome do_simulate(const ExperimentConfig& c, const RateFunction& rate, std::string& op) {
  Outcome o;
  const auto n = static_cast<std::size_t>(c.n_paths);
  const double horizon =
      c.horizon > 0.0 ? c.horizon : *std::max_element(c.times.begin(), c.times.end());
  std::vector<double> final_counts(n);
  double expected = 0.0;

  if (c.backend == "path") {
    op = "simulate_fnpp_path_counts";
    std::vector<double> times = c.times;
    std::sort(times.begin(), times.end());
    const double step = effective_grid_step(c);
    std::vector<std::vector<std::int64_t>> counts(n);
    parallel_for(n, c.workers, [&](std::size_t i) {
      RngStream rng(c.seed, i);
      counts[i] = simulate_fnpp_path_counts(c.alpha, rate, times, step, rng);
    });
    o.table.columns = {"path", "t", "count"};
    bool monotone = true;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < times.size(); ++j) {
        o.table.rows.push_back({static_cast<std::int64_t>(i), times[j], counts[i][j]});
        if (j > 0 && counts[i][j] < counts[i][j - 1]) monotone = false;
      }
      final_counts[i] = static_cast<double>(counts[i].back());
    }
    o.checks.push_back(make_check("counts nondecreasing in t", monotone));
    op = "fnpp_mean";
    expected = fnpp_mean(c.alpha, rate, times.back(), c.tolerances);
    o.extra["grid_step"] = step;
  } else {
    op = "simulate_" + c.process;
    std::vector<EventStream> streams(n);
    parallel_for(n, c.workers, [&](std::size_t i) {
      RngStream rng(c.seed, i);
      if (c.process == "npp") {
        streams[i] = simulate_npp(rate, horizon, rng);
      } else if (c.process == "fhpp") {
        streams[i] = simulate_fhpp_renewal(c.alpha, std::get<ConstantRate>(rate.kind()).lambda,
                                           horizon, rng);
      } else {
        streams[i] = simulate_fnpp(c.alpha, rate, horizon, rng);
      }
    });
    o.table.columns = {"path", "index", "arrival_time"};
    bool ordered = true;
    for (std::size_t i = 0; i < n; ++i) {
      const auto& a = streams[i].arrivals;
      for (std::size_t k = 0; k < a.size(); ++k) {
        o.table.rows.push_back(
            {static_cast<std::int64_t>(i), static_cast<std::int64_t>(k + 1), a[k]});
        if (!(a[k] > 0.0) || a[k] > horizon || (k > 0 && !(a[k] > a[k - 1]))) ordered = false;
      }
      final_counts[i] = static_cast<double>(a.size());
    }
    o.checks.push_back(make_check("arrivals strictly increasing within (0, horizon]", ordered));
    if (c.process == "npp") {
      expected = rate.cumulative(horizon);
    } else {
      op = "fnpp_mean";
      expected = fnpp_mean(c.alpha, rate, horizon, c.tolerances);
    }
  }
  const auto est = stats::mean_estimate(final_counts);
  const double z = est.std_error > 0.0 ? std::abs(est.mean - expected) / est.std_error : 0.0;
  o.checks.push_back(make_check("mean final count within 4 s.e. of the quadrature mean",
                                z <= 4.0 || std::abs(est.mean - expected) < 1e-12,
                                "sample " + num(est.mean) + ", expected " + num(expected) +
                                    ", s.e. " + num(est.std_error)));
  o.extra["sample_mean"] = est.mean;
  o.extra["expected_mean"] = expected;
  o.extra["std_error"] = est.std_error;
  return o;
}

constexpr int kAutoXMaxCap = 2000;

Outcome do_pmf(const ExperimentConfig& c, const RateFunction& rate, std::string& op) {
  Outcome o;
  o.table.columns = {"t", "x", "prob"};
  json tails = json::array();
  for (double t : c.times) {
    op = "suggest_x_max";
    const int suggested = c.x_max >= 0 ? c.x_max : suggest_x_max(c.alpha, rate, t, c.v);
    // Fast-growing Lambda (Makeham) can suggest millions of entries; the
    // mass beyond the cap is still reported through tail_bound.
    const int xm = c.x_max >= 0 ? c.x_max : std::min(suggested, kAutoXMaxCap);
    op = "fnpp_pmf";
    const auto p = fnpp_pmf(c.alpha, rate, t, c.v, xm, c.tolerances);
    for (int x = 0; x <= xm; ++x) {
      o.table.rows.push_back({t, static_cast<std::int64_t>(x), p.probs[static_cast<std::size_t>(x)]});
    }
    const double dev = std::abs(p.total() - 1.0);
    o.checks.push_back(make_check("t=" + num(t) + " mass conservation |sum + tail - 1| < 1e-6",
                                  dev < 1e-6, "deviation " + fmt_sci(dev)));
    if (rate.is_constant() && c.v == 0.0) {
      op = "fhpp_pmf";
      const double lam = std::get<ConstantRate>(rate.kind()).lambda;
      double worst = 0.0;
      for (int x = 0; x <= xm; ++x) {
        worst = std::max(worst, std::abs(fhpp_pmf(c.alpha, lam, t, x, c.tolerances) -
                                         p.probs[static_cast<std::size_t>(x)]));
      }
      o.checks.push_back(make_check("t=" + num(t) + " closed-form agreement max |diff| < 1e-6",
                                    worst < 1e-6, "max diff " + fmt_sci(worst)));
    }
    tails.push_back({{"t", t}, {"x_max", xm}, {"x_max_suggested", suggested},
                     {"tail_bound", p.tail_bound}});
  }
  o.extra["tails"] = tails;
  return o;
}

Outcome do_moments(const ExperimentConfig& c, const RateFunction& rate, std::string& op) {
  Outcome o;
  o.table.columns = {"t", "quantity", "value"};
  for (double t : c.times) {
    op = "fnpp_mean";
    const double mean = fnpp_mean(c.alpha, rate, t, c.tolerances);
    op = "fnpp_variance";
    const double var = fnpp_variance(c.alpha, rate, t, c.tolerances);
    o.table.rows.push_back({t, std::string("mean"), mean});
    o.table.rows.push_back({t, std::string("variance"), var});
    double second = 0.0;
    op = "fnpp_moment";
    for (int k = 1; k <= c.max_order; ++k) {
      const double mk = fnpp_moment(c.alpha, rate, t, k, c.tolerances);
      if (k == 2) second = mk;
      o.table.rows.push_back({t, "moment_" + std::to_string(k), mk});
    }
    o.checks.push_back(make_check("t=" + num(t) + " overdispersion variance > mean", var > mean,
                                  "variance " + num(var) + ", mean " + num(mean)));
    if (c.max_order >= 2) {
      const double target = var + mean * mean;
      const double rel = std::abs(second - target) / std::abs(target);
      o.checks.push_back(make_check("t=" + num(t) + " moment_2 = variance + mean^2 (rel 1e-8)",
                                    rel < 1e-8, "relative deviation " + fmt_sci(rel)));
    }
  }
  return o;
}

Outcome do_covariance(const ExperimentConfig& c, const RateFunction& rate, std::string& op) {
  Outcome o;
  o.table.columns = {"s", "t", "estimate", "std_error", "npp_covariance"};
  std::vector<double> times = c.times;
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());
  const double step = effective_grid_step(c);
  for (std::size_t i = 0; i < times.size(); ++i) {
    for (std::size_t j = i; j < times.size(); ++j) {
      op = "fnpp_covariance";
      const auto est = fnpp_covariance(c.alpha, rate, times[i], times[j], c.n_paths, step,
                                       c.seed, c.workers, c.tolerances);
      o.table.rows.push_back({times[i], times[j], est.estimate, est.std_error,
                              npp_covariance(rate, times[i], times[j])});
      if (i == j) {
        op = "fnpp_variance";
        const double var = fnpp_variance(c.alpha, rate, times[i], c.tolerances);
        const double z = std::abs(est.estimate - var) / est.std_error;
        o.checks.push_back(make_check("s=t=" + num(times[i]) +
                                          " covariance matches fnpp_variance within 4 s.e.",
                                      z <= 4.0,
                                      "estimate " + num(est.estimate) + ", variance " +
                                          num(var) + ", s.e. " + num(est.std_error)));
      }
    }
  }
  o.extra["grid_step"] = step;
  return o;
}

Outcome do_arrivals(const ExperimentConfig& c, const RateFunction& rate, std::string& op) {
  Outcome o;
  o.table.columns = {"t", "n", "cdf", "pmf_tail_sum"};
  json mass = json::array();
  for (double t : c.times) {
    // Entries 0..n_max plus the integrated tail are all the sums need.
    const int xm = c.n_max;
    op = "fnpp_pmf";
    const auto p = fnpp_pmf(c.alpha, rate, t, 0.0, xm, c.tolerances);
    double below = 0.0;
    double worst = 0.0;
    double prev = 2.0;
    bool monotone = true;
    for (int n = 1; n <= c.n_max; ++n) {
      below += p.probs[static_cast<std::size_t>(n - 1)];
      double tail = p.tail_bound;
      for (int x = n; x <= xm; ++x) tail += p.probs[static_cast<std::size_t>(x)];
      op = "arrival_cdf";
      const double cdf = arrival_cdf(c.alpha, rate, n, t, c.tolerances);
      o.table.rows.push_back({t, static_cast<std::int64_t>(n), cdf, tail});
      worst = std::max(worst, std::abs(cdf - tail));
      if (cdf > prev + 1e-12) monotone = false;
      prev = cdf;
    }
    o.checks.push_back(make_check("t=" + num(t) + " arrival cdf matches pmf tail sum within 1e-5",
                                  worst < 1e-5, "max diff " + fmt_sci(worst)));
    o.checks.push_back(make_check("t=" + num(t) + " arrival cdf nonincreasing in n", monotone));
  }
  for (int n = 1; n <= c.n_max; ++n) {
    mass.push_back({{"n", n}, {"total_mass", arrival_total_mass(rate, n)}});
  }
  o.extra["total_mass"] = mass;
  return o;
}

Outcome do_governing(const ExperimentConfig& c, const RateFunction& rate, std::string& op) {
  Outcome o;
  o.table.columns = {"x", "t", "lhs", "rhs", "residual"};
  const double top = *std::max_element(c.times.begin(), c.times.end());
  std::vector<double> grid(static_cast<std::size_t>(c.grid_points) + 1);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    grid[k] = top * static_cast<double>(k) / static_cast<double>(c.grid_points);
  }
  const double tol = c.residual_tol > 0.0 ? c.residual_tol : (rate.is_constant() ? 5e-3 : 1e-2);
  const int x_top = c.x_max >= 0 ? c.x_max : 3;
  for (int x = 0; x <= x_top; ++x) {
    op = "governing_residual";
    const auto g = governing_residual(c.alpha, rate, x, c.v, grid, c.tolerances, c.workers);
    for (std::size_t i = 0; i < g.times.size(); ++i) {
      o.table.rows.push_back(
          {static_cast<std::int64_t>(x), g.times[i], g.lhs[i], g.rhs[i], g.residual[i]});
    }
    const double m = g.max_abs();
    o.checks.push_back(make_check("x=" + std::to_string(x) + " max |residual| < " + num(tol),
                                  m < tol, "max |residual| " + fmt_sci(m)));
  }
  o.extra["residual_tol"] = tol;
  return o;
}

Outcome do_cox(const ExperimentConfig& c, std::string& op) {
  Outcome o;
  o.table.columns = {"kind", "arg", "lhs", "rhs", "deviation"};
  op = "cox_identity_check";
  const auto r = cox_identity_check(c.alpha, c.times, c.s_values, c.tolerances);
  for (std::size_t i = 0; i < r.t_values.size(); ++i) {
    o.table.rows.push_back({std::string("kernel"), r.t_values[i], r.kernel_transform[i],
                            r.ml_value[i], std::abs(r.kernel_transform[i] - r.ml_value[i])});
  }
  for (std::size_t i = 0; i < r.s_values.size(); ++i) {
    o.table.rows.push_back({std::string("interarrival"), r.s_values[i], r.density_transform[i],
                            r.closed_form[i],
                            std::abs(r.density_transform[i] - r.closed_form[i])});
  }
  o.checks.push_back(make_check("laplace-identity max_dev < 1e-6", r.max_dev_t < 1e-6,
                                "max_dev " + fmt_sci(r.max_dev_t)));
  o.checks.push_back(make_check("interarrival-transform max_dev < 1e-5", r.max_dev_s < 1e-5,
                                "max_dev " + fmt_sci(r.max_dev_s)));
  return o;
}

void write_summary(const std::filesystem::path& dir, const ExperimentConfig& c,
                   const std::vector<Check>& checks, const std::string& failure) {
  std::ostringstream s;
  s << "fnpp " << kVersion << " " << to_string(c.command) << "\n";
  for (const auto& ch : checks) {
    s << ch.name << ": " << (ch.passed ? "PASS" : "FAIL") << "\n";
    if (!ch.detail.empty()) s << "  " << ch.detail << "\n";
  }
  if (!failure.empty()) s << failure << "\n";
  write_file(dir / "summary.txt", s.str());
}

}  // namespace

std::string to_string(Command c) {
  switch (c) {
    case Command::Simulate: return "simulate";
    case Command::Pmf: return "pmf";
    case Command::Moments: return "moments";
    case Command::Covariance: return "covariance";
    case Command::Arrivals: return "arrivals";
    case Command::VerifyGoverning: return "verify-governing";
    case Command::VerifyCox: return "verify-cox";
  }
  return "unknown";
}

Command parse_command(const std::string& name) {
  for (auto c : {Command::Simulate, Command::Pmf, Command::Moments, Command::Covariance,
                 Command::Arrivals, Command::VerifyGoverning, Command::VerifyCox}) {
    if (to_string(c) == name) return c;
  }
  throw ConfigError("command", "unknown command '" + name + "'");
}

void ExperimentConfig::validate() const {
  auto need = [](bool ok, const char* field, const std::string& what) {
    if (!ok) throw ConfigError(field, what);
  };
  const bool uses_alpha = !(command == Command::Simulate && process == "npp");
  if (uses_alpha) need(alpha > 0.0 && alpha < 1.0, "alpha", "must lie in (0, 1), got " + num(alpha));
  need(!times.empty(), "t", "at least one time is required");
  for (double t : times) {
    const bool ok = command == Command::VerifyCox ? t >= 0.0 : t > 0.0;
    need(ok && std::isfinite(t), "t", "times must be positive and finite, got " + num(t));
  }
  need(horizon >= 0.0 && std::isfinite(horizon), "horizon",
       "must be >= 0 (0 means max t), got " + num(horizon));
  need(n_paths >= 2, "n-paths", "must be at least 2");
  if (command == Command::Covariance) need(n_paths >= 1000, "n-paths", "covariance needs at least 1000 paths");
  need(x_max >= -1, "x-max", "must be >= 0 (or -1 for automatic)");
  need(tolerances.abs_tol > 0.0, "abs-tol", "must be positive");
  need(tolerances.rel_tol > 0.0, "rel-tol", "must be positive");
  need(tolerances.max_terms >= 1, "max-terms", "must be >= 1");
  need(!output_dir.empty(), "out", "must not be empty");
  need(process == "fnpp" || process == "fhpp" || process == "npp", "process",
       "must be fnpp, fhpp or npp");
  need(backend == "exact" || backend == "path", "backend", "must be exact or path");
  need(backend == "exact" || process == "fnpp", "backend", "the path backend simulates the fnpp only");
  need(grid_step >= 0.0, "grid-step", "must be positive (or 0 for automatic)");
  need(v >= 0.0, "v", "must be >= 0");
  need(max_order >= 1 && max_order <= 26, "max-order", "must lie in 1..26");
  need(n_max >= 1, "n-max", "must be >= 1");
  need(grid_points >= 2, "grid-points", "must be >= 2");
  need(residual_tol >= 0.0, "residual-tol", "must be >= 0");
  for (double s : s_values) need(s > 0.0, "s", "transform arguments must be positive");
  RateFunction r = [&] {
    try {
      return parse_rate_spec(rate);
    } catch (const ParseError& e) {
      throw ConfigError("rate", e.what());
    }
  }();
  if (command == Command::Simulate && process == "fhpp") {
    need(r.is_constant(), "rate", "process fhpp needs a constant rate");
  }
}

RawConfig parse_config_text(const std::string& text) {
  RawConfig raw;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno), "expected key=value");
    }
    raw[trim(line.substr(0, eq))].push_back(trim(line.substr(eq + 1)));
  }
  return raw;
}

ExperimentConfig make_config(Command command, const RawConfig& raw) {
  ExperimentConfig c;
  c.command = command;
  for (const auto& [key, vals] : raw) {
    if (!known_keys().count(key)) throw ConfigError(key, "unknown key");
    if (vals.empty()) throw ConfigError(key, "missing value");
    if (key != "t" && key != "s" && vals.size() > 1) throw ConfigError(key, "given more than once");
  }
  auto one = [&](const char* key) -> const std::string* {
    const auto it = raw.find(key);
    return it == raw.end() ? nullptr : &it->second.back();
  };
  auto int_in = [&](const char* key, std::int64_t lo, std::int64_t hi) {
    const auto v = parse_int(key, *one(key));
    if (v < lo || v > hi) throw ConfigError(key, "out of range: " + std::to_string(v));
    return v;
  };
  if (auto* s = one("alpha")) c.alpha = parse_double("alpha", *s);
  if (auto* s = one("rate")) c.rate = *s;
  if (raw.count("t")) c.times = parse_list("t", raw.at("t"));
  if (raw.count("s")) c.s_values = parse_list("s", raw.at("s"));
  if (auto* s = one("horizon")) c.horizon = parse_double("horizon", *s);
  if (one("n-paths")) c.n_paths = int_in("n-paths", 2, 1'000'000'000);
  if (auto* s = one("seed")) c.seed = parse_u64("seed", *s);
  if (one("x-max")) c.x_max = static_cast<int>(int_in("x-max", -1, 100'000));
  if (auto* s = one("abs-tol")) c.tolerances.abs_tol = parse_double("abs-tol", *s);
  if (auto* s = one("rel-tol")) c.tolerances.rel_tol = parse_double("rel-tol", *s);
  if (one("max-terms")) c.tolerances.max_terms = static_cast<int>(int_in("max-terms", 1, 10'000'000));
  if (auto* s = one("out")) c.output_dir = *s;
  if (one("workers")) c.workers = static_cast<unsigned>(int_in("workers", 0, 4096));
  if (auto* s = one("process")) c.process = *s;
  if (auto* s = one("backend")) c.backend = *s;
  if (auto* s = one("grid-step")) c.grid_step = parse_double("grid-step", *s);
  if (auto* s = one("v")) c.v = parse_double("v", *s);
  if (one("max-order")) c.max_order = static_cast<int>(int_in("max-order", 1, 26));
  if (one("n-max")) c.n_max = static_cast<int>(int_in("n-max", 1, 10'000));
  if (one("grid-points")) c.grid_points = static_cast<int>(int_in("grid-points", 2, 1'000'000));
  if (auto* s = one("residual-tol")) c.residual_tol = parse_double("residual-tol", *s);
  if (!one("horizon") && !c.times.empty()) {
    c.horizon = *std::max_element(c.times.begin(), c.times.end());
  }
  c.validate();
  return c;
}

RateFunction parse_rate_spec(const std::string& spec) { return RateParser(spec).parse(); }

ExperimentConfig config_from_meta(const std::string& meta_path) {
  std::ifstream in(meta_path);
  if (!in) throw ConfigError("from-meta", "cannot open '" + meta_path + "'");
  json meta;
  try {
    in >> meta;
  } catch (const json::exception& e) {
    throw ConfigError("from-meta", std::string("invalid JSON: ") + e.what());
  }
  if (!meta.contains("config") || !meta["config"].is_object()) {
    throw ConfigError("from-meta", "no config object in '" + meta_path + "'");
  }
  const json& j = meta["config"];
  ExperimentConfig c;
  try {
    c.command = parse_command(j.at("command").get<std::string>());
    c.alpha = j.at("alpha").get<double>();
    c.rate = j.at("rate").get<std::string>();
    c.times = j.at("t").get<std::vector<double>>();
    c.horizon = j.at("horizon").get<double>();
    c.n_paths = j.at("n-paths").get<std::int64_t>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.x_max = j.at("x-max").get<int>();
    c.tolerances.abs_tol = j.at("abs-tol").get<double>();
    c.tolerances.rel_tol = j.at("rel-tol").get<double>();
    c.tolerances.max_terms = j.at("max-terms").get<int>();
    c.output_dir = j.at("out").get<std::string>();
    c.workers = j.at("workers").get<unsigned>();
    c.process = j.at("process").get<std::string>();
    c.backend = j.at("backend").get<std::string>();
    c.grid_step = j.at("grid-step").get<double>();
    c.v = j.at("v").get<double>();
    c.max_order = j.at("max-order").get<int>();
    c.n_max = j.at("n-max").get<int>();
    c.grid_points = j.at("grid-points").get<int>();
    c.residual_tol = j.at("residual-tol").get<double>();
    c.s_values = j.at("s").get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw ConfigError("from-meta", std::string("malformed config: ") + e.what());
  }
  c.validate();
  return c;
}

int run(const ExperimentConfig& config) {
  namespace fs = std::filesystem;
  try {
    config.validate();
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }
  const fs::path dir(config.output_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    std::cerr << "config error: out: cannot create '" << dir.string() << "'\n";
    return 2;
  }

  json meta;
  meta["config"] = config_json(config);
  meta["library"] = {{"name", "fnpp"}, {"version", kVersion}};
  meta["seeds"] = {{"seed", config.seed},
                   {"stream_ids", {{"first", 0}, {"count", config.n_paths}}}};
  meta["outputs"] = {"result.csv", "result.json", "summary.txt"};
  write_file(dir / "meta.json", meta.dump(2) + "\n");

  std::string op = "setup";
  try {
    const RateFunction rate = parse_rate_spec(config.rate);
    Outcome o;
    switch (config.command) {
      case Command::Simulate: o = do_simulate(config, rate, op); break;
      case Command::Pmf: o = do_pmf(config, rate, op); break;
      case Command::Moments: o = do_moments(config, rate, op); break;
      case Command::Covariance: o = do_covariance(config, rate, op); break;
      case Command::Arrivals: o = do_arrivals(config, rate, op); break;
      case Command::VerifyGoverning: o = do_governing(config, rate, op); break;
      case Command::VerifyCox: o = do_cox(config, op); break;
    }
    write_file(dir / "result.csv", csv_text(o.table));
    json result;
    result["command"] = to_string(config.command);
    result["columns"] = o.table.columns;
    json rows = json::array();
    for (const auto& row : o.table.rows) {
      json r = json::array();
      for (const auto& cell : row) r.push_back(cell_json(cell));
      rows.push_back(std::move(r));
    }
    result["rows"] = std::move(rows);
    json checks = json::array();
    bool all = true;
    for (const auto& ch : o.checks) {
      checks.push_back({{"name", ch.name}, {"passed", ch.passed}, {"detail", ch.detail}});
      all = all && ch.passed;
    }
    result["checks"] = std::move(checks);
    result["extra"] = o.extra;
    write_file(dir / "result.json", result.dump(2) + "\n");
    write_summary(dir, config, o.checks, {});
    return all ? 0 : 1;
  } catch (const ParseError& e) {
    std::cerr << "config error: rate: " << e.what() << "\n";
    write_summary(dir, config, {}, std::string("config error: ") + e.what());
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    write_summary(dir, config, {}, std::string("config error: ") + e.what());
    return 2;
  } catch (const Error& e) {
    const std::string msg = "numerical failure in " + op + ": " + e.what();
    std::cerr << msg << "\n";
    write_summary(dir, config, {}, msg);
    return 3;
  }
}

}  // namespace fnpp
