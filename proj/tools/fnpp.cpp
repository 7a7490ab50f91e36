// Command-line experiment runner.
#include <fstream>
#include <iostream>
#include <map>
#include <utility>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "fnpp/errors.hpp"
#include "fnpp/experiment.hpp"

namespace {

struct Flags {
  std::string config_file;
  std::string from_meta;
  std::vector<std::string> times;
  std::vector<std::string> s_values;
  std::map<std::string, std::string> scalars;
};

const char* kScalarFlags[] = {"alpha",     "rate",      "horizon",     "n-paths",
                              "seed",      "x-max",     "abs-tol",     "rel-tol",
                              "max-terms", "out",       "workers",     "process",
                              "backend",   "grid-step", "v",           "max-order",
                              "n-max",     "grid-points", "residual-tol"};

void add_flags(CLI::App* sub, Flags& f) {
  for (const char* name : kScalarFlags) {
    sub->add_option_function<std::string>(
        std::string("--") + name, [&f, name](const std::string& v) { f.scalars[name] = v; },
        name);
  }
  sub->add_option("--t", f.times, "evaluation time (repeatable)");
  sub->add_option("--s", f.s_values, "Laplace argument for verify-cox (repeatable)");
  sub->add_option("--config", f.config_file, "key=value config file (flags override it)");
  sub->add_option("--from-meta", f.from_meta, "re-run the configuration stored in a meta.json");
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw fnpp::ConfigError("config", "cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fractional non-homogeneous Poisson process experiments"};
  app.set_version_flag("--version", std::string("fnpp ") + fnpp::kVersion);
  app.require_subcommand(1);
  Flags flags;
  const std::pair<const char*, const char*> commands[] = {
      {"simulate", "sample paths and compare counts with the analytic pmf and moments"},
      {"pmf", "marginal probabilities P(N(t) = x) by quadrature"},
      {"moments", "mean, variance and higher moments"},
      {"covariance", "Cov(N(s), N(t)) over all pairs of --t values"},
      {"arrivals", "distribution of the n-th arrival time"},
      {"verify-governing", "residual of the fractional governing equation"},
      {"verify-cox", "Laplace-transform identities of the Cox representation"}};
  for (const auto& [name, help] : commands) add_flags(app.add_subcommand(name, help), flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    const std::string command = app.get_subcommands().front()->get_name();
    fnpp::ExperimentConfig config;
    if (!flags.from_meta.empty()) {
      config = fnpp::config_from_meta(flags.from_meta);
      if (config.command != fnpp::parse_command(command)) {
        throw fnpp::ConfigError("from-meta", "meta.json was written by '" +
                                                 fnpp::to_string(config.command) + "'");
      }
      if (flags.scalars.count("out")) config.output_dir = flags.scalars["out"];
      if (flags.scalars.count("workers")) {
        config.workers = static_cast<unsigned>(std::stoul(flags.scalars["workers"]));
      }
    } else {
      fnpp::RawConfig raw;
      if (!flags.config_file.empty()) raw = fnpp::parse_config_text(read_file(flags.config_file));
      for (const auto& [k, v] : flags.scalars) raw[k] = {v};
      if (!flags.times.empty()) raw["t"] = flags.times;
      if (!flags.s_values.empty()) raw["s"] = flags.s_values;
      config = fnpp::make_config(fnpp::parse_command(command), raw);
    }
    return fnpp::run(config);
  } catch (const fnpp::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }
}
