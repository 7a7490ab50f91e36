#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "fnpp/errors.hpp"
#include "fnpp/experiment.hpp"
#include "json.hpp"

using namespace fnpp;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::path(FNPP_TEST_TMP) / "experiment" / name;
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExperimentConfig config_for(Command c, const std::string& dir) {
  ExperimentConfig cfg;
  cfg.command = c;
  cfg.output_dir = dir;
  return cfg;
}

}  // namespace

TEST_CASE("command names round-trip") {
  for (auto c : {Command::Simulate, Command::Pmf, Command::Moments, Command::Covariance,
                 Command::Arrivals, Command::VerifyGoverning, Command::VerifyCox}) {
    CHECK(parse_command(to_string(c)) == c);
  }
  CHECK_THROWS_AS(parse_command("plot"), ConfigError);
}

TEST_CASE("config text parsing") {
  const auto raw = parse_config_text("# comment\nalpha = 0.7\n\nt=1\nt = 2 # trailing\nrate=weibull(b=1,c=2)\n");
  REQUIRE(raw.count("alpha"));
  CHECK(raw.at("alpha") == std::vector<std::string>{"0.7"});
  CHECK(raw.at("t") == std::vector<std::string>{"1", "2"});
  CHECK(raw.at("rate") == std::vector<std::string>{"weibull(b=1,c=2)"});
  CHECK_THROWS_AS(parse_config_text("alpha 0.5\n"), ConfigError);

  const auto cfg = make_config(Command::Pmf, raw);
  CHECK(cfg.alpha == 0.7);
  CHECK(cfg.times == std::vector<double>{1.0, 2.0});
  CHECK(cfg.horizon == 2.0);
}

TEST_CASE("strict config validation names the field") {
  auto field_of = [](RawConfig raw) {
    try {
      make_config(Command::Pmf, raw);
    } catch (const ConfigError& e) {
      return e.field();
    }
    return std::string("<none>");
  };
  CHECK(field_of({{"alpha", {"1.5"}}}) == "alpha");
  CHECK(field_of({{"alpha", {"0.5x"}}}) == "alpha");
  CHECK(field_of({{"colour", {"red"}}}) == "colour");
  CHECK(field_of({{"t", {"-1"}}}) == "t");
  CHECK(field_of({{"n-paths", {"0"}}}) == "n-paths");
  CHECK(field_of({{"seed", {"-3"}}}) == "seed");
  CHECK(field_of({{"abs-tol", {"0"}}}) == "abs-tol");
  CHECK(field_of({{"process", {"hawkes"}}}) == "process");
  CHECK(field_of({{"alpha", {"0.5", "0.6"}}}) == "alpha");
  CHECK(field_of({{"alpha", {"0.5"}}}) == "<none>");
}

TEST_CASE("rate spec grammar and error positions") {
  CHECK(parse_rate_spec("constant(lambda=2)").describe() == "constant(lambda=2)");
  CHECK(parse_rate_spec(" weibull( b = 1 , c = 2 ) ").describe() == "weibull(b=1,c=2)");
  CHECK(parse_rate_spec("makeham(mu=0.1,b=1,c=0.5)").cumulative(1.0) > 0.0);
  auto pos_of = [](const std::string& s) {
    try {
      parse_rate_spec(s);
    } catch (const ParseError& e) {
      return static_cast<long>(e.position());
    }
    return -1L;
  };
  CHECK(pos_of("poisson(lambda=1)") == 0);
  CHECK(pos_of("constant(lambda=1") == 17);
  CHECK(pos_of("constant(rate=1)") == 9);
  CHECK(pos_of("weibull(b=1)") == 11);
  CHECK(pos_of("weibull(b=1,c=x)") == 14);
  CHECK(pos_of("constant(lambda=1) extra") == 19);
  CHECK(pos_of("constant(lambda=-1)") == 0);
  CHECK(pos_of("table(file=/nonexistent/rates.csv)") >= 0);
}

TEST_CASE("run writes the four artifacts with stable content") {
  const auto a = scratch("pmf_a");
  const auto b = scratch("pmf_b");
  auto cfg = config_for(Command::Pmf, a.string());
  cfg.times = {0.5, 1.0};
  CHECK(run(cfg) == 0);
  cfg.output_dir = b.string();
  CHECK(run(cfg) == 0);
  for (const char* f : {"meta.json", "result.csv", "result.json", "summary.txt"}) {
    CAPTURE(f);
    REQUIRE(fs::exists(a / f));
    if (std::string(f) != "meta.json") CHECK(slurp(a / f) == slurp(b / f));
  }
  const auto csv = slurp(a / "result.csv");
  CHECK(csv.rfind("t,x,prob\r\n", 0) == 0);
  const auto meta = nlohmann::json::parse(slurp(a / "meta.json"));
  CHECK(meta["library"]["version"] == kVersion);
  CHECK(meta["config"]["alpha"] == 0.5);
  const auto summary = slurp(a / "summary.txt");
  CHECK(summary.find("FAIL") == std::string::npos);
  CHECK(summary.find("PASS") != std::string::npos);
}

TEST_CASE("meta.json reproduces the run") {
  const auto a = scratch("sim_a");
  const auto b = scratch("sim_b");
  auto cfg = config_for(Command::Simulate, a.string());
  cfg.n_paths = 200;
  cfg.rate = "weibull(b=1,c=2)";
  cfg.seed = 77;
  REQUIRE(run(cfg) == 0);
  auto again = config_from_meta((a / "meta.json").string());
  CHECK(again.command == Command::Simulate);
  CHECK(again.seed == 77);
  CHECK(again.rate == "weibull(b=1,c=2)");
  again.output_dir = b.string();
  REQUIRE(run(again) == 0);
  CHECK(slurp(a / "result.csv") == slurp(b / "result.csv"));
  CHECK(slurp(a / "result.json") == slurp(b / "result.json"));
}

TEST_CASE("worker count does not change results") {
  const auto a = scratch("cov_a");
  const auto b = scratch("cov_b");
  auto cfg = config_for(Command::Covariance, a.string());
  cfg.times = {0.5, 1.0};
  cfg.n_paths = 1000;
  cfg.grid_step = 1e-2;
  cfg.workers = 1;
  const int ra = run(cfg);
  cfg.output_dir = b.string();
  cfg.workers = 3;
  const int rb = run(cfg);
  CHECK(ra != 2);
  CHECK(ra == rb);
  REQUIRE(fs::exists(a / "result.csv"));
  CHECK(slurp(a / "result.csv") == slurp(b / "result.csv"));

  const auto c = scratch("sim_w1");
  const auto d = scratch("sim_w4");
  auto sim = config_for(Command::Simulate, c.string());
  sim.n_paths = 500;
  sim.workers = 1;
  REQUIRE(run(sim) == 0);
  sim.output_dir = d.string();
  sim.workers = 4;
  REQUIRE(run(sim) == 0);
  CHECK(slurp(c / "result.csv") == slurp(d / "result.csv"));
}

TEST_CASE("exit codes") {
  auto bad_rate = config_for(Command::Pmf, scratch("bad_rate").string());
  bad_rate.rate = "weibull(b=1)";
  CHECK(run(bad_rate) == 2);
  auto bad_alpha = config_for(Command::Pmf, scratch("bad_alpha").string());
  bad_alpha.alpha = 2.0;
  CHECK(run(bad_alpha) == 2);
  // A tolerance budget too small for the quadrature is a numerical failure.
  auto starved = config_for(Command::Pmf, scratch("starved").string());
  starved.tolerances.max_terms = 1;
  starved.rate = "weibull(b=1,c=2)";
  CHECK(run(starved) == 3);
  const auto summary = slurp(fs::path(starved.output_dir) / "summary.txt");
  CHECK(summary.find("numerical failure in") != std::string::npos);
}

TEST_CASE("every command runs on a small configuration") {
  for (auto c : {Command::Moments, Command::Arrivals, Command::VerifyCox}) {
    auto cfg = config_for(c, scratch("cmd_" + to_string(c)).string());
    cfg.n_max = 3;
    CAPTURE(to_string(c));
    CHECK(run(cfg) == 0);
  }
  auto gov = config_for(Command::VerifyGoverning, scratch("cmd_gov").string());
  gov.grid_points = 100;
  gov.x_max = 1;
  CHECK(run(gov) == 0);
  auto path = config_for(Command::Simulate, scratch("cmd_path").string());
  path.backend = "path";
  path.n_paths = 200;
  path.times = {0.5, 1.0};
  CHECK(run(path) == 0);
  CHECK(slurp(fs::path(path.output_dir) / "result.csv").rfind("path,t,count\r\n", 0) == 0);
}
