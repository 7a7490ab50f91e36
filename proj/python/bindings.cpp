#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "fnpp/accuracy.hpp"
#include "fnpp/analytics.hpp"
#include "fnpp/errors.hpp"
#include "fnpp/experiment.hpp"
#include "fnpp/processes.hpp"
#include "fnpp/random.hpp"
#include "fnpp/rates.hpp"
#include "fnpp/special.hpp"
#include "fnpp/subordinator.hpp"

namespace py = pybind11;
using namespace fnpp;

namespace {

template <class F>
std::vector<double> draws(std::size_t n, std::uint64_t seed, F f) {
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    RngStream rng(seed, i);
    out[i] = f(rng);
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Fractional non-homogeneous Poisson processes";
  m.attr("__version__") = kVersion;

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<DomainError>(m, "DomainError", base);
  py::register_exception<NonConvergence>(m, "NonConvergence", base);
  py::register_exception<QuadratureFailure>(m, "QuadratureFailure", base);
  py::register_exception<OverflowError>(m, "OverflowError", base);
  py::register_exception<OrderError>(m, "OrderError", base);
  py::register_exception<OutOfRange>(m, "OutOfRange", base);
  py::register_exception<GridError>(m, "GridError", base);
  py::register_exception<PathTooShort>(m, "PathTooShort", base);
  py::register_exception<NegativeVariance>(m, "NegativeVariance", base);
  py::register_exception<ParseError>(m, "ParseError", base);
  py::register_exception<ConfigError>(m, "ConfigError", base);

  py::class_<Accuracy>(m, "Accuracy")
      .def(py::init([](double abs_tol, double rel_tol, int max_terms) {
             Accuracy a{abs_tol, rel_tol, max_terms};
             a.validate();
             return a;
           }),
           py::arg("abs_tol") = 1e-13, py::arg("rel_tol") = 1e-11, py::arg("max_terms") = 4000)
      .def_readwrite("abs_tol", &Accuracy::abs_tol)
      .def_readwrite("rel_tol", &Accuracy::rel_tol)
      .def_readwrite("max_terms", &Accuracy::max_terms);

  py::class_<RateFunction>(m, "RateFunction")
      .def_static("constant", &RateFunction::constant, py::arg("lam"))
      .def_static("weibull", &RateFunction::weibull, py::arg("b"), py::arg("c"))
      .def_static("makeham", &RateFunction::makeham, py::arg("c"), py::arg("b"), py::arg("mu"))
      .def_static("tabulated", &RateFunction::tabulated, py::arg("t"), py::arg("cum"),
                  py::arg("source") = "")
      .def_static("from_csv", &RateFunction::from_csv, py::arg("path"))
      .def_static("parse", &parse_rate_spec, py::arg("spec"))
      .def("cumulative", &RateFunction::cumulative, py::arg("t"))
      .def("increment", &RateFunction::increment, py::arg("s"), py::arg("t"))
      .def("intensity", &RateFunction::intensity, py::arg("t"))
      .def("inverse_cumulative", &RateFunction::inverse_cumulative, py::arg("y"))
      .def("supremum", &RateFunction::supremum)
      .def("bounded", &RateFunction::bounded)
      .def("describe", &RateFunction::describe)
      .def("__repr__", [](const RateFunction& r) { return "RateFunction(" + r.describe() + ")"; });

  py::class_<PmfTable>(m, "PmfTable")
      .def_readonly("t", &PmfTable::t)
      .def_readonly("v", &PmfTable::v)
      .def_readonly("x_max", &PmfTable::x_max)
      .def_readonly("probs", &PmfTable::probs)
      .def_readonly("tail_bound", &PmfTable::tail_bound)
      .def("total", &PmfTable::total);

  py::class_<CovarianceEstimate>(m, "CovarianceEstimate")
      .def_readonly("estimate", &CovarianceEstimate::estimate)
      .def_readonly("std_error", &CovarianceEstimate::std_error)
      .def_readonly("mean_term", &CovarianceEstimate::mean_term)
      .def_readonly("cov_term", &CovarianceEstimate::cov_term);

  py::class_<GoverningResidual>(m, "GoverningResidual")
      .def_readonly("times", &GoverningResidual::times)
      .def_readonly("lhs", &GoverningResidual::lhs)
      .def_readonly("rhs", &GoverningResidual::rhs)
      .def_readonly("residual", &GoverningResidual::residual)
      .def("max_abs", &GoverningResidual::max_abs);

  py::class_<CoxReport>(m, "CoxReport")
      .def_readonly("alpha", &CoxReport::alpha)
      .def_readonly("t_values", &CoxReport::t_values)
      .def_readonly("kernel_transform", &CoxReport::kernel_transform)
      .def_readonly("ml_value", &CoxReport::ml_value)
      .def_readonly("s_values", &CoxReport::s_values)
      .def_readonly("density_transform", &CoxReport::density_transform)
      .def_readonly("closed_form", &CoxReport::closed_form)
      .def_readonly("max_dev_t", &CoxReport::max_dev_t)
      .def_readonly("max_dev_s", &CoxReport::max_dev_s);

  const Accuracy dflt{};

  // Special functions.
  // Three-parameter (Prabhakar) form; b = gamma = 1 is the classical E_a.
  m.def(
      "mittag_leffler",
      [](double a, double z, double b, double g, const Accuracy& acc) {
        return mittag_leffler(MLOrder{a, b, g}, z, acc);
      },
      py::arg("a"), py::arg("z"), py::kw_only(), py::arg("b") = 1.0, py::arg("gamma") = 1.0,
      py::arg("acc") = dflt);
  m.def("wright", &wright, py::arg("gamma"), py::arg("beta"), py::arg("z"), py::arg("acc") = dflt);
  m.def("stable_pdf", &stable_pdf, py::arg("alpha"), py::arg("z"), py::arg("acc") = dflt);
  m.def("inv_sub_pdf", &inv_sub_pdf, py::arg("alpha"), py::arg("t"), py::arg("x"),
        py::arg("acc") = dflt);
  m.def("inv_sub_cdf", &inv_sub_cdf, py::arg("alpha"), py::arg("t"), py::arg("u"),
        py::arg("acc") = dflt);
  m.def("cox_spectral_density", &cox_spectral_density, py::arg("alpha"), py::arg("r"));
  m.def("stirling2", &stirling2, py::arg("k"), py::arg("i"));

  // Analytics.
  m.def("npp_pmf", &npp_pmf, py::arg("rate"), py::arg("t"), py::arg("v") = 0.0,
        py::arg("x_max") = 20);
  m.def("fhpp_pmf", &fhpp_pmf, py::arg("alpha"), py::arg("lam"), py::arg("t"), py::arg("x"),
        py::arg("acc") = dflt);
  m.def("suggest_x_max", &suggest_x_max, py::arg("alpha"), py::arg("rate"), py::arg("t"),
        py::arg("v") = 0.0, py::arg("tail") = 1e-8);
  m.def(
      "fnpp_pmf",
      [](double alpha, const RateFunction& rate, double t, double v, int x_max,
         const Accuracy& acc) {
        if (x_max < 0) x_max = suggest_x_max(alpha, rate, t, v);
        return fnpp_pmf(alpha, rate, t, v, x_max, acc);
      },
      py::arg("alpha"), py::arg("rate"), py::arg("t"), py::arg("v") = 0.0, py::arg("x_max") = -1,
      py::arg("acc") = dflt);
  m.def("lambda_moments", &lambda_moments, py::arg("alpha"), py::arg("rate"), py::arg("t"),
        py::arg("k"), py::arg("acc") = dflt);
  m.def("fnpp_mean", &fnpp_mean, py::arg("alpha"), py::arg("rate"), py::arg("t"),
        py::arg("acc") = dflt);
  m.def("fnpp_variance", &fnpp_variance, py::arg("alpha"), py::arg("rate"), py::arg("t"),
        py::arg("acc") = dflt);
  m.def("fnpp_moment", &fnpp_moment, py::arg("alpha"), py::arg("rate"), py::arg("t"),
        py::arg("k"), py::arg("acc") = dflt);
  m.def("npp_covariance", &npp_covariance, py::arg("rate"), py::arg("s"), py::arg("t"));
  m.def(
      "fnpp_covariance",
      [](double alpha, const RateFunction& rate, double s, double t, std::int64_t n_paths,
         double grid_step, std::uint64_t seed, unsigned workers, const Accuracy& acc) {
        py::gil_scoped_release nogil;
        return fnpp_covariance(alpha, rate, s, t, n_paths, grid_step, seed, workers, acc);
      },
      py::arg("alpha"), py::arg("rate"), py::arg("s"), py::arg("t"), py::arg("n_paths"),
      py::arg("grid_step"), py::arg("seed") = 1, py::arg("workers") = 1, py::arg("acc") = dflt);
  m.def("arrival_cdf", &arrival_cdf, py::arg("alpha"), py::arg("rate"), py::arg("n"),
        py::arg("t"), py::arg("acc") = dflt);
  m.def("arrival_total_mass", &arrival_total_mass, py::arg("rate"), py::arg("n"));
  m.def(
      "governing_residual",
      [](double alpha, const RateFunction& rate, int x, double v, std::vector<double> grid,
         const Accuracy& acc, unsigned workers) {
        py::gil_scoped_release nogil;
        return governing_residual(alpha, rate, x, v, grid, acc, workers);
      },
      py::arg("alpha"), py::arg("rate"), py::arg("x"), py::arg("v"), py::arg("t_grid"),
      py::arg("acc") = dflt, py::arg("workers") = 1);
  m.def(
      "cox_identity_check",
      [](double alpha, std::vector<double> t, std::vector<double> s, const Accuracy& acc) {
        return cox_identity_check(alpha, t, s, acc);
      },
      py::arg("alpha"), py::arg("t_values"), py::arg("s_values"), py::arg("acc") = dflt);

  // Sampling. Draw i uses RngStream(seed, i), as in the CLI.
  m.def(
      "sample_stable",
      [](double alpha, std::size_t n, std::uint64_t seed) {
        return draws(n, seed, [&](RngStream& r) { return sample_stable_unit(alpha, r); });
      },
      py::arg("alpha"), py::arg("n"), py::arg("seed") = 1);
  m.def(
      "sample_inverse_subordinator",
      [](double alpha, double t, std::size_t n, std::uint64_t seed) {
        return draws(n, seed, [&](RngStream& r) { return sample_inverse_marginal(alpha, t, r); });
      },
      py::arg("alpha"), py::arg("t"), py::arg("n"), py::arg("seed") = 1);
  m.def(
      "sample_ml_interarrival",
      [](double alpha, double lam, std::size_t n, std::uint64_t seed) {
        return draws(n, seed, [&](RngStream& r) { return sample_ml_interarrival(alpha, lam, r); });
      },
      py::arg("alpha"), py::arg("lam"), py::arg("n"), py::arg("seed") = 1);
  m.def(
      "sample_arrival",
      [](double alpha, const RateFunction& rate, int k, std::size_t n, std::uint64_t seed) {
        return draws(n, seed,
                     [&](RngStream& r) { return sample_fnpp_arrival(alpha, rate, k, r); });
      },
      py::arg("alpha"), py::arg("rate"), py::arg("k"), py::arg("n"), py::arg("seed") = 1);
  m.def(
      "simulate_fnpp",
      [](double alpha, const RateFunction& rate, double horizon, std::uint64_t seed,
         std::uint64_t stream) {
        RngStream rng(seed, stream);
        return simulate_fnpp(alpha, rate, horizon, rng).arrivals;
      },
      py::arg("alpha"), py::arg("rate"), py::arg("horizon"), py::arg("seed") = 1,
      py::arg("stream") = 0);

  // Experiments: keys and values as accepted by the CLI or a config file.
  m.def(
      "run",
      [](const std::string& command, const std::map<std::string, py::object>& options) {
        RawConfig raw;
        for (const auto& [k, v] : options) {
          auto& vals = raw[k];
          if (py::isinstance<py::list>(v) || py::isinstance<py::tuple>(v)) {
            for (auto item : v) vals.push_back(py::str(item));
          } else {
            vals.push_back(py::str(v));
          }
        }
        const auto cfg = make_config(parse_command(command), raw);
        py::gil_scoped_release nogil;
        return run(cfg);
      },
      py::arg("command"), py::arg("options"));
}
