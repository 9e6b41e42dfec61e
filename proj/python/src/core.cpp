#include "polydec/bench.hpp"
#include "polydec/decouple.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace polydec;

namespace {

PolyMap make_poly(int m, int d, const Matrix& coeffs) { return PolyMap(basis_enumerate(m, d), coeffs); }

py::dict report_dict(const FitReport& r) {
  py::dict out;
  out["iterations"] = r.iterations;
  out["final_cost"] = r.final_cost;
  out["rel_step"] = r.rel_step;
  out["exit_reason"] = to_string(r.exit_reason);
  out["best_restart"] = r.best_restart;
  out["restart_costs"] = r.restart_costs;
  out["cost_trace"] = r.cost_trace;
  out["warnings"] = r.warnings;
  out["unweighted_residual"] = r.unweighted_residual ? py::cast(*r.unweighted_residual) : py::none();
  out["coeff_rel_error"] = r.coeff_rel_error ? py::cast(*r.coeff_rel_error) : py::none();
  out["constant_abs_error"] = r.constant_abs_error ? py::cast(*r.constant_abs_error) : py::none();
  out["weighted_coeff_error"] = r.weighted_coeff_error ? py::cast(*r.weighted_coeff_error) : py::none();
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, mod) {
  mod.doc() = "Weighted CPD-based decoupling of multivariate polynomials";

  mod.def("basis_enumerate", [](int m, int d) { return basis_enumerate(m, d).exponents(); }, py::arg("m"),
          py::arg("d"), "Exponents of all monomials of degree <= d in graded lexicographic order.");

  py::class_<PolyMap>(mod, "PolyMap")
      .def(py::init(&make_poly), py::arg("m"), py::arg("d"), py::arg("coeffs"),
           "coeffs is n x l, one row per output, columns in basis order.")
      .def_property_readonly("m", &PolyMap::num_inputs)
      .def_property_readonly("n", &PolyMap::num_outputs)
      .def_property_readonly("degree", &PolyMap::degree)
      .def_property_readonly("coeffs", &PolyMap::coeffs)
      .def("__call__", [](const PolyMap& f, const Vector& u) { return eval(f, u); }, py::arg("u"))
      .def("jacobian", [](const PolyMap& f, const Vector& u) { return jacobian(f, u); }, py::arg("u"))
      .def("coeff_vector", [](const PolyMap& f) { return coeff_vector(f); });

  mod.def(
      "a_matrix", [](int m, int d, int n, const Vector& u) { return a_matrix(basis_enumerate(m, d), n, u); },
      py::arg("m"), py::arg("d"), py::arg("n"), py::arg("u"));

  mod.def(
      "sigma_dense",
      [](const PolyMap& f, const Matrix& sigma_f, const std::vector<Vector>& points) {
        return sigma_dense(CoeffCovariance(sigma_f), f.basis(), f.num_outputs(), points).materialize();
      },
      py::arg("f"), py::arg("sigma_f"), py::arg("points"));

  mod.def(
      "svd_split",
      [](const Matrix& sigma, double rel) {
        const SvdSplit s = svd_split(sigma, rel);
        py::dict out;
        out["U1"] = s.U1;
        out["U2"] = s.U2;
        out["D1"] = s.D1;
        out["rank"] = s.rank;
        return out;
      },
      py::arg("sigma"), py::arg("rel_threshold") = kDefaultRankThreshold);

  py::class_<AlsConfig>(mod, "AlsConfig")
      .def(py::init<>())
      .def_readwrite("r", &AlsConfig::r)
      .def_readwrite("n_points", &AlsConfig::n_points)
      .def_readwrite("tol", &AlsConfig::tol_rel_step)
      .def_readwrite("max_iters", &AlsConfig::max_iters)
      .def_readwrite("restarts", &AlsConfig::restarts)
      .def_readwrite("seed", &AlsConfig::seed)
      .def_readwrite("nullspace_scale", &AlsConfig::nullspace_scale)
      .def_property(
          "weight", [](const AlsConfig& c) { return to_string(c.weight); },
          [](AlsConfig& c, const std::string& s) { c.weight = parse_weight_kind(s); })
      .def_property(
          "sampling", [](const AlsConfig& c) { return to_string(c.sampling); },
          [](AlsConfig& c, const std::string& s) { c.sampling = parse_sampling(s); });

  py::class_<DecoupledModel>(mod, "DecoupledModel")
      .def_readonly("W", &DecoupledModel::W)
      .def_readonly("V", &DecoupledModel::V)
      .def_readonly("g", &DecoupledModel::g)
      .def_readonly("degree", &DecoupledModel::degree)
      .def_property_readonly("branches", &DecoupledModel::branches)
      .def("__call__", &DecoupledModel::eval, py::arg("u"));

  mod.def("synthesize_decoupled", &synthesize_decoupled, py::arg("m"), py::arg("n"), py::arg("d"), py::arg("r"),
          py::arg("seed"));
  mod.def(
      "compose", [](const DecoupledModel& model, int m) { return compose(model, basis_enumerate(m, model.degree)); },
      py::arg("model"), py::arg("m"));

  mod.def(
      "decouple",
      [](const PolyMap& f, std::optional<Matrix> sigma_f, const AlsConfig& config) {
        std::optional<CoeffCovariance> cov;
        if (sigma_f) cov.emplace(*sigma_f);
        PipelineResult res;
        {
          py::gil_scoped_release unlocked;
          res = decouple_pipeline(f, cov, config);
        }
        py::dict out = report_dict(res.report);
        out["model"] = res.model;
        out["factors"] = py::make_tuple(res.factors.W, res.factors.V, res.factors.H);
        return out;
      },
      py::arg("f"), py::arg("sigma_f") = py::none(), py::arg("config") = AlsConfig{});

  mod.def(
      "multisine",
      [](int n_samples, int lines, double f_min, double f_max, std::uint64_t seed, double rms) {
        return bench::multisine({n_samples, lines, f_min, f_max, seed, rms});
      },
      py::arg("n_samples"), py::arg("lines"), py::arg("f_min"), py::arg("f_max"), py::arg("seed") = 0,
      py::arg("rms") = 0.0);

  mod.def(
      "run_corr_experiment",
      [](int trials, std::uint64_t seed, int threads) {
        bench::CorrExperimentSpec spec;
        spec.trials = trials;
        spec.seed = seed;
        bench::CorrResult r;
        {
          py::gil_scoped_release unlocked;
          r = bench::run_corr_experiment(spec, threads);
        }
        py::dict out;
        out["rho_25"] = r.rho_25;
        out["rho_38"] = r.rho_38;
        return out;
      },
      py::arg("trials") = 500, py::arg("seed") = 0, py::arg("threads") = 1);
}
