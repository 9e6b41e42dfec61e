#include "polydec/bench.hpp"
#include "polydec/io.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <thread>

namespace fs = std::filesystem;
using namespace polydec;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitMaxIters = 2;

struct AlsFlags {
  std::optional<int> r, n_points, max_iters, restarts;
  std::optional<double> tol;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> weight, sampling;
  std::string config_path;

  void attach(CLI::App* app, bool with_weight) {
    app->add_option("--r", r, "branch count");
    app->add_option("--n-points", n_points, "sampling points (0: 10 x monomial count)");
    app->add_option("--tol", tol, "relative step tolerance");
    app->add_option("--max-iters", max_iters, "ALS sweeps per restart");
    app->add_option("--restarts", restarts, "random restarts");
    app->add_option("--seed", seed, "RNG seed");
    if (with_weight)
      app->add_option("--weight", weight, "none, element, slice or dense")
          ->check(CLI::IsMember({"none", "element", "slice", "dense"}));
    app->add_option("--sampling", sampling, "normal or uniform")->check(CLI::IsMember({"normal", "uniform"}));
    app->add_option("--config", config_path, "JSON config; flags take precedence");
  }

  // flag > config file > base
  AlsConfig resolve(AlsConfig base) const {
    if (!config_path.empty()) base = io::config_from_json(io::read_json(config_path), base);
    if (r) base.r = *r;
    if (n_points) base.n_points = *n_points;
    if (tol) base.tol_rel_step = *tol;
    if (max_iters) base.max_iters = *max_iters;
    if (restarts) base.restarts = *restarts;
    if (seed) base.seed = *seed;
    if (weight) base.weight = parse_weight_kind(*weight);
    if (sampling) base.sampling = parse_sampling(*sampling);
    base.validate();
    return base;
  }
};

int thread_budget() {
  int threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  if (const char* env = std::getenv("POLYDECOUPLE_THREADS"); env && *env) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (*end != '\0' || cap < 1) throw DomainError(std::string("POLYDECOUPLE_THREADS must be a positive integer, got '") + env + "'");
    threads = std::min<long>(threads, cap);
  }
  return threads;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw std::runtime_error("cannot create output directory '" + dir.string() + "'");
}

void ensure_parent(const fs::path& file) {
  if (file.has_parent_path()) ensure_dir(file.parent_path());
}

int exit_for(ExitReason reason) { return reason == ExitReason::tolerance ? kExitOk : kExitMaxIters; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Decoupling of multivariate polynomials by weighted CPD of the Jacobian tensor"};
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "random polynomial with an exact r-branch decoupling");
  int s_m = 2, s_n = 2, s_d = 3, s_r = 2;
  std::uint64_t s_seed = 0;
  std::string s_out, s_truth;
  synth->add_option("--m", s_m, "inputs");
  synth->add_option("--n", s_n, "outputs");
  synth->add_option("--d", s_d, "degree");
  synth->add_option("--r", s_r, "branches");
  synth->add_option("--seed", s_seed, "RNG seed");
  synth->add_option("--out", s_out, "polynomial JSON")->required();
  synth->add_option("--truth", s_truth, "ground-truth model JSON");

  // decouple
  auto* dec = app.add_subcommand("decouple", "decouple a polynomial, optionally weighted by its coefficient covariance");
  std::string d_poly, d_cov, d_out;
  bool d_psd = false;
  AlsFlags d_flags;
  dec->add_option("--poly", d_poly, "polynomial JSON")->required();
  dec->add_option("--cov", d_cov, "coefficient covariance JSON");
  dec->add_flag("--psd-project", d_psd, "clip the covariance to the PSD cone before use");
  dec->add_option("--out", d_out, "model JSON")->required();
  d_flags.attach(dec, true);

  // corr-exp
  auto* corr = app.add_subcommand("corr-exp", "error correlations of weighted CPDs of random 2x2x2 tensors");
  std::string c_spec, c_out = "corr_out";
  std::optional<int> c_trials, c_r, c_max_iters, c_restarts;
  std::optional<double> c_tol;
  std::optional<std::uint64_t> c_seed;
  corr->add_option("--spec", c_spec, "JSON with any of weight, trials, seed, r, tol, max_iters, restarts");
  corr->add_option("--trials", c_trials, "number of random tensors");
  corr->add_option("--seed", c_seed, "RNG seed");
  corr->add_option("--r", c_r, "CPD rank");
  corr->add_option("--tol", c_tol, "relative step tolerance");
  corr->add_option("--max-iters", c_max_iters, "ALS sweeps per restart");
  corr->add_option("--restarts", c_restarts, "random restarts");
  corr->add_option("--out-dir", c_out, "output directory");

  // sysid-demo
  auto* sysid = app.add_subcommand("sysid-demo", "four-way weighted decoupling of the cubic test system");
  std::string y_out = "sysid_out";
  AlsFlags y_flags;
  y_flags.attach(sysid, false);
  sysid->add_option("--out-dir", y_out, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*synth) {
      const DecoupledModel truth = synthesize_decoupled(s_m, s_n, s_d, s_r, s_seed);
      const PolyMap f = compose(truth, basis_enumerate(s_m, s_d));
      ensure_parent(s_out);
      io::write_json(s_out, io::poly_to_json(f));
      if (!s_truth.empty()) {
        ensure_parent(s_truth);
        io::write_json(s_truth, io::model_to_json(truth));
      }
      return kExitOk;
    }

    if (*dec) {
      const AlsConfig config = d_flags.resolve(AlsConfig{});
      if (config.weight != WeightKind::none && d_cov.empty())
        throw DomainError("--weight " + to_string(config.weight) +
                          " needs the coefficient covariance; pass it with --cov FILE or use --weight none");
      const PolyMap f = io::poly_from_json(io::read_json(d_poly));
      std::optional<CoeffCovariance> cov;
      if (!d_cov.empty()) {
        try {
          cov = io::covariance_from_json(io::read_json(d_cov), f.basis(), f.num_outputs(), d_psd);
        } catch (const io::FormatError& e) {
          std::string msg = e.what();
          if (!d_psd && msg.find("positive semidefinite") != std::string::npos) msg += " (try --psd-project)";
          throw io::FormatError(msg);
        }
      }
      const PipelineResult result = decouple_pipeline(f, cov, config);
      ensure_parent(d_out);
      io::write_json(d_out, io::model_to_json(result.model, result.report));
      for (const std::string& w : result.report.warnings) std::cerr << "warning: " << w << '\n';
      if (result.report.exit_reason == ExitReason::max_iters)
        std::cerr << "note: stopped at max_iters (" << config.max_iters << ") before reaching tol\n";
      return exit_for(result.report.exit_reason);
    }

    if (*corr) {
      bench::CorrExperimentSpec spec;
      if (!c_spec.empty()) {
        const io::Json j = io::read_json(c_spec);
        if (j.contains("weight")) spec.weight = io::matrix_from_json(j["weight"], "corr spec weight");
        if (j.contains("trials")) spec.trials = j["trials"].get<int>();
        if (j.contains("seed")) spec.seed = j["seed"].get<std::uint64_t>();
        if (j.contains("r")) spec.r = j["r"].get<int>();
        if (j.contains("tol")) spec.tol_rel_step = j["tol"].get<double>();
        if (j.contains("max_iters")) spec.max_iters = j["max_iters"].get<int>();
        if (j.contains("restarts")) spec.restarts = j["restarts"].get<int>();
      }
      if (c_trials) spec.trials = *c_trials;
      if (c_seed) spec.seed = *c_seed;
      if (c_r) spec.r = *c_r;
      if (c_tol) spec.tol_rel_step = *c_tol;
      if (c_max_iters) spec.max_iters = *c_max_iters;
      if (c_restarts) spec.restarts = *c_restarts;
      const bench::CorrResult result = bench::run_corr_experiment(spec, thread_budget());
      const fs::path dir(c_out);
      ensure_dir(dir);
      io::write_atomic(dir / "corr_trials.csv", bench::corr_csv(result));
      io::write_json(dir / "corr_scatter.json", bench::scatter_json(result));
      io::write_json(dir / "corr_summary.json",
                     io::Json{{"trials", spec.trials}, {"seed", spec.seed}, {"r", spec.r},
                              {"rho_e2_e5", result.rho_25}, {"rho_e3_e8", result.rho_38}});
      std::cout << "rho(e2,e5) = " << result.rho_25 << "\nrho(e3,e8) = " << result.rho_38 << '\n';
      return kExitOk;
    }

    if (*sysid) {
      bench::SysIdSpec spec;
      spec.als = y_flags.resolve(bench::SysIdSpec::default_als());
      const bench::SysIdResult result = bench::run_sysid_comparison(spec);
      const fs::path dir(y_out);
      ensure_dir(dir);
      io::write_atomic(dir / "sysid_comparison.csv", bench::comparison_csv(result));
      io::write_json(dir / "sysid_spectra.json", bench::spectra_json(result));
      for (const bench::MethodResult& m : result.methods)
        io::write_json(dir / ("model_" + to_string(m.method) + ".json"), io::model_to_json(m.model, m.report));
      std::cout << bench::comparison_csv(result);
      return kExitOk;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}
