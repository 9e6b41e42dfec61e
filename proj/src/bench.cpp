#include "polydec/bench.hpp"

#include <fftw3.h>

#include <atomic>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <thread>

namespace polydec::bench {

namespace {

std::uint64_t derive_seed(std::uint64_t seed, std::uint32_t stream, std::uint32_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu), static_cast<std::uint32_t>(seed >> 32), stream,
                    index};
  std::array<std::uint32_t, 2> out{};
  seq.generate(out.begin(), out.end());
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

constexpr std::uint32_t kTensorStream = 0x51ed270bu;
constexpr std::uint32_t kAlsStream = 0xa5a5a5a5u;
constexpr std::uint32_t kPhaseStream = 0x3c6ef372u;

double mean_removed_rms(const Vector& x) {
  if (x.size() == 0) return 0.0;
  const Vector centered = x.array() - x.mean();
  return std::sqrt(centered.squaredNorm() / static_cast<double>(x.size()));
}

}  // namespace

void CorrExperimentSpec::validate() const {
  if (weight.rows() != 8 || weight.cols() != 8)
    throw DomainError("correlation experiment needs an 8x8 weight, got " + detail::shape(weight.rows(), weight.cols()));
  if ((weight - weight.transpose()).cwiseAbs().maxCoeff() > 1e-12)
    throw DomainError("correlation experiment weight must be symmetric");
  Eigen::LLT<Matrix> llt(weight);
  if (llt.info() != Eigen::Success) throw DomainError("correlation experiment weight must be positive definite");
  if (trials < 2) throw DomainError("need at least two trials to estimate correlations");
  if (r < 1) throw DomainError("rank must be >= 1");
}

double pearson(std::span<const double> a, std::span<const double> b) {
  detail::require(a.size() == b.size() && a.size() >= 2, "correlation needs two equally long samples (>= 2)");
  const auto n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

CorrResult run_corr_experiment(const CorrExperimentSpec& spec, int threads) {
  spec.validate();
  const TensorDims dims{2, 2, 2};
  const Weighting weighting = Weighting::full_rank(WeightOperator::dense(spec.weight));
  CorrResult result;
  result.trials.resize(static_cast<std::size_t>(spec.trials));

  auto run_trial = [&](int trial) {
    std::mt19937_64 rng(derive_seed(spec.seed, kTensorStream, static_cast<std::uint32_t>(trial)));
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    Vector data(8);
    for (Index q = 0; q < 8; ++q) data(q) = uniform(rng);
    const Tensor3 t(dims, data);

    AlsConfig config;
    config.r = spec.r;
    config.tol_rel_step = spec.tol_rel_step;
    config.max_iters = spec.max_iters;
    config.restarts = spec.restarts;
    config.seed = derive_seed(spec.seed, kAlsStream, static_cast<std::uint32_t>(trial));
    const AlsResult fit = run_wals(t, weighting, config);
    const Vector e = t.data() - cpd_reconstruct(fit.factors).data();
    result.trials[static_cast<std::size_t>(trial)] = CorrTrial{trial, e(1), e(4), e(2), e(7)};
  };

  const int workers = std::max(1, std::min(threads, spec.trials));
  if (workers == 1) {
    for (int trial = 0; trial < spec.trials; ++trial) run_trial(trial);
  } else {
    std::atomic<int> next{0};
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (int trial = next++; trial < spec.trials; trial = next++) run_trial(trial);
      });
  }

  std::vector<double> e2, e5, e3, e8;
  for (const CorrTrial& t : result.trials) {
    e2.push_back(t.e2);
    e5.push_back(t.e5);
    e3.push_back(t.e3);
    e8.push_back(t.e8);
  }
  result.rho_25 = pearson(e2, e5);
  result.rho_38 = pearson(e3, e8);
  return result;
}

std::array<double, 3> covariance_checksum(const Matrix& s) {
  double weighted = 0.0;
  for (Index j = 0; j < s.cols(); ++j)
    for (Index i = 0; i < s.rows(); ++i) weighted += static_cast<double>((i + 1) * (j + 1)) * s(i, j);
  return {s.cwiseAbs().sum(), s.trace(), weighted};
}

CoeffCovariance sysid_covariance() {
  const Matrix printed = sysid_covariance_printed();
  if ((printed - printed.transpose()).cwiseAbs().maxCoeff() > 0.15)
    throw DomainError("printed covariance asymmetric beyond the print rounding");
  return CoeffCovariance(project_psd(printed));
}

void FirstOrderFilter::validate() const {
  if (!(std::abs(pole) < 1.0)) throw DomainError("filter pole " + std::to_string(pole) + " is not stable");
}

Vector FirstOrderFilter::apply_periodic(const Vector& x) const {
  validate();
  const Index n = x.size();
  Vector y(n);
  double prev = 0.0;
  for (Index t = 0; t < n; ++t) {
    prev = pole * prev + (1.0 - pole) * x(t);
    y(t) = prev;
  }
  if (n == 0) return y;
  // Periodic steady state: y_ss[t] = y0[t] + p^(t+1) c with c = y_ss[n-1].
  const double c = y(n - 1) / (1.0 - std::pow(pole, static_cast<double>(n)));
  double decay = pole;
  for (Index t = 0; t < n; ++t) {
    y(t) += decay * c;
    decay *= pole;
  }
  return y;
}

std::vector<int> multisine_bins(const MultisineSpec& spec) {
  if (spec.lines < 1) throw DomainError("multisine needs at least one line");
  if (spec.n_samples < 4) throw DomainError("multisine needs at least 4 samples per period");
  if (!(spec.f_min > 0.0 && spec.f_min <= spec.f_max && spec.f_max < 0.5))
    throw DomainError("multisine band must satisfy 0 < f_min <= f_max < 0.5 (Nyquist)");
  const int kmin = std::max(1, static_cast<int>(std::ceil(spec.f_min * spec.n_samples)));
  const int kmax = std::min(static_cast<int>(std::floor(spec.f_max * spec.n_samples)), (spec.n_samples - 1) / 2);
  const int available = kmax - kmin + 1;
  if (available < spec.lines)
    throw DomainError("band holds " + std::to_string(std::max(available, 0)) + " DFT bins, " +
                      std::to_string(spec.lines) + " lines requested");
  std::vector<int> bins;
  for (int q = 0; q < spec.lines; ++q) {
    const double pos = spec.lines == 1 ? 0.0 : static_cast<double>(q) * (available - 1) / (spec.lines - 1);
    bins.push_back(kmin + static_cast<int>(std::lround(pos)));
  }
  return bins;
}

Vector multisine(const MultisineSpec& spec) {
  const std::vector<int> bins = multisine_bins(spec);
  std::mt19937_64 rng(derive_seed(spec.seed, kPhaseStream, 0));
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  Vector x = Vector::Zero(spec.n_samples);
  for (int k : bins) {
    const double phi = phase(rng);
    for (int t = 0; t < spec.n_samples; ++t)
      x(t) += std::cos(2.0 * std::numbers::pi * static_cast<double>(k) * t / spec.n_samples + phi);
  }
  if (spec.rms > 0.0) x *= spec.rms / std::sqrt(x.squaredNorm() / spec.n_samples);
  return x;
}

AlsConfig SysIdSpec::default_als() {
  AlsConfig c;
  c.r = 2;
  c.n_points = 30;
  c.restarts = 5;
  c.max_iters = 500;
  return c;
}

void SysIdSpec::validate() const {
  for (const auto& filt : input_filters) filt.validate();
  for (const auto& filt : output_filters) filt.validate();
  multisine_bins(excitation);
  als.validate();
  detail::require(f.num_inputs() == 2 && f.num_outputs() == 2, "the filter chain needs a 2-input, 2-output map");
  sigma_f.check_compatible(f.basis(), f.num_outputs());
}

Vector simulate_chain(const SysIdSpec& spec, const Vector& excitation,
                      const std::function<Vector(const Vector&)>& static_map) {
  const Vector u1 = spec.input_filters[0].apply_periodic(excitation);
  const Vector u2 = spec.input_filters[1].apply_periodic(excitation);
  Vector y1(excitation.size()), y2(excitation.size());
  Vector u(2);
  for (Index t = 0; t < excitation.size(); ++t) {
    u << u1(t), u2(t);
    const Vector y = static_map(u);
    y1(t) = y(0);
    y2(t) = y(1);
  }
  return spec.output_filters[0].apply_periodic(y1) + spec.output_filters[1].apply_periodic(y2);
}

SysIdResult run_sysid_comparison(const SysIdSpec& spec) {
  spec.validate();
  SysIdResult result;
  result.excitation = multisine(spec.excitation);
  result.reference_output = simulate_chain(spec, result.excitation, [&](const Vector& u) { return eval(spec.f, u); });

  for (WeightKind kind : {WeightKind::none, WeightKind::element, WeightKind::slice, WeightKind::dense}) {
    AlsConfig config = spec.als;
    config.weight = kind;
    PipelineResult fit = decouple_pipeline(spec.f, spec.sigma_f, config);
    const PolyMap composed = compose(fit.model, spec.f.basis());

    MethodResult m;
    m.method = kind;
    m.coeff_rel_error = *fit.report.coeff_rel_error;
    m.weighted_coeff_error = *fit.report.weighted_coeff_error;
    for (const Vector& u : fit.points) {
      const Vector direct = fit.model.eval(u);
      const double scale = std::max(1.0, direct.norm());
      m.consistency_error = std::max(m.consistency_error, (eval(composed, u) - direct).norm() / scale);
    }
    m.output = simulate_chain(spec, result.excitation, [&](const Vector& u) { return fit.model.eval(u); });
    m.rms_output_error = mean_removed_rms(m.output - result.reference_output);
    m.model = std::move(fit.model);
    m.report = std::move(fit.report);
    result.methods.push_back(std::move(m));
  }
  return result;
}

Spectrum spectrum_db(const Vector& x) {
  const int n = static_cast<int>(x.size());
  Spectrum s;
  if (n == 0) return s;
  std::vector<double> in(x.data(), x.data() + n);
  auto* out = fftw_alloc_complex(static_cast<std::size_t>(n / 2 + 1));
  fftw_plan plan = fftw_plan_dft_r2c_1d(n, in.data(), out, FFTW_ESTIMATE);
  fftw_execute(plan);
  for (int k = 0; k <= n / 2; ++k) {
    const double mag = std::hypot(out[k][0], out[k][1]) / n;
    s.frequency.push_back(static_cast<double>(k) / n);
    s.magnitude_db.push_back(20.0 * std::log10(std::max(mag, 1e-300)));
  }
  fftw_destroy_plan(plan);
  fftw_free(out);
  return s;
}

std::string corr_csv(const CorrResult& r) {
  std::ostringstream out;
  out.precision(17);
  out << "trial,e2,e5,e3,e8\n";
  for (const CorrTrial& t : r.trials) out << t.trial << ',' << t.e2 << ',' << t.e5 << ',' << t.e3 << ',' << t.e8 << '\n';
  return out.str();
}

std::string comparison_csv(const SysIdResult& r) {
  std::ostringstream out;
  out.precision(17);
  out << "method,rms_output_error,coeff_rel_error,weighted_coeff_error\n";
  for (const MethodResult& m : r.methods)
    out << to_string(m.method) << ',' << m.rms_output_error << ',' << m.coeff_rel_error << ','
        << m.weighted_coeff_error << '\n';
  return out.str();
}

nlohmann::json scatter_json(const CorrResult& r) {
  nlohmann::json j;
  std::vector<double> e2, e5, e3, e8;
  for (const CorrTrial& t : r.trials) {
    e2.push_back(t.e2);
    e5.push_back(t.e5);
    e3.push_back(t.e3);
    e8.push_back(t.e8);
  }
  j["correlated"] = {{"x", "e2"}, {"y", "e5"}, {"xs", e2}, {"ys", e5}, {"pearson", r.rho_25}};
  j["uncorrelated"] = {{"x", "e3"}, {"y", "e8"}, {"xs", e3}, {"ys", e8}, {"pearson", r.rho_38}};
  return j;
}

nlohmann::json spectra_json(const SysIdResult& r) {
  const Spectrum ref = spectrum_db(r.reference_output);
  nlohmann::json j;
  j["frequency"] = ref.frequency;
  j["output_db"] = ref.magnitude_db;
  j["excitation_db"] = spectrum_db(r.excitation).magnitude_db;
  nlohmann::json errors = nlohmann::json::object();
  for (const MethodResult& m : r.methods) errors[to_string(m.method)] = spectrum_db(m.output - r.reference_output).magnitude_db;
  j["error_db"] = errors;
  return j;
}

}  // namespace polydec::bench
