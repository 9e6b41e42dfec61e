#include "support.hpp"

#include "polydec/bench.hpp"

#include <algorithm>
#include <complex>
#include <numbers>
#include <set>

using namespace polydec;
using namespace polydec::bench;
using testing::Rng;

namespace {

std::vector<std::complex<double>> naive_dft(const Vector& x) {
  const Index n = x.size();
  std::vector<std::complex<double>> out(static_cast<std::size_t>(n));
  for (Index k = 0; k < n; ++k) {
    std::complex<double> acc = 0.0;
    for (Index t = 0; t < n; ++t)
      acc += x(t) * std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(k * t) / static_cast<double>(n));
    out[static_cast<std::size_t>(k)] = acc;
  }
  return out;
}

Vector simulate_transient(double pole, const Vector& x, int periods) {
  Vector y(x.size());
  double prev = 0.0;
  for (int p = 0; p < periods; ++p)
    for (Index t = 0; t < x.size(); ++t) {
      prev = pole * prev + (1.0 - pole) * x(t);
      y(t) = prev;
    }
  return y;
}

}  // namespace

TEST_CASE("corr weight: coupled and uncoupled entries, SPD") {
  const Matrix w = default_corr_weight();
  // one-based (2,5) and (3,8)
  CHECK(w(1, 4) == 0.87);
  CHECK(w(4, 1) == 0.87);
  CHECK(w(2, 7) == 0.0);
  CHECK(w(7, 2) == 0.0);
  CHECK_NOTHROW(CorrExperimentSpec{}.validate());
  CorrExperimentSpec bad;
  bad.weight(0, 0) = -1.0;
  CHECK_THROWS_AS(bad.validate(), DomainError);
  bad = CorrExperimentSpec{};
  bad.weight(0, 1) = 0.3;
  CHECK_THROWS_AS(bad.validate(), DomainError);
}

TEST_CASE("pearson: oracle values") {
  const std::vector<double> a{1, 2, 3, 4}, b{2, 4, 6, 8}, c{4, 3, 2, 1}, d{1, -1, 1, -1};
  CHECK(pearson(a, b) == doctest::Approx(1.0));
  CHECK(pearson(a, c) == doctest::Approx(-1.0));
  // sum (a - 2.5)(d) = -1.5 + 0.5 ... : -2 / sqrt(5 * 4)
  CHECK(pearson(a, d) == doctest::Approx(-2.0 / std::sqrt(20.0)));
  CHECK_THROWS_AS(pearson(std::vector<double>{1.0}, std::vector<double>{2.0}), DimensionError);
}

TEST_CASE("corr experiment: reproducible and independent of the thread count") {
  CorrExperimentSpec spec;
  spec.trials = 24;
  spec.seed = 5;
  const CorrResult a = run_corr_experiment(spec, 1);
  const CorrResult b = run_corr_experiment(spec, 1);
  const CorrResult c = run_corr_experiment(spec, 3);
  REQUIRE(a.trials.size() == 24);
  for (std::size_t i = 0; i < a.trials.size(); ++i) {
    CHECK(a.trials[i].e2 == b.trials[i].e2);
    CHECK(a.trials[i].e8 == c.trials[i].e8);
    CHECK(c.trials[i].trial == static_cast<int>(i));
  }
  CHECK(a.rho_25 == c.rho_25);
}

TEST_CASE("corr experiment: the coupled entry pair is driven by the weight") {
  CorrExperimentSpec spec;
  spec.seed = 11;
  const CorrResult weighted = run_corr_experiment(spec, 1);
  spec.weight = Matrix::Identity(8, 8);
  const CorrResult plain = run_corr_experiment(spec, 1);
  CHECK(weighted.rho_25 < -0.6);
  CHECK(std::abs(weighted.rho_25) > 1.5 * std::abs(plain.rho_25));
}

TEST_CASE("corr csv: schema") {
  CorrExperimentSpec spec;
  spec.trials = 3;
  const std::string csv = corr_csv(run_corr_experiment(spec));
  CHECK(csv.rfind("trial,e2,e5,e3,e8\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
}

TEST_CASE("test system: coefficient and covariance spot checks") {
  const PolyMap f = sysid_polynomial();
  const MonomialBasis& b = f.basis();
  CHECK(f.coeffs()(0, b.index_of({2, 1})) == -3.3);
  CHECK(f.coeffs()(1, b.index_of({1, 2})) == -4.9);
  const Matrix s = sysid_covariance_printed();
  CHECK(s(0, 0) == 2.0);
  const auto sums = covariance_checksum(s);
  CHECK(sums[0] == doctest::Approx(25729.8).epsilon(1e-9));
  CHECK(sums[1] == doctest::Approx(4150.2).epsilon(1e-9));
  CHECK(sums[2] == doctest::Approx(323.7).epsilon(1e-6));
  CHECK((s - s.transpose()).cwiseAbs().maxCoeff() <= 0.15 + 1e-12);
  // print rounding leaves it indefinite; the loaded form is projected
  CHECK_THROWS_AS(CoeffCovariance{s}, DomainError);
  const CoeffCovariance c = sysid_covariance();
  CHECK(c.size() == 18);
  CHECK((c.matrix() - s).norm() / s.norm() <= 1e-3);
}

TEST_CASE("first-order filter: unit DC gain, periodic steady state, stability") {
  const FirstOrderFilter filt{0.75};
  const Vector dc = filt.apply_periodic(Vector::Constant(16, 3.0));
  CHECK((dc.array() - 3.0).abs().maxCoeff() <= 1e-12);

  Rng rng(1);
  const Vector x = rng.vector(64);
  const Vector y = filt.apply_periodic(x);
  // after many periods the transient has died out
  const Vector settled = simulate_transient(0.75, x, 200);
  CHECK((y - settled).norm() <= 1e-10 * (1 + y.norm()));

  CHECK_THROWS_AS(FirstOrderFilter{1.0}.validate(), DomainError);
  CHECK_THROWS_AS(FirstOrderFilter{-1.2}.apply_periodic(x), DomainError);
}

TEST_CASE("multisine: one line is a unit cosine") {
  MultisineSpec spec{64, 1, 0.125, 0.125, 3, 0.0};
  const std::vector<int> bins = multisine_bins(spec);
  REQUIRE(bins.size() == 1);
  const Vector x = multisine(spec);
  CHECK(x.cwiseAbs().maxCoeff() <= 1.0 + 1e-12);
  const auto X = naive_dft(x);
  CHECK(std::abs(X[static_cast<std::size_t>(bins[0])]) == doctest::Approx(32.0));
}

TEST_CASE("multisine: flat on excited lines, zero elsewhere, confined to the band") {
  const MultisineSpec spec{256, 12, 0.02, 0.2, 7, 0.0};
  const std::vector<int> bins = multisine_bins(spec);
  CHECK(std::set<int>(bins.begin(), bins.end()).size() == 12);
  for (int k : bins) {
    CHECK(k >= std::ceil(0.02 * 256));
    CHECK(k <= std::floor(0.2 * 256));
  }
  const auto X = naive_dft(multisine(spec));
  std::vector<bool> excited(256, false);
  for (int k : bins) excited[static_cast<std::size_t>(k)] = excited[static_cast<std::size_t>(256 - k)] = true;
  for (std::size_t k = 0; k < 256; ++k) {
    if (excited[k]) CHECK(std::abs(std::abs(X[k]) / 128.0 - 1.0) <= 1e-9);
    else CHECK(std::abs(X[k]) <= 1e-9);
  }
}

TEST_CASE("multisine: determinism, rms scaling, band errors") {
  const MultisineSpec spec{128, 8, 0.05, 0.3, 2, 0.5};
  CHECK(multisine(spec) == multisine(spec));
  MultisineSpec other = spec;
  other.seed = 3;
  CHECK(multisine(other) != multisine(spec));
  const Vector x = multisine(spec);
  CHECK(std::sqrt(x.squaredNorm() / 128.0) == doctest::Approx(0.5));
  CHECK_THROWS_AS(multisine_bins({128, 4, 0.0, 0.3, 0, 0}), DomainError);
  CHECK_THROWS_AS(multisine_bins({128, 4, 0.1, 0.5, 0, 0}), DomainError);
  CHECK_THROWS_AS(multisine_bins({128, 40, 0.1, 0.2, 0, 0}), DomainError);
  CHECK_THROWS_AS(multisine_bins({128, 0, 0.1, 0.2, 0, 0}), DomainError);
}

TEST_CASE("spectrum_db: matches a naive DFT") {
  Rng rng(4);
  const Vector x = rng.vector(50);
  const Spectrum s = spectrum_db(x);
  const auto X = naive_dft(x);
  REQUIRE(s.frequency.size() == 26);
  for (std::size_t k = 0; k < 26; ++k) {
    CHECK(s.frequency[k] == doctest::Approx(static_cast<double>(k) / 50.0));
    CHECK(s.magnitude_db[k] == doctest::Approx(20.0 * std::log10(std::abs(X[k]) / 50.0)).epsilon(1e-9));
  }
}

TEST_CASE("filter chain: zero excitation gives a constant response and zero error") {
  const SysIdSpec spec;
  const Vector zero = Vector::Zero(64);
  const DecoupledModel model = synthesize_decoupled(2, 2, 3, 2, 3);
  const Vector out = simulate_chain(spec, zero, [&](const Vector& u) { return model.eval(u); });
  const double expected = model.eval(Vector::Zero(2)).sum();
  CHECK((out.array() - expected).abs().maxCoeff() <= 1e-12 * (1 + std::abs(expected)));
  const Vector ref = simulate_chain(spec, zero, [&](const Vector& u) { return eval(spec.f, u); });
  const Vector diff = out - ref;
  CHECK((diff.array() - diff.mean()).abs().maxCoeff() <= 1e-12 * (1 + std::abs(expected)));
}

TEST_CASE("sysid comparison: four methods, internally consistent, documented csv") {
  SysIdSpec spec;
  spec.als.seed = 2;
  spec.als.max_iters = 100;
  const SysIdResult r = run_sysid_comparison(spec);
  REQUIRE(r.methods.size() == 4);
  CHECK(r.methods[0].method == WeightKind::none);
  CHECK(r.methods[3].method == WeightKind::dense);
  for (const MethodResult& m : r.methods) {
    CHECK(m.consistency_error <= 1e-12);
    CHECK(std::isfinite(m.rms_output_error));
    CHECK(m.output.size() == spec.excitation.n_samples);
  }
  const std::string csv = comparison_csv(r);
  CHECK(csv.rfind("method,rms_output_error,coeff_rel_error,weighted_coeff_error\n", 0) == 0);
  const auto spectra = spectra_json(r);
  CHECK(spectra["frequency"].size() == static_cast<std::size_t>(spec.excitation.n_samples / 2 + 1));
  CHECK(spectra["error_db"].contains("slice"));
}

TEST_CASE("sysid spec: unstable filters rejected") {
  SysIdSpec spec;
  spec.output_filters[1].pole = 1.5;
  CHECK_THROWS_AS(spec.validate(), DomainError);
}
