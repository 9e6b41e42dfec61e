#pragma once

// Desk-scale reproductions of two experiments:
//
//  * error correlations of a weighted CPD of random 2x2x2 tensors under an
//    almost diagonal 8x8 weight;
//  * a weighted-vs-unweighted decoupling comparison on a noisy cubic map,
//    judged in coefficient space and through a filter / nonlinearity /
//    filter chain driven by a random-phase multisine.
//
// The filters are stand-ins: first-order discrete low-pass sections with unit
// DC gain, y[t] = p y[t-1] + (1 - p) x[t].

#include "polydec/decouple.hpp"

#include <json.hpp>

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace polydec::bench {

/// The 8x8 weight with t2 <-> t5 coupled by 0.87 and t3, t8 uncoupled.
Matrix default_corr_weight();

struct CorrExperimentSpec {
  Matrix weight = default_corr_weight();
  int trials = 500;
  std::uint64_t seed = 0;
  int r = 2;
  double tol_rel_step = 1e-8;
  int max_iters = 500;
  int restarts = 5;

  /// Throws DomainError unless weight is 8x8 symmetric positive definite.
  void validate() const;
};

struct CorrTrial {
  int trial = 0;
  // e_q = t_q - t^_q with t1..t8 numbering vec(T).
  double e2 = 0.0, e5 = 0.0, e3 = 0.0, e8 = 0.0;
};

struct CorrResult {
  std::vector<CorrTrial> trials;
  double rho_25 = 0.0;  // correlated pair
  double rho_38 = 0.0;  // uncorrelated pair
};

/// Trials run on up to `threads` workers; each trial derives its own seed so
/// the result does not depend on the thread count.
CorrResult run_corr_experiment(const CorrExperimentSpec& spec, int threads = 1);

double pearson(std::span<const double> a, std::span<const double> b);

/// The coupled cubic (m = n = 2, d = 3) of the comparison experiment.
PolyMap sysid_polynomial();
/// Its coefficient covariance exactly as printed (18 x 18, one decimal).
Matrix sysid_covariance_printed();
/// Sum of |entries|, trace, and sum of (i+1)(j+1) S(i,j); guards the transcription.
std::array<double, 3> covariance_checksum(const Matrix& s);
/// Printed matrix symmetrized (asymmetry <= 0.15 allowed) and projected onto the
/// PSD cone; the rounding of the printed values leaves small negative eigenvalues.
CoeffCovariance sysid_covariance();

struct FirstOrderFilter {
  double pole = 0.7;

  void validate() const;
  /// Periodic steady-state response to one period of x.
  Vector apply_periodic(const Vector& x) const;
};

struct MultisineSpec {
  int n_samples = 1024;
  int lines = 32;
  double f_min = 0.005;  // band edges in cycles per sample, inside (0, 0.5)
  double f_max = 0.12;
  std::uint64_t seed = 0;
  double rms = 0.0;  // > 0 rescales the signal to this RMS; 0 keeps unit-amplitude lines
};

/// DFT bins excited by the multisine: `lines` distinct bins spread evenly over the band.
std::vector<int> multisine_bins(const MultisineSpec& spec);

/// One period of sum_k A cos(2 pi k t / n + phi_k), phi_k ~ U[0, 2 pi).
Vector multisine(const MultisineSpec& spec);

struct SysIdSpec {
  PolyMap f = sysid_polynomial();
  CoeffCovariance sigma_f = sysid_covariance();
  MultisineSpec excitation{1024, 32, 0.005, 0.12, 1, 1.0};
  std::array<FirstOrderFilter, 2> input_filters{FirstOrderFilter{0.7}, FirstOrderFilter{0.75}};
  std::array<FirstOrderFilter, 2> output_filters{FirstOrderFilter{0.7}, FirstOrderFilter{0.75}};
  AlsConfig als = default_als();

  static AlsConfig default_als();
  void validate() const;
};

/// Output of input filters -> static map -> output filters, summed over outputs.
Vector simulate_chain(const SysIdSpec& spec, const Vector& excitation,
                      const std::function<Vector(const Vector&)>& static_map);

struct MethodResult {
  WeightKind method = WeightKind::none;
  double rms_output_error = 0.0;      // mean-removed RMS of (model - reference) output
  double coeff_rel_error = 0.0;
  double weighted_coeff_error = 0.0;
  double consistency_error = 0.0;     // composed polynomial vs W g(V^T u) at the fitting points
  DecoupledModel model;
  FitReport report;
  Vector output;
};

struct SysIdResult {
  Vector excitation;
  Vector reference_output;
  std::vector<MethodResult> methods;  // none, element, slice, dense
};

SysIdResult run_sysid_comparison(const SysIdSpec& spec);

/// One-sided magnitude spectrum in dB (20 log10 |X_k| / n), k = 0 .. n/2.
struct Spectrum {
  std::vector<double> frequency;  // normalized, cycles per sample
  std::vector<double> magnitude_db;
};
Spectrum spectrum_db(const Vector& x);

std::string corr_csv(const CorrResult& r);
std::string comparison_csv(const SysIdResult& r);
nlohmann::json scatter_json(const CorrResult& r);
nlohmann::json spectra_json(const SysIdResult& r);

}  // namespace polydec::bench
