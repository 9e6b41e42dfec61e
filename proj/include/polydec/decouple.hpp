#pragma once

// Weighted CPD by alternating least squares, and the decoupling pipeline
//
//   f  ->  sample points  ->  Jacobian tensor  ->  covariance of vec(J)
//      ->  (weighted) CPD [[W, V, H]]  ->  univariate branches g_j
//
// giving f(u) ~ W g(V^T u).

#include "polydec/covariance.hpp"
#include "polydec/poly.hpp"
#include "polydec/tensor.hpp"
#include "polydec/wls.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace polydec {

enum class WeightKind { none, element, slice, dense };
enum class Sampling { normal, uniform };
enum class ExitReason { tolerance, max_iters };

std::string to_string(WeightKind kind);
std::string to_string(Sampling sampling);
std::string to_string(ExitReason reason);
WeightKind parse_weight_kind(const std::string& s);
Sampling parse_sampling(const std::string& s);

struct AlsConfig {
  int r = 1;                    // branch count
  int n_points = 0;             // sampling points; 0 selects 10 * l
  double tol_rel_step = 1e-8;   // stop when the relative step drops below this
  int max_iters = 500;          // sweeps per restart
  int restarts = 5;
  std::uint64_t seed = 0;
  WeightKind weight = WeightKind::none;
  Sampling sampling = Sampling::normal;
  double nullspace_scale = 1.0;  // weight of the null-space block in the dense path
  double rank_threshold = kDefaultRankThreshold;
  bool strict_weight = false;    // singular weights are errors instead of pseudo-inverted

  void validate() const;
  int effective_points(const MonomialBasis& basis) const {
    return n_points > 0 ? n_points : static_cast<int>(10 * basis.size());
  }
};

/// The weighted cost used by the ALS engine.
class Weighting {
 public:
  enum class Kind { none, full_rank, dense };

  static Weighting none();
  /// Element-wise, slice-wise or any explicit SPD weight in vec(T) order.
  static Weighting full_rank(WeightOperator weight);
  /// Pseudo-inverse weight of a rank-deficient covariance, plus null-space relations.
  static Weighting dense(SvdSplit split, double nullspace_scale = 1.0);
  static Weighting from_covariance(const JacCovariance& cov, double rel_threshold = kDefaultRankThreshold,
                                   double nullspace_scale = 1.0, bool strict = false);

  Kind kind() const { return kind_; }
  const WeightOperator& weight() const { return weight_; }
  const SvdSplit& split() const { return split_; }
  double nullspace_scale() const { return nullspace_scale_; }

  /// r^T W r for a residual in vec(T) order; ||Q r||^2 for the dense kind.
  double cost(const Vector& residual) const;

 private:
  Kind kind_ = Kind::none;
  WeightOperator weight_;
  SvdSplit split_;
  double nullspace_scale_ = 1.0;
};

struct FitReport {
  int iterations = 0;
  double final_cost = 0.0;
  double rel_step = 0.0;
  ExitReason exit_reason = ExitReason::max_iters;
  int best_restart = 0;
  std::vector<double> restart_costs;
  /// Cost at the initial point and after every sweep of the best restart.
  std::vector<double> cost_trace;
  bool rank_deficient_solve = false;
  std::vector<std::string> warnings;

  // Filled in by decouple_pipeline.
  std::optional<double> unweighted_residual;   // ||vec(J) - vec([[W,V,H]])||^2
  std::optional<double> coeff_rel_error;       // non-constant coefficients, relative 2-norm
  std::optional<double> constant_abs_error;    // constant terms, 2-norm
  std::optional<double> weighted_coeff_error;  // sqrt(dc^T pinv(Sigma_f) dc)
  AlsConfig config;
};

struct AlsResult {
  CpdFactors factors;
  FitReport report;
};

std::vector<Vector> sample_points(int m, int N, Sampling sampling, std::uint64_t seed);

Tensor3 build_jacobian_tensor(const PolyMap& f, std::span<const Vector> points);

/// Exact minimizer of ||T(mode)^T - KR F^T||_F over the factor of `mode`.
Matrix als_update_unweighted(const Tensor3& t, const CpdFactors& factors, int mode, SolveInfo* info = nullptr);

/// B_i = I_dim kron KR_i with y_i = P_i vec(T): the single right-hand-side form.
Matrix als_design_matrix(const CpdFactors& factors, int mode);

/// Weighted update for an SPD weight given in vec(T) order; the weight enters as P W P^T.
Matrix als_update_weighted_fullrank(const Tensor3& t, const CpdFactors& factors, int mode,
                                    const WeightOperator& weight, const Permutation& p, SolveInfo* info = nullptr);

/// Dense-weight update: minimum-norm solution of the whitened system stacked
/// with the null-space relations.
Matrix als_update_weighted_dense(const Tensor3& t, const CpdFactors& factors, int mode, const SvdSplit& split,
                                 const Permutation& p, double nullspace_scale = 1.0, SolveInfo* info = nullptr);

double weighted_cost(const Tensor3& t, const CpdFactors& factors, const Weighting& weighting);

/// sqrt(sum ||dF||_F^2) / sqrt(sum ||F||_F^2) over the three factors.
double relative_step(const CpdFactors& previous, const CpdFactors& current);

/// Best-of-restarts (weighted) ALS. With `initial`, a single run starts there.
AlsResult run_wals(const Tensor3& t, const Weighting& weighting, const AlsConfig& config,
                   const CpdFactors* initial = nullptr);

/// Moves the column norms of W and V into H; the tensor is unchanged.
CpdFactors normalize_factors(CpdFactors factors);

struct DecoupledModel {
  Matrix W;               // n x r
  Matrix V;               // m x r
  std::vector<Vector> g;  // r polynomials, ascending powers, constant first
  int degree = 0;

  int branches() const { return static_cast<int>(W.cols()); }
  /// W g(V^T u)
  Vector eval(const Vector& u) const;
  void validate() const;
};

/// Random W, V (standard normal) and degree-d branches with standard normal
/// coefficients: a model with an exact r-branch decoupling.
DecoupledModel synthesize_decoupled(int m, int n, int d, int r, std::uint64_t seed);

/// Evaluates a univariate polynomial with ascending coefficients.
double polyval(const Vector& coeffs, double x);

DecoupledModel reconstruct_branches(const CpdFactors& factors, const PolyMap& f, std::span<const Vector> points,
                                    int degree);

/// Expands W g(V^T u) into coefficients over `basis`.
PolyMap compose(const DecoupledModel& model, const MonomialBasis& basis);

/// ||dc|| / ||c|| over non-constant coefficients.
double coeff_rel_error(const PolyMap& reference, const PolyMap& model);
double constant_abs_error(const PolyMap& reference, const PolyMap& model);
/// sqrt(dc^T pinv(Sigma_f) dc).
double weighted_coeff_error(const PolyMap& reference, const PolyMap& model, const CoeffCovariance& sigma_f,
                            double rel_threshold = kDefaultRankThreshold);

struct PipelineResult {
  DecoupledModel model;
  FitReport report;
  CpdFactors factors;
  std::vector<Vector> points;
};

/// Sample, stack, weight, decompose, reconstruct. sigma_f is required unless
/// config.weight is none.
PipelineResult decouple_pipeline(const PolyMap& f, const std::optional<CoeffCovariance>& sigma_f,
                                 const AlsConfig& config);

}  // namespace polydec
