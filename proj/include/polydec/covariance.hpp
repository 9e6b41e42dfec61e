#pragma once

// Propagation of the coefficient covariance to the covariance of vec(J), the
// vectorized Jacobian tensor, and the factorizations the weighted solvers need.

#include "polydec/poly.hpp"
#include "polydec/tensor.hpp"

#include <span>
#include <string>
#include <vector>

namespace polydec {

/// Covariance of coeff_vector(f): symmetric PSD, ((l-1) n) square.
class CoeffCovariance {
 public:
  CoeffCovariance() = default;

  /// Symmetrizes when the asymmetry is at most `asym_tol` (relative to the
  /// largest entry), rejects otherwise, and rejects matrices that are not PSD
  /// (min eigenvalue < -1e-8 max eigenvalue).
  explicit CoeffCovariance(const Matrix& matrix, double asym_tol = 1e-10);

  const Matrix& matrix() const { return matrix_; }
  Index size() const { return matrix_.rows(); }

  /// Throws DimensionError unless size() == (l-1) n.
  void check_compatible(const MonomialBasis& basis, int n) const;

 private:
  Matrix matrix_;
};

/// Nearest PSD matrix in Frobenius norm: symmetrize, clip negative eigenvalues.
Matrix project_psd(const Matrix& s);

/// Rows A(u_1); ...; A(u_N) stacked, (m n N) x ((l-1) n).
Matrix stacked_a_matrix(const MonomialBasis& basis, int n, std::span<const Vector> points);

enum class CovarianceKind { element_wise, slice_wise, dense };

/// Covariance of vec(J) in one of three structural forms.
class JacCovariance {
 public:
  static JacCovariance element_wise(TensorDims dims, Vector variances);
  static JacCovariance slice_wise(TensorDims dims, std::vector<Matrix> blocks);
  static JacCovariance dense(TensorDims dims, Matrix a_stack, Matrix sigma_f);

  CovarianceKind kind() const { return kind_; }
  const TensorDims& dims() const { return dims_; }
  /// Element-wise payload: one variance per entry of vec(J).
  const Vector& variances() const { return variances_; }
  /// Slice-wise payload: N symmetric (m n) x (m n) blocks.
  const std::vector<Matrix>& blocks() const { return blocks_; }
  /// Dense payload, kept factored as A_stack * sigma_f * A_stack^T.
  const Matrix& a_stack() const { return a_stack_; }
  const Matrix& sigma_f() const { return sigma_f_; }

  /// The full (m n N) square matrix.
  Matrix materialize() const;

 private:
  CovarianceKind kind_ = CovarianceKind::element_wise;
  TensorDims dims_;
  Vector variances_;
  std::vector<Matrix> blocks_;
  Matrix a_stack_;
  Matrix sigma_f_;
};

JacCovariance sigma_elementwise(const CoeffCovariance& sigma_f, const MonomialBasis& basis, int n,
                                std::span<const Vector> points);
JacCovariance sigma_slicewise(const CoeffCovariance& sigma_f, const MonomialBasis& basis, int n,
                              std::span<const Vector> points);
JacCovariance sigma_dense(const CoeffCovariance& sigma_f, const MonomialBasis& basis, int n,
                          std::span<const Vector> points);

inline constexpr double kDefaultRankThreshold = 1e-10;

/// Sigma = U1 diag(D1) U1^T with [U1 U2] orthogonal and U2 spanning the null space.
struct SvdSplit {
  Matrix U1;       // size x rank
  Matrix U2;       // size x (size - rank)
  Vector D1;       // rank positive singular values, descending
  Index rank = 0;
  double threshold = 0.0;  // absolute cutoff used

  Index size() const { return U1.rows(); }
};

/// Splits a symmetric PSD matrix; singular values <= rel_threshold * sigma_max
/// are treated as zero. Rejects matrices asymmetric beyond 1e-10 (relative).
SvdSplit svd_split(const Matrix& sigma, double rel_threshold = kDefaultRankThreshold);

/// Q = D1^{-1/2} U1^T P^T, so that Q^T Q = pinv(P Sigma P^T).
Matrix q_factor(const SvdSplit& split, const Permutation& p);

/// Linear operator x -> W x for a weight in vec(J) ordering.
class WeightOperator {
 public:
  enum class Kind { diagonal, block_diagonal, dense };

  WeightOperator() = default;
  static WeightOperator diagonal(Vector weights);
  static WeightOperator block_diagonal(std::vector<Matrix> blocks);
  static WeightOperator dense(Matrix weight);
  static WeightOperator identity(Index size) { return diagonal(Vector::Ones(size)); }

  Kind kind() const { return kind_; }
  Index size() const { return size_; }

  Matrix apply(const Matrix& x) const;
  double quadratic(const Vector& r) const;
  Matrix materialize() const;

  /// Notes recorded while the weight was formed (pseudo-inverted blocks, ...).
  const std::vector<std::string>& warnings() const { return warnings_; }
  void add_warning(std::string w) { warnings_.push_back(std::move(w)); }

 private:
  Kind kind_ = Kind::diagonal;
  Index size_ = 0;
  Vector diag_;
  std::vector<Matrix> blocks_;
  Matrix dense_;
  std::vector<std::string> warnings_;
};

/// Weight as the (pseudo-)inverse of an element-wise or slice-wise covariance.
/// With `strict`, a zero variance or singular block raises SingularWeightError;
/// otherwise it is pseudo-inverted and a warning is recorded. Dense covariances
/// are rejected: they go through svd_split instead.
WeightOperator weight_from(const JacCovariance& cov, bool strict = false,
                           double rel_threshold = kDefaultRankThreshold);

}  // namespace polydec
