#pragma once

// Dense order-3 tensors and the CPD kernels built on them.
//
// Indexing is zero-based and column-major throughout: entry (i, j, k) of an
// n x m x N tensor sits at i + j*n + k*n*m of its data vector. Matricization
// follows the Kolda-Bader ordering, so that for T = [[W, V, H]]
//
//   T(1) = W (H kr V)^T,   T(2) = V (H kr W)^T,   T(3) = H (V kr W)^T.

#include "polydec/common.hpp"

#include <array>
#include <span>
#include <vector>

namespace polydec {

struct TensorDims {
  Index n = 0;  // rows of each slice (outputs)
  Index m = 0;  // columns of each slice (inputs)
  Index N = 0;  // number of frontal slices (sampling points)

  Index numel() const { return n * m * N; }
  friend bool operator==(const TensorDims&, const TensorDims&) = default;
};

class Tensor3 {
 public:
  Tensor3() = default;
  Tensor3(TensorDims dims, Vector data);
  static Tensor3 zeros(TensorDims dims);

  const TensorDims& dims() const { return dims_; }
  /// Column-major vectorization vec(T).
  const Vector& data() const { return data_; }

  double operator()(Index i, Index j, Index k) const { return data_(i + j * dims_.n + k * dims_.n * dims_.m); }
  double& operator()(Index i, Index j, Index k) { return data_(i + j * dims_.n + k * dims_.n * dims_.m); }

  /// Frontal slice k as an n x m matrix.
  Matrix slice(Index k) const;

  double frobenius_norm() const { return data_.norm(); }

 private:
  TensorDims dims_;
  Vector data_;
};

/// Factor matrices of a rank-r CPD: T = sum_q W(:,q) o V(:,q) o H(:,q).
struct CpdFactors {
  Matrix W;  // n x r
  Matrix V;  // m x r
  Matrix H;  // N x r

  Index rank() const { return W.cols(); }
  TensorDims dims() const { return {W.rows(), V.rows(), H.rows()}; }
  /// Factor by mode (1 = W, 2 = V, 3 = H).
  const Matrix& factor(int mode) const;
  Matrix& factor(int mode);
  void validate() const;
};

Tensor3 stack_jacobians(std::span<const Matrix> slices);

Tensor3 cpd_reconstruct(const CpdFactors& factors);

/// Mode-1: n x (m N); mode-2: m x (n N); mode-3: N x (n m).
Matrix matricize(const Tensor3& t, int mode);

/// Column-wise Kronecker product, (p q) x r.
Matrix khatri_rao(const Matrix& a, const Matrix& b);

Matrix kron(const Matrix& a, const Matrix& b);

/// Column-major vectorization.
Vector vec(const Matrix& m);

/// The Khatri-Rao product paired with a factor's unfolding:
/// mode 1 -> H kr V, mode 2 -> H kr W, mode 3 -> V kr W.
Matrix khatri_rao_for(const CpdFactors& factors, int mode);

/// Permutation P_mode with P_mode vec(T) = vec(T(mode)^T), stored as an index map.
class Permutation {
 public:
  Permutation() = default;
  Permutation(int mode, TensorDims dims);

  /// Identity permutation on `size` entries.
  static Permutation identity(Index size);

  int mode() const { return mode_; }
  const TensorDims& dims() const { return dims_; }
  Index size() const { return static_cast<Index>(target_.size()); }
  /// target()[s] is the position that entry s of vec(T) moves to.
  const std::vector<Index>& target() const { return target_; }
  /// source()[t] is the entry of vec(T) that lands at position t.
  const std::vector<Index>& source() const { return source_; }
  bool is_identity() const;

  /// P x
  Vector apply(const Vector& x) const;
  /// P^T x
  Vector apply_transpose(const Vector& x) const;
  /// P X (rows permuted)
  Matrix apply_rows(const Matrix& x) const;
  /// P^T X
  Matrix apply_transpose_rows(const Matrix& x) const;
  /// P S P^T by gathering rows and columns.
  Matrix congruence(const Matrix& s) const;

  Permutation inverse() const;

 private:
  int mode_ = 3;
  TensorDims dims_;
  std::vector<Index> target_;
  std::vector<Index> source_;
};

Permutation permutation(int mode, TensorDims dims);

void check_mode(int mode);

}  // namespace polydec
