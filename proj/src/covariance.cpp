#include "polydec/covariance.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace polydec {

namespace {

void check_points(const MonomialBasis& basis, std::span<const Vector> points) {
  detail::require(!points.empty(), "need at least one sampling point");
  for (const Vector& u : points)
    detail::require(u.size() == basis.num_vars(), "sampling point has " + std::to_string(u.size()) +
                                                      " coordinates, basis expects " +
                                                      std::to_string(basis.num_vars()));
}

TensorDims jac_dims(const MonomialBasis& basis, int n, std::span<const Vector> points) {
  return {n, basis.num_vars(), static_cast<Index>(points.size())};
}

// Symmetric pseudo-inverse through the eigen-decomposition.
Matrix symmetric_pinv(const Matrix& s, double rel_threshold, bool* singular) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(s);
  const Vector& values = eig.eigenvalues();
  const double top = values.cwiseAbs().maxCoeff();
  const double cut = rel_threshold * top;
  Vector inv = Vector::Zero(values.size());
  bool deficient = false;
  for (Index q = 0; q < values.size(); ++q) {
    if (values(q) > cut && top > 0.0) inv(q) = 1.0 / values(q);
    else deficient = true;
  }
  if (singular) *singular = deficient;
  return eig.eigenvectors() * inv.asDiagonal() * eig.eigenvectors().transpose();
}

}  // namespace

CoeffCovariance::CoeffCovariance(const Matrix& matrix, double asym_tol) {
  detail::require(matrix.rows() == matrix.cols() && matrix.rows() >= 1,
                  "coefficient covariance must be square, got " + detail::shape(matrix.rows(), matrix.cols()));
  if (!matrix.allFinite()) throw DomainError("coefficient covariance has non-finite entries");
  const double scale = std::max(matrix.cwiseAbs().maxCoeff(), 1e-300);
  const double asym = (matrix - matrix.transpose()).cwiseAbs().maxCoeff();
  if (asym > asym_tol * scale)
    throw DomainError("coefficient covariance is not symmetric (max asymmetry " + std::to_string(asym) + ")");
  matrix_ = 0.5 * (matrix + matrix.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(matrix_, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (lo < -1e-8 * std::max(hi, 0.0))
    throw DomainError("coefficient covariance is not positive semidefinite (min eigenvalue " +
                      std::to_string(lo) + ", max " + std::to_string(hi) + ")");
}

void CoeffCovariance::check_compatible(const MonomialBasis& basis, int n) const {
  const Index expected = (basis.size() - 1) * n;
  detail::require(size() == expected, "coefficient covariance is " + detail::shape(size(), size()) +
                                          ", polynomial (m=" + std::to_string(basis.num_vars()) +
                                          ", d=" + std::to_string(basis.max_degree()) + ", n=" +
                                          std::to_string(n) + ") needs " + detail::shape(expected, expected));
}

Matrix project_psd(const Matrix& s) {
  detail::require(s.rows() == s.cols(), "PSD projection needs a square matrix");
  const Matrix sym = 0.5 * (s + s.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
  const Vector clipped = eig.eigenvalues().cwiseMax(0.0);
  Matrix out = eig.eigenvectors() * clipped.asDiagonal() * eig.eigenvectors().transpose();
  return 0.5 * (out + out.transpose());
}

Matrix stacked_a_matrix(const MonomialBasis& basis, int n, std::span<const Vector> points) {
  check_points(basis, points);
  const Index rows = static_cast<Index>(basis.num_vars()) * n;
  Matrix out(rows * static_cast<Index>(points.size()), (basis.size() - 1) * n);
  for (std::size_t k = 0; k < points.size(); ++k)
    out.middleRows(static_cast<Index>(k) * rows, rows) = a_matrix(basis, n, points[k]);
  return out;
}

JacCovariance JacCovariance::element_wise(TensorDims dims, Vector variances) {
  detail::require(variances.size() == dims.numel(), "element-wise covariance needs " +
                                                        std::to_string(dims.numel()) + " variances");
  if ((variances.array() < 0.0).any()) throw DomainError("variances must be non-negative");
  JacCovariance c;
  c.kind_ = CovarianceKind::element_wise;
  c.dims_ = dims;
  c.variances_ = std::move(variances);
  return c;
}

JacCovariance JacCovariance::slice_wise(TensorDims dims, std::vector<Matrix> blocks) {
  detail::require(static_cast<Index>(blocks.size()) == dims.N, "slice-wise covariance needs one block per slice");
  const Index len = dims.n * dims.m;
  for (const Matrix& b : blocks)
    detail::require(b.rows() == len && b.cols() == len, "slice block must be " + detail::shape(len, len));
  JacCovariance c;
  c.kind_ = CovarianceKind::slice_wise;
  c.dims_ = dims;
  c.blocks_ = std::move(blocks);
  return c;
}

JacCovariance JacCovariance::dense(TensorDims dims, Matrix a_stack, Matrix sigma_f) {
  detail::require(a_stack.rows() == dims.numel(), "stacked A has " + std::to_string(a_stack.rows()) +
                                                      " rows, tensor has " + std::to_string(dims.numel()) +
                                                      " entries");
  detail::require(sigma_f.rows() == a_stack.cols() && sigma_f.cols() == a_stack.cols(),
                  "coefficient covariance does not match stacked A");
  JacCovariance c;
  c.kind_ = CovarianceKind::dense;
  c.dims_ = dims;
  c.a_stack_ = std::move(a_stack);
  c.sigma_f_ = std::move(sigma_f);
  return c;
}

Matrix JacCovariance::materialize() const {
  const Index size = dims_.numel();
  switch (kind_) {
    case CovarianceKind::element_wise:
      return variances_.asDiagonal().toDenseMatrix();
    case CovarianceKind::slice_wise: {
      Matrix out = Matrix::Zero(size, size);
      const Index len = dims_.n * dims_.m;
      for (std::size_t k = 0; k < blocks_.size(); ++k)
        out.block(static_cast<Index>(k) * len, static_cast<Index>(k) * len, len, len) = blocks_[k];
      return out;
    }
    case CovarianceKind::dense: {
      Matrix out = a_stack_ * sigma_f_ * a_stack_.transpose();
      return 0.5 * (out + out.transpose());
    }
  }
  return {};
}

JacCovariance sigma_elementwise(const CoeffCovariance& sigma_f, const MonomialBasis& basis, int n,
                                std::span<const Vector> points) {
  check_points(basis, points);
  sigma_f.check_compatible(basis, n);
  const TensorDims dims = jac_dims(basis, n, points);
  const Index len = dims.n * dims.m;
  Vector variances(dims.numel());
  for (std::size_t k = 0; k < points.size(); ++k) {
    const Matrix a = a_matrix(basis, n, points[k]);
    // Each row of A touches only its own output's coefficient block, so the
    // full quadratic form equals the block-restricted one.
    variances.segment(static_cast<Index>(k) * len, len) =
        (a * sigma_f.matrix()).cwiseProduct(a).rowwise().sum().cwiseMax(0.0);
  }
  return JacCovariance::element_wise(dims, std::move(variances));
}

JacCovariance sigma_slicewise(const CoeffCovariance& sigma_f, const MonomialBasis& basis, int n,
                              std::span<const Vector> points) {
  check_points(basis, points);
  sigma_f.check_compatible(basis, n);
  std::vector<Matrix> blocks;
  blocks.reserve(points.size());
  for (const Vector& u : points) {
    const Matrix a = a_matrix(basis, n, u);
    Matrix b = a * sigma_f.matrix() * a.transpose();
    blocks.push_back(0.5 * (b + b.transpose()));
  }
  return JacCovariance::slice_wise(jac_dims(basis, n, points), std::move(blocks));
}

JacCovariance sigma_dense(const CoeffCovariance& sigma_f, const MonomialBasis& basis, int n,
                          std::span<const Vector> points) {
  check_points(basis, points);
  sigma_f.check_compatible(basis, n);
  return JacCovariance::dense(jac_dims(basis, n, points), stacked_a_matrix(basis, n, points), sigma_f.matrix());
}

SvdSplit svd_split(const Matrix& sigma, double rel_threshold) {
  detail::require(sigma.rows() == sigma.cols() && sigma.rows() >= 1,
                  "SVD split needs a square matrix, got " + detail::shape(sigma.rows(), sigma.cols()));
  if (!(rel_threshold >= 0.0)) throw DomainError("rank threshold must be non-negative");
  const double scale = std::max(sigma.cwiseAbs().maxCoeff(), 1e-300);
  if ((sigma - sigma.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw DomainError("SVD split needs a symmetric matrix");

  // For a symmetric PSD matrix the SVD coincides with the eigen-decomposition;
  // eigenvalues at round-off level (of either sign) fall below the cutoff.
  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (sigma + sigma.transpose()));
  const Vector& values = eig.eigenvalues();
  const Index size = sigma.rows();
  std::vector<Index> order(static_cast<std::size_t>(size));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return values(a) > values(b); });

  const double top = std::max(values.cwiseAbs().maxCoeff(), 0.0);
  SvdSplit split;
  split.threshold = rel_threshold * top;
  Index rank = 0;
  while (rank < size && top > 0.0 && values(order[static_cast<std::size_t>(rank)]) > split.threshold) ++rank;
  split.rank = rank;
  split.U1.resize(size, rank);
  split.U2.resize(size, size - rank);
  split.D1.resize(rank);
  for (Index q = 0; q < size; ++q) {
    const Index src = order[static_cast<std::size_t>(q)];
    if (q < rank) {
      split.U1.col(q) = eig.eigenvectors().col(src);
      split.D1(q) = values(src);
    } else {
      split.U2.col(q - rank) = eig.eigenvectors().col(src);
    }
  }
  return split;
}

Matrix q_factor(const SvdSplit& split, const Permutation& p) {
  detail::require(p.size() == split.size(), "permutation size " + std::to_string(p.size()) +
                                                " does not match split size " + std::to_string(split.size()));
  // (U1^T P^T) = (P U1)^T
  const Matrix pu1 = p.apply_rows(split.U1);
  return split.D1.cwiseSqrt().cwiseInverse().asDiagonal() * pu1.transpose();
}

WeightOperator WeightOperator::diagonal(Vector weights) {
  WeightOperator w;
  w.kind_ = Kind::diagonal;
  w.size_ = weights.size();
  w.diag_ = std::move(weights);
  return w;
}

WeightOperator WeightOperator::block_diagonal(std::vector<Matrix> blocks) {
  WeightOperator w;
  w.kind_ = Kind::block_diagonal;
  Index size = 0;
  for (const Matrix& b : blocks) {
    detail::require(b.rows() == b.cols(), "weight blocks must be square");
    size += b.rows();
  }
  w.size_ = size;
  w.blocks_ = std::move(blocks);
  return w;
}

WeightOperator WeightOperator::dense(Matrix weight) {
  detail::require(weight.rows() == weight.cols(), "dense weight must be square");
  WeightOperator w;
  w.kind_ = Kind::dense;
  w.size_ = weight.rows();
  w.dense_ = std::move(weight);
  return w;
}

Matrix WeightOperator::apply(const Matrix& x) const {
  detail::require(x.rows() == size_, "weight of size " + std::to_string(size_) + " applied to " +
                                         std::to_string(x.rows()) + " rows");
  switch (kind_) {
    case Kind::diagonal:
      return diag_.asDiagonal() * x;
    case Kind::block_diagonal: {
      Matrix out(x.rows(), x.cols());
      Index offset = 0;
      for (const Matrix& b : blocks_) {
        out.middleRows(offset, b.rows()).noalias() = b * x.middleRows(offset, b.rows());
        offset += b.rows();
      }
      return out;
    }
    case Kind::dense:
      return dense_ * x;
  }
  return {};
}

double WeightOperator::quadratic(const Vector& r) const { return r.dot(apply(r).col(0)); }

Matrix WeightOperator::materialize() const {
  switch (kind_) {
    case Kind::diagonal:
      return diag_.asDiagonal().toDenseMatrix();
    case Kind::block_diagonal: {
      Matrix out = Matrix::Zero(size_, size_);
      Index offset = 0;
      for (const Matrix& b : blocks_) {
        out.block(offset, offset, b.rows(), b.cols()) = b;
        offset += b.rows();
      }
      return out;
    }
    case Kind::dense:
      return dense_;
  }
  return {};
}

WeightOperator weight_from(const JacCovariance& cov, bool strict, double rel_threshold) {
  switch (cov.kind()) {
    case CovarianceKind::element_wise: {
      const Vector& var = cov.variances();
      const double top = var.size() > 0 ? var.maxCoeff() : 0.0;
      Vector w(var.size());
      Index zeros = 0;
      for (Index q = 0; q < var.size(); ++q) {
        if (var(q) > rel_threshold * top && var(q) > 0.0) {
          w(q) = 1.0 / var(q);
        } else {
          if (strict) throw SingularWeightError("Jacobian entry " + std::to_string(q) + " has zero variance");
          w(q) = 0.0;
          ++zeros;
        }
      }
      WeightOperator op = WeightOperator::diagonal(std::move(w));
      if (zeros > 0)
        op.add_warning(std::to_string(zeros) + " zero variance(s) given zero weight (pseudo-inverse)");
      return op;
    }
    case CovarianceKind::slice_wise: {
      std::vector<Matrix> inv;
      inv.reserve(cov.blocks().size());
      Index singular_blocks = 0;
      for (std::size_t k = 0; k < cov.blocks().size(); ++k) {
        bool singular = false;
        inv.push_back(symmetric_pinv(cov.blocks()[k], rel_threshold, &singular));
        if (singular) {
          if (strict) throw SingularWeightError("covariance block of slice " + std::to_string(k) + " is singular");
          ++singular_blocks;
        }
      }
      WeightOperator op = WeightOperator::block_diagonal(std::move(inv));
      if (singular_blocks > 0)
        op.add_warning(std::to_string(singular_blocks) + " singular slice block(s) pseudo-inverted");
      return op;
    }
    case CovarianceKind::dense:
      throw DomainError("dense Jacobian covariance is rank-deficient; use svd_split and the Q-transform path");
  }
  return {};
}

}  // namespace polydec
