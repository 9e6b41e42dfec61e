#include "polydec/tensor.hpp"

#include <numeric>

namespace polydec {

void check_mode(int mode) {
  if (mode < 1 || mode > 3) throw DomainError("tensor mode must be 1, 2 or 3, got " + std::to_string(mode));
}

Tensor3::Tensor3(TensorDims dims, Vector data) : dims_(dims), data_(std::move(data)) {
  detail::require(dims_.n >= 1 && dims_.m >= 1 && dims_.N >= 1, "tensor dimensions must be positive");
  detail::require(data_.size() == dims_.numel(), "tensor data has " + std::to_string(data_.size()) +
                                                     " entries, dims need " + std::to_string(dims_.numel()));
  if (!data_.allFinite()) throw DomainError("tensor entries must be finite");
}

Tensor3 Tensor3::zeros(TensorDims dims) { return Tensor3(dims, Vector::Zero(dims.numel())); }

Matrix Tensor3::slice(Index k) const {
  const Index len = dims_.n * dims_.m;
  return Eigen::Map<const Matrix>(data_.data() + k * len, dims_.n, dims_.m);
}

const Matrix& CpdFactors::factor(int mode) const {
  check_mode(mode);
  return mode == 1 ? W : (mode == 2 ? V : H);
}

Matrix& CpdFactors::factor(int mode) {
  check_mode(mode);
  return mode == 1 ? W : (mode == 2 ? V : H);
}

void CpdFactors::validate() const {
  detail::require(W.cols() >= 1 && V.cols() == W.cols() && H.cols() == W.cols(),
                  "factor column counts differ: W " + detail::shape(W.rows(), W.cols()) + ", V " +
                      detail::shape(V.rows(), V.cols()) + ", H " + detail::shape(H.rows(), H.cols()));
  if (!W.allFinite() || !V.allFinite() || !H.allFinite()) throw DomainError("factor entries must be finite");
}

Tensor3 stack_jacobians(std::span<const Matrix> slices) {
  detail::require(!slices.empty(), "need at least one slice");
  const Index n = slices.front().rows();
  const Index m = slices.front().cols();
  TensorDims dims{n, m, static_cast<Index>(slices.size())};
  Vector data(dims.numel());
  for (std::size_t k = 0; k < slices.size(); ++k) {
    const Matrix& s = slices[k];
    detail::require(s.rows() == n && s.cols() == m, "slice " + std::to_string(k) + " is " +
                                                        detail::shape(s.rows(), s.cols()) + ", expected " +
                                                        detail::shape(n, m));
    data.segment(static_cast<Index>(k) * n * m, n * m) = Eigen::Map<const Vector>(s.data(), n * m);
  }
  return Tensor3(dims, std::move(data));
}

Tensor3 cpd_reconstruct(const CpdFactors& factors) {
  factors.validate();
  const TensorDims dims = factors.dims();
  // vec(T) = (H kr V kr W) 1, computed slice by slice as W diag(H(k,:)) V^T.
  Vector data(dims.numel());
  const Index len = dims.n * dims.m;
  for (Index k = 0; k < dims.N; ++k) {
    Matrix s = factors.W * factors.H.row(k).asDiagonal() * factors.V.transpose();
    data.segment(k * len, len) = Eigen::Map<const Vector>(s.data(), len);
  }
  return Tensor3(dims, std::move(data));
}

Matrix matricize(const Tensor3& t, int mode) {
  check_mode(mode);
  const auto [n, m, N] = t.dims();
  Matrix out;
  switch (mode) {
    case 1:
      out.resize(n, m * N);
      for (Index k = 0; k < N; ++k)
        for (Index j = 0; j < m; ++j)
          for (Index i = 0; i < n; ++i) out(i, j + k * m) = t(i, j, k);
      break;
    case 2:
      out.resize(m, n * N);
      for (Index k = 0; k < N; ++k)
        for (Index j = 0; j < m; ++j)
          for (Index i = 0; i < n; ++i) out(j, i + k * n) = t(i, j, k);
      break;
    default:
      out.resize(N, n * m);
      for (Index k = 0; k < N; ++k)
        for (Index j = 0; j < m; ++j)
          for (Index i = 0; i < n; ++i) out(k, i + j * n) = t(i, j, k);
      break;
  }
  return out;
}

Matrix khatri_rao(const Matrix& a, const Matrix& b) {
  detail::require(a.cols() == b.cols(), "Khatri-Rao operands have " + std::to_string(a.cols()) + " and " +
                                            std::to_string(b.cols()) + " columns");
  Matrix out(a.rows() * b.rows(), a.cols());
  for (Index q = 0; q < a.cols(); ++q)
    for (Index i = 0; i < a.rows(); ++i) out.col(q).segment(i * b.rows(), b.rows()) = a(i, q) * b.col(q);
  return out;
}

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index j = 0; j < a.cols(); ++j)
    for (Index i = 0; i < a.rows(); ++i)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

Vector vec(const Matrix& m) { return Eigen::Map<const Vector>(m.data(), m.size()); }

Matrix khatri_rao_for(const CpdFactors& factors, int mode) {
  check_mode(mode);
  switch (mode) {
    case 1: return khatri_rao(factors.H, factors.V);
    case 2: return khatri_rao(factors.H, factors.W);
    default: return khatri_rao(factors.V, factors.W);
  }
}

Permutation::Permutation(int mode, TensorDims dims) : mode_(mode), dims_(dims) {
  check_mode(mode);
  const auto [n, m, N] = dims;
  detail::require(n >= 1 && m >= 1 && N >= 1, "permutation dimensions must be positive");
  target_.resize(static_cast<std::size_t>(dims.numel()));
  for (Index k = 0; k < N; ++k)
    for (Index j = 0; j < m; ++j)
      for (Index i = 0; i < n; ++i) {
        const Index s = i + j * n + k * n * m;
        Index t = s;
        if (mode == 1) t = (j + k * m) + i * (m * N);
        else if (mode == 2) t = (i + k * n) + j * (n * N);
        target_[static_cast<std::size_t>(s)] = t;
      }
  source_.resize(target_.size());
  for (std::size_t s = 0; s < target_.size(); ++s) source_[static_cast<std::size_t>(target_[s])] = static_cast<Index>(s);
}

Permutation Permutation::identity(Index size) {
  Permutation p;
  p.mode_ = 3;
  p.dims_ = {size, 1, 1};
  p.target_.resize(static_cast<std::size_t>(size));
  std::iota(p.target_.begin(), p.target_.end(), Index{0});
  p.source_ = p.target_;
  return p;
}

bool Permutation::is_identity() const {
  for (std::size_t s = 0; s < target_.size(); ++s)
    if (target_[s] != static_cast<Index>(s)) return false;
  return true;
}

Vector Permutation::apply(const Vector& x) const {
  detail::require(x.size() == size(), "permutation of size " + std::to_string(size()) +
                                          " applied to vector of length " + std::to_string(x.size()));
  Vector out(x.size());
  for (Index t = 0; t < size(); ++t) out(t) = x(source_[static_cast<std::size_t>(t)]);
  return out;
}

Vector Permutation::apply_transpose(const Vector& x) const {
  detail::require(x.size() == size(), "permutation of size " + std::to_string(size()) +
                                          " applied to vector of length " + std::to_string(x.size()));
  Vector out(x.size());
  for (Index s = 0; s < size(); ++s) out(s) = x(target_[static_cast<std::size_t>(s)]);
  return out;
}

Matrix Permutation::apply_rows(const Matrix& x) const {
  detail::require(x.rows() == size(), "permutation of size " + std::to_string(size()) + " applied to " +
                                          std::to_string(x.rows()) + " rows");
  Matrix out(x.rows(), x.cols());
  for (Index t = 0; t < size(); ++t) out.row(t) = x.row(source_[static_cast<std::size_t>(t)]);
  return out;
}

Matrix Permutation::apply_transpose_rows(const Matrix& x) const {
  detail::require(x.rows() == size(), "permutation of size " + std::to_string(size()) + " applied to " +
                                          std::to_string(x.rows()) + " rows");
  Matrix out(x.rows(), x.cols());
  for (Index s = 0; s < size(); ++s) out.row(s) = x.row(target_[static_cast<std::size_t>(s)]);
  return out;
}

Matrix Permutation::congruence(const Matrix& s) const {
  detail::require(s.rows() == size() && s.cols() == size(),
                  "congruence needs a " + detail::shape(size(), size()) + " matrix");
  Matrix out(size(), size());
  for (Index c = 0; c < size(); ++c) {
    const Index sc = source_[static_cast<std::size_t>(c)];
    for (Index r = 0; r < size(); ++r) out(r, c) = s(source_[static_cast<std::size_t>(r)], sc);
  }
  return out;
}

Permutation Permutation::inverse() const {
  Permutation p = *this;
  std::swap(p.target_, p.source_);
  return p;
}

Permutation permutation(int mode, TensorDims dims) { return Permutation(mode, dims); }

}  // namespace polydec
