#pragma once

#include "polydec/decouple.hpp"

#include <doctest.h>

#include <random>

namespace testing {

using namespace polydec;

struct Rng {
  std::mt19937_64 engine;
  explicit Rng(std::uint64_t seed) : engine(seed) {}

  double normal() { return std::normal_distribution<double>(0.0, 1.0)(engine); }
  double uniform(double lo = 0.0, double hi = 1.0) { return std::uniform_real_distribution<double>(lo, hi)(engine); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(engine); }

  Matrix matrix(Index rows, Index cols) {
    Matrix x(rows, cols);
    for (Index j = 0; j < cols; ++j)
      for (Index i = 0; i < rows; ++i) x(i, j) = normal();
    return x;
  }
  Vector vector(Index n) { return matrix(n, 1).col(0); }

  // B B^T with B size x rank
  Matrix psd(Index size, Index rank) {
    const Matrix b = matrix(size, rank);
    return b * b.transpose();
  }
  Matrix spd(Index size) { return psd(size, size) + 0.5 * Matrix::Identity(size, size); }

  PolyMap poly(int m, int n, int d) {
    const MonomialBasis basis = basis_enumerate(m, d);
    return PolyMap(basis, matrix(n, basis.size()));
  }

  CpdFactors factors(TensorDims dims, Index r) { return {matrix(dims.n, r), matrix(dims.m, r), matrix(dims.N, r)}; }

  Tensor3 tensor(TensorDims dims) { return Tensor3(dims, vector(dims.numel())); }

  std::vector<Vector> points(int m, int N) {
    std::vector<Vector> p;
    for (int k = 0; k < N; ++k) p.push_back(vector(m));
    return p;
  }
};

inline double rel_diff(const Matrix& a, const Matrix& b) {
  const double scale = std::max(a.norm(), b.norm());
  return scale == 0.0 ? 0.0 : (a - b).norm() / scale;
}

// Moore-Penrose inverse through a full SVD, independent of the library's eigen path.
inline Matrix pinv(const Matrix& a, double rel = 1e-10) {
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vector s = svd.singularValues();
  const double cut = s.size() ? rel * s(0) : 0.0;
  Matrix out = Matrix::Zero(a.cols(), a.rows());
  for (Index i = 0; i < s.size(); ++i)
    if (s(i) > cut) out += svd.matrixV().col(i) * svd.matrixU().col(i).transpose() / s(i);
  return out;
}

inline Index numerical_rank(const Matrix& a, double rel = 1e-10) {
  Eigen::JacobiSVD<Matrix> svd(a);
  const Vector s = svd.singularValues();
  Index r = 0;
  for (Index i = 0; i < s.size(); ++i)
    if (s(i) > rel * s(0)) ++r;
  return r;
}

}  // namespace testing
