#include "polydec/wls.hpp"

namespace polydec {

namespace {

void check_system(const Matrix& a, Index y_size, Index p_size) {
  detail::require(a.rows() == y_size, "design matrix has " + std::to_string(a.rows()) + " rows, data has " +
                                          std::to_string(y_size) + " entries");
  detail::require(a.rows() == p_size, "design matrix has " + std::to_string(a.rows()) +
                                          " rows, permutation has size " + std::to_string(p_size));
}

// D1^{-1/2} U1^T z for z in vec(T) order.
Matrix whiten(const SvdSplit& split, const Matrix& z) {
  return split.D1.cwiseSqrt().cwiseInverse().asDiagonal() * (split.U1.transpose() * z);
}

}  // namespace

Matrix min_norm_solve(const Matrix& a, const Matrix& b, SolveInfo* info) {
  detail::require(a.rows() == b.rows(), "least-squares operands have " + std::to_string(a.rows()) + " and " +
                                            std::to_string(b.rows()) + " rows");
  if (a.cols() == 0) return Matrix(0, b.cols());
  if (a.rows() == 0) {
    if (info) info->rank_deficient = true;
    return Matrix::Zero(a.cols(), b.cols());
  }
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(a);
  if (info && cod.rank() < a.cols()) info->rank_deficient = true;
  return cod.solve(b);
}

Vector weighted_normal_solve(const Matrix& a, const Vector& y, const WeightOperator& weight,
                             const Permutation& p, SolveInfo* info) {
  check_system(a, y.size(), p.size());
  detail::require(weight.size() == p.size(), "weight size " + std::to_string(weight.size()) +
                                                 " does not match system size " + std::to_string(p.size()));
  // (P^T a)^T W (P^T a) x = (P^T a)^T W P^T y
  const Matrix ap = p.apply_transpose_rows(a);
  const Vector yp = p.apply_transpose(y);
  const Matrix wa = weight.apply(ap);
  Matrix normal = ap.transpose() * wa;
  normal = 0.5 * (normal + normal.transpose());
  const Vector rhs = wa.transpose() * yp;

  Eigen::LLT<Matrix> llt(normal);
  if (llt.info() == Eigen::Success) {
    const Vector diag = llt.matrixL().toDenseMatrix().diagonal();
    const double ratio = diag.minCoeff() / diag.maxCoeff();
    if (ratio * ratio > 1e-14) return llt.solve(rhs);
  }
  if (info) info->pinv_fallback = true;
  return min_norm_solve(normal, rhs, info);
}

Matrix stacked_matrix(const Matrix& a, const SvdSplit& split, const Permutation& p, double nullspace_scale) {
  detail::require(a.rows() == split.size() && p.size() == split.size(),
                  "stacked system sizes disagree: design " + std::to_string(a.rows()) + " rows, split " +
                      std::to_string(split.size()) + ", permutation " + std::to_string(p.size()));
  const Matrix ap = p.apply_transpose_rows(a);
  Matrix out(split.size(), a.cols());
  out.topRows(split.rank) = whiten(split, ap);
  out.bottomRows(split.size() - split.rank) = nullspace_scale * (split.U2.transpose() * ap);
  return out;
}

Vector q_transform_solve(const Matrix& a, const Vector& y, const SvdSplit& split, const Permutation& p,
                         SolveInfo* info) {
  check_system(a, y.size(), p.size());
  detail::require(split.size() == p.size(), "split size does not match the system");
  const Matrix qa = whiten(split, p.apply_transpose_rows(a));
  const Vector qy = whiten(split, p.apply_transpose(y));
  return min_norm_solve(qa, qy, info);
}

Vector nullspace_solve(const Matrix& a, const Vector& y, const SvdSplit& split, const Permutation& p,
                       SolveInfo* info) {
  check_system(a, y.size(), p.size());
  detail::require(split.size() == p.size(), "split size does not match the system");
  const Matrix ua = split.U2.transpose() * p.apply_transpose_rows(a);
  const Vector uy = split.U2.transpose() * p.apply_transpose(y);
  return min_norm_solve(ua, uy, info);
}

Vector stacked_solve(const Matrix& a, const Vector& y, const SvdSplit& split, const Permutation& p,
                     double nullspace_scale, SolveInfo* info) {
  check_system(a, y.size(), p.size());
  const Matrix lhs = stacked_matrix(a, split, p, nullspace_scale);
  const Vector yp = p.apply_transpose(y);
  Vector rhs(split.size());
  rhs.head(split.rank) = whiten(split, yp);
  rhs.tail(split.size() - split.rank) = nullspace_scale * (split.U2.transpose() * yp);
  return min_norm_solve(lhs, rhs, info);
}

}  // namespace polydec
