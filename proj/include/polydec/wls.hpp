#pragma once

// Weighted least squares with full-rank and rank-deficient weights.
//
// All solvers take the design matrix `a` and data `y` in permuted order (the
// order of vec(T(i)^T) for an ALS factor update) together with the permutation
// P that maps vec(T) into that order. Covariances and weights are always given
// in vec(T) order; the permuted weight is P W P^T.

#include "polydec/covariance.hpp"

namespace polydec {

struct SolveInfo {
  /// The coefficient matrix was numerically rank-deficient; a minimum-norm solution was returned.
  bool rank_deficient = false;
  /// The normal matrix was not positive definite and a pseudo-inverse was used instead.
  bool pinv_fallback = false;
};

/// Minimum-norm least-squares solution via complete orthogonal decomposition.
Matrix min_norm_solve(const Matrix& a, const Matrix& b, SolveInfo* info = nullptr);

/// argmin_x (y - a x)^T (P W P^T) (y - a x) through the normal equations.
Vector weighted_normal_solve(const Matrix& a, const Vector& y, const WeightOperator& weight,
                             const Permutation& p, SolveInfo* info = nullptr);

/// (Q a)^+ (Q y) with Q = D1^{-1/2} U1^T P^T.
Vector q_transform_solve(const Matrix& a, const Vector& y, const SvdSplit& split, const Permutation& p,
                         SolveInfo* info = nullptr);

/// (U2^T P^T a)^+ (U2^T P^T y): the estimate implied by the null-space relations alone.
Vector nullspace_solve(const Matrix& a, const Vector& y, const SvdSplit& split, const Permutation& p,
                       SolveInfo* info = nullptr);

/// Minimum-norm solution of [Q a; s U2^T P^T a] x = [Q y; s U2^T P^T y].
Vector stacked_solve(const Matrix& a, const Vector& y, const SvdSplit& split, const Permutation& p,
                     double nullspace_scale = 1.0, SolveInfo* info = nullptr);

/// The stacked coefficient matrix itself, for diagnostics and tests.
Matrix stacked_matrix(const Matrix& a, const SvdSplit& split, const Permutation& p, double nullspace_scale = 1.0);

}  // namespace polydec
