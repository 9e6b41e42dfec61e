#pragma once

// Multivariate polynomial maps over a graded-lexicographic monomial basis.

#include "polydec/common.hpp"

#include <map>
#include <vector>

namespace polydec {

using Exponent = std::vector<int>;

/// All monomials in m variables of total degree <= d, graded lexicographic
/// with u1 > u2 > ... > um. Entry 0 is the constant monomial.
class MonomialBasis {
 public:
  MonomialBasis() = default;

  int num_vars() const { return m_; }
  int max_degree() const { return d_; }
  /// Number of monomials, binomial(m + d, m).
  Index size() const { return static_cast<Index>(exponents_.size()); }
  const std::vector<Exponent>& exponents() const { return exponents_; }
  const Exponent& operator[](Index q) const { return exponents_[static_cast<std::size_t>(q)]; }

  /// Position of an exponent in the basis, or -1 when absent.
  Index index_of(const Exponent& e) const;

  /// Values of every monomial at u.
  Vector monomials(const Vector& u) const;

  friend bool operator==(const MonomialBasis& a, const MonomialBasis& b) {
    return a.m_ == b.m_ && a.d_ == b.d_;
  }

  friend MonomialBasis basis_enumerate(int m, int d);

 private:
  int m_ = 0;
  int d_ = 0;
  std::vector<Exponent> exponents_;
  std::map<Exponent, Index> lookup_;
};

MonomialBasis basis_enumerate(int m, int d);

/// A vector function f: R^m -> R^n whose component i is coeffs.row(i) in basis order.
class PolyMap {
 public:
  PolyMap() = default;
  PolyMap(MonomialBasis basis, Matrix coeffs);

  /// The zero map.
  static PolyMap zero(const MonomialBasis& basis, int n);

  const MonomialBasis& basis() const { return basis_; }
  const Matrix& coeffs() const { return coeffs_; }
  int num_inputs() const { return basis_.num_vars(); }
  int num_outputs() const { return static_cast<int>(coeffs_.rows()); }
  int degree() const { return basis_.max_degree(); }

 private:
  MonomialBasis basis_;
  Matrix coeffs_;
};

Vector eval(const PolyMap& f, const Vector& u);

/// n x m Jacobian at u by exact differentiation of the coefficient representation.
Matrix jacobian(const PolyMap& f, const Vector& u);

/// The (m n) x ((l-1) n) matrix A(u) with vec(J(u)) = A(u) * coeff_vector(f).
/// Rows follow column-major vec(J): output index fastest.
Matrix a_matrix(const MonomialBasis& basis, int n, const Vector& u);

/// Non-constant coefficients stacked output-major: [f1 (c2..cl), f2 (...), ...].
Vector coeff_vector(const PolyMap& f);

/// Inverse of coeff_vector, given the n constant terms.
PolyMap coeff_insert(const MonomialBasis& basis, int n, const Vector& v, const Vector& constants);

}  // namespace polydec
