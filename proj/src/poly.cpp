#include "polydec/poly.hpp"

#include <cmath>

namespace polydec {

namespace {

// Exponents of total degree `remaining` over variables [var, m), in
// lexicographically decreasing order.
void enumerate_degree(int m, int var, int remaining, Exponent& current,
                      std::vector<Exponent>& out) {
  if (var == m - 1) {
    current[static_cast<std::size_t>(var)] = remaining;
    out.push_back(current);
    return;
  }
  for (int e = remaining; e >= 0; --e) {
    current[static_cast<std::size_t>(var)] = e;
    enumerate_degree(m, var + 1, remaining - e, current, out);
  }
  current[static_cast<std::size_t>(var)] = 0;
}

// powers(j, p) = u_j^p for p in [0, d].
Matrix power_table(const Vector& u, int d) {
  Matrix powers(u.size(), d + 1);
  for (Index j = 0; j < u.size(); ++j) {
    powers(j, 0) = 1.0;
    for (int p = 1; p <= d; ++p) powers(j, p) = powers(j, p - 1) * u(j);
  }
  return powers;
}

void check_point(const MonomialBasis& basis, const Vector& u) {
  detail::require(u.size() == basis.num_vars(),
                  "point has " + std::to_string(u.size()) + " coordinates, basis expects " +
                      std::to_string(basis.num_vars()));
  if (!u.allFinite()) throw DomainError("point has non-finite coordinates");
}

// d(monomial q)/d(u_j) at u, via the power table.
double monomial_derivative(const Exponent& e, const Matrix& powers, Index j) {
  const int ej = e[static_cast<std::size_t>(j)];
  if (ej == 0) return 0.0;
  double value = ej;
  for (Index t = 0; t < powers.rows(); ++t) {
    const int et = e[static_cast<std::size_t>(t)];
    value *= (t == j) ? powers(t, et - 1) : powers(t, et);
  }
  return value;
}

}  // namespace

MonomialBasis basis_enumerate(int m, int d) {
  if (m < 1) throw DomainError("basis needs at least one variable, got m = " + std::to_string(m));
  if (d < 1) throw DomainError("basis needs degree >= 1, got d = " + std::to_string(d));
  MonomialBasis basis;
  basis.m_ = m;
  basis.d_ = d;
  Exponent current(static_cast<std::size_t>(m), 0);
  for (int t = 0; t <= d; ++t) enumerate_degree(m, 0, t, current, basis.exponents_);
  for (std::size_t q = 0; q < basis.exponents_.size(); ++q)
    basis.lookup_.emplace(basis.exponents_[q], static_cast<Index>(q));
  return basis;
}

Index MonomialBasis::index_of(const Exponent& e) const {
  auto it = lookup_.find(e);
  return it == lookup_.end() ? -1 : it->second;
}

Vector MonomialBasis::monomials(const Vector& u) const {
  check_point(*this, u);
  const Matrix powers = power_table(u, d_);
  Vector values(size());
  for (Index q = 0; q < size(); ++q) {
    double v = 1.0;
    const Exponent& e = exponents_[static_cast<std::size_t>(q)];
    for (int j = 0; j < m_; ++j) v *= powers(j, e[static_cast<std::size_t>(j)]);
    values(q) = v;
  }
  return values;
}

PolyMap::PolyMap(MonomialBasis basis, Matrix coeffs) : basis_(std::move(basis)), coeffs_(std::move(coeffs)) {
  detail::require(basis_.size() > 0, "polynomial map needs a non-empty basis");
  detail::require(coeffs_.cols() == basis_.size(),
                  "coefficient matrix has " + std::to_string(coeffs_.cols()) +
                      " columns, basis has " + std::to_string(basis_.size()) + " monomials");
  detail::require(coeffs_.rows() >= 1, "polynomial map needs at least one output");
  if (!coeffs_.allFinite()) throw DomainError("polynomial coefficients must be finite");
}

PolyMap PolyMap::zero(const MonomialBasis& basis, int n) {
  return PolyMap(basis, Matrix::Zero(n, basis.size()));
}

Vector eval(const PolyMap& f, const Vector& u) {
  return f.coeffs() * f.basis().monomials(u);
}

Matrix jacobian(const PolyMap& f, const Vector& u) {
  const MonomialBasis& basis = f.basis();
  check_point(basis, u);
  const Matrix powers = power_table(u, basis.max_degree());
  const int m = basis.num_vars();
  // dmono(q, j) = d(monomial q)/d(u_j)
  Matrix dmono = Matrix::Zero(basis.size(), m);
  for (Index q = 1; q < basis.size(); ++q)
    for (int j = 0; j < m; ++j) dmono(q, j) = monomial_derivative(basis[q], powers, j);
  return f.coeffs() * dmono;
}

Matrix a_matrix(const MonomialBasis& basis, int n, const Vector& u) {
  if (n < 1) throw DomainError("output dimension must be >= 1");
  check_point(basis, u);
  const Matrix powers = power_table(u, basis.max_degree());
  const int m = basis.num_vars();
  const Index block = basis.size() - 1;
  Matrix a = Matrix::Zero(static_cast<Index>(m) * n, block * n);
  for (int j = 0; j < m; ++j) {
    for (Index q = 1; q < basis.size(); ++q) {
      const double dq = monomial_derivative(basis[q], powers, j);
      if (dq == 0.0) continue;
      for (int i = 0; i < n; ++i) a(i + static_cast<Index>(j) * n, i * block + q - 1) = dq;
    }
  }
  return a;
}

Vector coeff_vector(const PolyMap& f) {
  const Index block = f.basis().size() - 1;
  Vector v(block * f.num_outputs());
  for (int i = 0; i < f.num_outputs(); ++i)
    v.segment(i * block, block) = f.coeffs().row(i).tail(block).transpose();
  return v;
}

PolyMap coeff_insert(const MonomialBasis& basis, int n, const Vector& v, const Vector& constants) {
  const Index block = basis.size() - 1;
  detail::require(v.size() == block * n, "coefficient vector has length " + std::to_string(v.size()) +
                                             ", expected " + std::to_string(block * n));
  detail::require(constants.size() == n, "expected " + std::to_string(n) + " constant terms, got " +
                                             std::to_string(constants.size()));
  Matrix coeffs(n, basis.size());
  for (int i = 0; i < n; ++i) {
    coeffs(i, 0) = constants(i);
    coeffs.row(i).tail(block) = v.segment(i * block, block).transpose();
  }
  return PolyMap(basis, std::move(coeffs));
}

}  // namespace polydec
