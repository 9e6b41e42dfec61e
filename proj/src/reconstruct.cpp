#include "polydec/decouple.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace polydec {

double polyval(const Vector& coeffs, double x) {
  double acc = 0.0;
  for (Index p = coeffs.size() - 1; p >= 0; --p) acc = acc * x + coeffs(p);
  return acc;
}

DecoupledModel synthesize_decoupled(int m, int n, int d, int r, std::uint64_t seed) {
  if (m < 1 || n < 1 || d < 1 || r < 1) throw DomainError("synthesis needs m, n, d, r >= 1");
  std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu), static_cast<std::uint32_t>(seed >> 32), 0x85ebca6bu};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto draw = [&](Index rows, Index cols) {
    Matrix x(rows, cols);
    for (Index j = 0; j < cols; ++j)
      for (Index i = 0; i < rows; ++i) x(i, j) = normal(rng);
    return x;
  };
  DecoupledModel model;
  model.W = draw(n, r);
  model.V = draw(m, r);
  model.degree = d;
  for (int j = 0; j < r; ++j) model.g.push_back(draw(d + 1, 1).col(0));
  return model;
}

void DecoupledModel::validate() const {
  detail::require(W.cols() >= 1 && V.cols() == W.cols(), "model needs W and V with equal branch counts");
  detail::require(static_cast<Index>(g.size()) == W.cols(), "model needs one polynomial per branch");
  for (const Vector& gj : g)
    detail::require(gj.size() <= degree + 1, "branch polynomial exceeds the model degree");
}

Vector DecoupledModel::eval(const Vector& u) const {
  detail::require(u.size() == V.rows(), "point has " + std::to_string(u.size()) + " coordinates, model expects " +
                                            std::to_string(V.rows()));
  const Vector x = V.transpose() * u;
  Vector z(x.size());
  for (Index j = 0; j < x.size(); ++j) z(j) = polyval(g[static_cast<std::size_t>(j)], x(j));
  return W * z;
}

DecoupledModel reconstruct_branches(const CpdFactors& factors, const PolyMap& f, std::span<const Vector> points,
                                    int degree) {
  factors.validate();
  if (degree < 1) throw DomainError("branch degree must be >= 1");
  const Index N = static_cast<Index>(points.size());
  const Index r = factors.rank();
  detail::require(factors.H.rows() == N, "H has " + std::to_string(factors.H.rows()) + " rows for " +
                                             std::to_string(N) + " points");
  detail::require(factors.V.rows() == f.num_inputs() && factors.W.rows() == f.num_outputs(),
                  "factor shapes do not match the polynomial map");
  if (N < degree + 1)
    throw ReconstructionError("need at least d + 1 = " + std::to_string(degree + 1) + " sampling points, got " +
                              std::to_string(N));

  DecoupledModel model;
  model.W = factors.W;
  model.V = factors.V;
  model.degree = degree;
  model.g.resize(static_cast<std::size_t>(r));

  for (Index j = 0; j < r; ++j) {
    Vector x(N);
    for (Index k = 0; k < N; ++k) x(k) = factors.V.col(j).dot(points[static_cast<std::size_t>(k)]);

    std::vector<double> sorted(x.data(), x.data() + N);
    std::sort(sorted.begin(), sorted.end());
    const double scale = 1.0 + x.cwiseAbs().maxCoeff();
    Index distinct = 1;
    for (std::size_t k = 1; k < sorted.size(); ++k)
      if (sorted[k] - sorted[k - 1] > 1e-12 * scale) ++distinct;
    if (distinct < degree + 1)
      throw ReconstructionError("branch " + std::to_string(j) + ": only " + std::to_string(distinct) +
                                " distinct projected abscissae (V column may be ~0); need " +
                                std::to_string(degree + 1));

    // Derivative g_j' of degree d-1 fitted to (x_k, H(k, j)).
    Matrix vander(N, degree);
    for (Index k = 0; k < N; ++k) {
      double p = 1.0;
      for (int s = 0; s < degree; ++s) {
        vander(k, s) = p;
        p *= x(k);
      }
    }
    Eigen::JacobiSVD<Matrix> svd(vander);
    const Vector& sv = svd.singularValues();
    const double cond = sv(sv.size() - 1) > 0.0 ? sv(0) / sv(sv.size() - 1) : std::numeric_limits<double>::infinity();
    if (cond > 1e12)
      throw ReconstructionError("branch " + std::to_string(j) + ": Vandermonde condition number " +
                                std::to_string(cond) + " exceeds 1e12; use more sampling points or a lower degree");
    const Vector deriv = vander.colPivHouseholderQr().solve(factors.H.col(j));

    Vector gj = Vector::Zero(degree + 1);
    for (int s = 0; s < degree; ++s) gj(s + 1) = deriv(s) / (s + 1);
    model.g[static_cast<std::size_t>(j)] = gj;
  }

  // Integration constants: min sum_k ||f(u_k) - W (g~(x_k) + kappa)||^2, i.e.
  // W kappa ~ mean_k (f(u_k) - W g~(x_k)).
  Vector mean = Vector::Zero(f.num_outputs());
  for (const Vector& u : points) mean += eval(f, u) - model.eval(u);
  mean /= static_cast<double>(N);
  const Vector kappa = min_norm_solve(model.W, mean);
  for (Index j = 0; j < r; ++j) model.g[static_cast<std::size_t>(j)](0) = kappa(j);
  return model;
}

PolyMap compose(const DecoupledModel& model, const MonomialBasis& basis) {
  model.validate();
  detail::require(model.V.rows() == basis.num_vars(), "model inputs do not match the basis");
  detail::require(model.degree <= basis.max_degree(), "model degree exceeds the basis degree");
  const Index l = basis.size();
  Matrix coeffs = Matrix::Zero(model.W.rows(), l);

  for (int j = 0; j < model.branches(); ++j) {
    const Vector& gj = model.g[static_cast<std::size_t>(j)];
    // power = (v_j^T u)^p over the basis, starting at p = 0.
    Vector power = Vector::Zero(l);
    power(0) = 1.0;
    Vector branch = gj(0) * power;
    for (Index p = 1; p < gj.size(); ++p) {
      Vector next = Vector::Zero(l);
      for (Index q = 0; q < l; ++q) {
        if (power(q) == 0.0) continue;
        Exponent e = basis[q];
        for (int t = 0; t < basis.num_vars(); ++t) {
          ++e[static_cast<std::size_t>(t)];
          const Index target = basis.index_of(e);
          if (target >= 0) next(target) += power(q) * model.V(t, j);
          --e[static_cast<std::size_t>(t)];
        }
      }
      power = std::move(next);
      branch += gj(p) * power;
    }
    coeffs += model.W.col(j) * branch.transpose();
  }
  return PolyMap(basis, std::move(coeffs));
}

double coeff_rel_error(const PolyMap& reference, const PolyMap& model) {
  const Vector a = coeff_vector(reference);
  const Vector b = coeff_vector(model);
  detail::require(a.size() == b.size(), "polynomial maps have different coefficient layouts");
  const double ref = a.norm();
  return ref > 0.0 ? (a - b).norm() / ref : (a - b).norm();
}

double constant_abs_error(const PolyMap& reference, const PolyMap& model) {
  detail::require(reference.coeffs().rows() == model.coeffs().rows(), "polynomial maps have different outputs");
  return (reference.coeffs().col(0) - model.coeffs().col(0)).norm();
}

double weighted_coeff_error(const PolyMap& reference, const PolyMap& model, const CoeffCovariance& sigma_f,
                            double rel_threshold) {
  const Vector dc = coeff_vector(reference) - coeff_vector(model);
  detail::require(dc.size() == sigma_f.size(), "coefficient covariance does not match the polynomial maps");
  const SvdSplit split = svd_split(sigma_f.matrix(), rel_threshold);
  const Vector z = split.D1.cwiseSqrt().cwiseInverse().asDiagonal() * (split.U1.transpose() * dc);
  return z.norm();
}

}  // namespace polydec
