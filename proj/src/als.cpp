#include "polydec/decouple.hpp"

#include <cmath>
#include <limits>
#include <random>

namespace polydec {

namespace {

constexpr std::uint32_t kPointStream = 0x9e3779b9u;
constexpr std::uint32_t kInitStream = 0x7f4a7c15u;

std::mt19937_64 make_rng(std::uint64_t seed, std::uint32_t stream, std::uint32_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu), static_cast<std::uint32_t>(seed >> 32), stream,
                    index};
  return std::mt19937_64(seq);
}

Matrix from_solution(const Vector& x, Index r, Index dim) {
  // x = vec(F^T), F^T is r x dim
  return Eigen::Map<const Matrix>(x.data(), r, dim).transpose();
}

CpdFactors random_factors(TensorDims dims, int r, std::uint64_t seed, int restart) {
  auto rng = make_rng(seed, kInitStream, static_cast<std::uint32_t>(restart));
  std::normal_distribution<double> normal(0.0, 1.0);
  auto draw = [&](Index rows) {
    Matrix m(rows, r);
    for (Index j = 0; j < r; ++j)
      for (Index i = 0; i < rows; ++i) m(i, j) = normal(rng);
    return m;
  };
  CpdFactors f;
  f.W = draw(dims.n);
  f.V = draw(dims.m);
  f.H = draw(dims.N);
  return f;
}

bool finite(const CpdFactors& f) { return f.W.allFinite() && f.V.allFinite() && f.H.allFinite(); }

}  // namespace

std::string to_string(WeightKind kind) {
  switch (kind) {
    case WeightKind::none: return "none";
    case WeightKind::element: return "element";
    case WeightKind::slice: return "slice";
    case WeightKind::dense: return "dense";
  }
  return "none";
}

std::string to_string(Sampling sampling) { return sampling == Sampling::normal ? "normal" : "uniform"; }

std::string to_string(ExitReason reason) { return reason == ExitReason::tolerance ? "tolerance" : "max_iters"; }

WeightKind parse_weight_kind(const std::string& s) {
  if (s == "none") return WeightKind::none;
  if (s == "element") return WeightKind::element;
  if (s == "slice") return WeightKind::slice;
  if (s == "dense") return WeightKind::dense;
  throw DomainError("unknown weight kind '" + s + "' (expected none, element, slice or dense)");
}

Sampling parse_sampling(const std::string& s) {
  if (s == "normal") return Sampling::normal;
  if (s == "uniform") return Sampling::uniform;
  throw DomainError("unknown sampling '" + s + "' (expected normal or uniform)");
}

void AlsConfig::validate() const {
  if (r < 1) throw DomainError("branch count r must be >= 1");
  if (n_points < 0) throw DomainError("number of points must be >= 1 (or 0 for the default)");
  if (!(tol_rel_step >= 0.0)) throw DomainError("tolerance must be non-negative");
  if (max_iters < 1) throw DomainError("max_iters must be >= 1");
  if (restarts < 1) throw DomainError("restarts must be >= 1");
  if (!(nullspace_scale >= 0.0)) throw DomainError("null-space scale must be non-negative");
  if (!(rank_threshold >= 0.0)) throw DomainError("rank threshold must be non-negative");
}

Weighting Weighting::none() { return Weighting{}; }

Weighting Weighting::full_rank(WeightOperator weight) {
  Weighting w;
  w.kind_ = Kind::full_rank;
  w.weight_ = std::move(weight);
  return w;
}

Weighting Weighting::dense(SvdSplit split, double nullspace_scale) {
  Weighting w;
  w.kind_ = Kind::dense;
  w.split_ = std::move(split);
  w.nullspace_scale_ = nullspace_scale;
  return w;
}

Weighting Weighting::from_covariance(const JacCovariance& cov, double rel_threshold, double nullspace_scale,
                                     bool strict) {
  if (cov.kind() == CovarianceKind::dense)
    return dense(svd_split(cov.materialize(), rel_threshold), nullspace_scale);
  return full_rank(weight_from(cov, strict, rel_threshold));
}

double Weighting::cost(const Vector& residual) const {
  switch (kind_) {
    case Kind::none:
      return residual.squaredNorm();
    case Kind::full_rank:
      return weight_.quadratic(residual);
    case Kind::dense:
      return (split_.D1.cwiseSqrt().cwiseInverse().asDiagonal() * (split_.U1.transpose() * residual))
          .squaredNorm();
  }
  return 0.0;
}

std::vector<Vector> sample_points(int m, int N, Sampling sampling, std::uint64_t seed) {
  if (m < 1) throw DomainError("points need at least one coordinate");
  if (N < 1) throw DomainError("need at least one sampling point");
  auto rng = make_rng(seed, kPointStream, 0);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(-1.0, 1.0);
  std::vector<Vector> points(static_cast<std::size_t>(N), Vector(m));
  for (Vector& u : points)
    for (int j = 0; j < m; ++j) u(j) = sampling == Sampling::normal ? normal(rng) : uniform(rng);
  return points;
}

Tensor3 build_jacobian_tensor(const PolyMap& f, std::span<const Vector> points) {
  std::vector<Matrix> slices;
  slices.reserve(points.size());
  for (const Vector& u : points) slices.push_back(jacobian(f, u));
  return stack_jacobians(slices);
}

Matrix als_update_unweighted(const Tensor3& t, const CpdFactors& factors, int mode, SolveInfo* info) {
  factors.validate();
  detail::require(factors.dims() == t.dims(), "factor shapes do not match the tensor");
  const Matrix kr = khatri_rao_for(factors, mode);
  const Matrix rhs = matricize(t, mode).transpose();
  return min_norm_solve(kr, rhs, info).transpose();
}

Matrix als_design_matrix(const CpdFactors& factors, int mode) {
  const Index dim = factors.factor(mode).rows();
  return kron(Matrix::Identity(dim, dim), khatri_rao_for(factors, mode));
}

Matrix als_update_weighted_fullrank(const Tensor3& t, const CpdFactors& factors, int mode,
                                    const WeightOperator& weight, const Permutation& p, SolveInfo* info) {
  factors.validate();
  detail::require(factors.dims() == t.dims(), "factor shapes do not match the tensor");
  detail::require(p.size() == t.dims().numel(), "permutation does not match the tensor size");
  const Matrix b = als_design_matrix(factors, mode);
  const Vector y = p.apply(t.data());
  const Vector x = weighted_normal_solve(b, y, weight, p, info);
  return from_solution(x, factors.rank(), factors.factor(mode).rows());
}

Matrix als_update_weighted_dense(const Tensor3& t, const CpdFactors& factors, int mode, const SvdSplit& split,
                                 const Permutation& p, double nullspace_scale, SolveInfo* info) {
  factors.validate();
  detail::require(factors.dims() == t.dims(), "factor shapes do not match the tensor");
  detail::require(p.size() == t.dims().numel(), "permutation does not match the tensor size");
  const Matrix b = als_design_matrix(factors, mode);
  const Vector y = p.apply(t.data());
  const Vector x = stacked_solve(b, y, split, p, nullspace_scale, info);
  return from_solution(x, factors.rank(), factors.factor(mode).rows());
}

double weighted_cost(const Tensor3& t, const CpdFactors& factors, const Weighting& weighting) {
  detail::require(factors.dims() == t.dims(), "factor shapes do not match the tensor");
  const Vector residual = t.data() - cpd_reconstruct(factors).data();
  return weighting.cost(residual);
}

double relative_step(const CpdFactors& previous, const CpdFactors& current) {
  const double num = (current.W - previous.W).squaredNorm() + (current.V - previous.V).squaredNorm() +
                     (current.H - previous.H).squaredNorm();
  const double den = current.W.squaredNorm() + current.V.squaredNorm() + current.H.squaredNorm();
  if (den == 0.0) return num == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return std::sqrt(num / den);
}

CpdFactors normalize_factors(CpdFactors f) {
  for (Index q = 0; q < f.rank(); ++q) {
    const double wn = f.W.col(q).norm();
    const double vn = f.V.col(q).norm();
    if (wn > 0.0) {
      f.W.col(q) /= wn;
      f.H.col(q) *= wn;
    }
    if (vn > 0.0) {
      f.V.col(q) /= vn;
      f.H.col(q) *= vn;
    }
  }
  return f;
}

AlsResult run_wals(const Tensor3& t, const Weighting& weighting, const AlsConfig& config,
                   const CpdFactors* initial) {
  config.validate();
  const TensorDims dims = t.dims();
  if (weighting.kind() == Weighting::Kind::full_rank)
    detail::require(weighting.weight().size() == dims.numel(), "weight size does not match the tensor");
  if (weighting.kind() == Weighting::Kind::dense)
    detail::require(weighting.split().size() == dims.numel(), "covariance split does not match the tensor");
  if (initial) {
    initial->validate();
    detail::require(initial->dims() == dims && initial->rank() == config.r,
                    "initial factors do not match the tensor and branch count");
  }

  const std::array<Permutation, 3> perms{permutation(1, dims), permutation(2, dims), permutation(3, dims)};
  const int starts = initial ? 1 : config.restarts;

  AlsResult best;
  best.report.config = config;
  double best_cost = std::numeric_limits<double>::infinity();
  bool any_finite = false;

  for (int restart = 0; restart < starts; ++restart) {
    CpdFactors f = initial ? *initial : random_factors(dims, config.r, config.seed, restart);
    FitReport rep;
    rep.cost_trace.push_back(weighted_cost(t, f, weighting));
    bool diverged = false;

    for (int it = 1; it <= config.max_iters; ++it) {
      const CpdFactors previous = f;
      for (int mode = 1; mode <= 3; ++mode) {
        SolveInfo info;
        switch (weighting.kind()) {
          case Weighting::Kind::none:
            f.factor(mode) = als_update_unweighted(t, f, mode, &info);
            break;
          case Weighting::Kind::full_rank:
            f.factor(mode) = als_update_weighted_fullrank(t, f, mode, weighting.weight(), perms[mode - 1], &info);
            break;
          case Weighting::Kind::dense:
            f.factor(mode) = als_update_weighted_dense(t, f, mode, weighting.split(), perms[mode - 1],
                                                       weighting.nullspace_scale(), &info);
            break;
        }
        rep.rank_deficient_solve = rep.rank_deficient_solve || info.rank_deficient || info.pinv_fallback;
        if (!finite(f)) break;
      }
      rep.iterations = it;
      if (!finite(f)) {
        diverged = true;
        break;
      }
      const double cost = weighted_cost(t, f, weighting);
      rep.cost_trace.push_back(cost);
      rep.rel_step = relative_step(previous, f);
      if (!std::isfinite(cost)) {
        diverged = true;
        break;
      }
      if (rep.rel_step < config.tol_rel_step) {
        rep.exit_reason = ExitReason::tolerance;
        break;
      }
      rep.exit_reason = ExitReason::max_iters;
    }

    rep.final_cost = diverged ? std::numeric_limits<double>::infinity() : rep.cost_trace.back();
    best.report.restart_costs.push_back(rep.final_cost);
    if (diverged) {
      best.report.warnings.push_back("restart " + std::to_string(restart) + " diverged");
      continue;
    }
    any_finite = true;
    if (rep.final_cost < best_cost) {
      best_cost = rep.final_cost;
      best.factors = f;
      best.report.iterations = rep.iterations;
      best.report.final_cost = rep.final_cost;
      best.report.rel_step = rep.rel_step;
      best.report.exit_reason = rep.exit_reason;
      best.report.cost_trace = std::move(rep.cost_trace);
      best.report.best_restart = restart;
      best.report.rank_deficient_solve = rep.rank_deficient_solve;
    }
  }

  if (!any_finite)
    throw ConvergenceError("all " + std::to_string(starts) + " ALS restart(s) diverged (non-finite cost)");
  if (best.report.rank_deficient_solve)
    best.report.warnings.push_back("rank-deficient subproblem solved with minimum-norm pseudo-inverse");
  if (weighting.kind() == Weighting::Kind::full_rank)
    for (const std::string& w : weighting.weight().warnings()) best.report.warnings.push_back(w);
  return best;
}

}  // namespace polydec
