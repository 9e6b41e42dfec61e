#include "polydec/decouple.hpp"

namespace polydec {

PipelineResult decouple_pipeline(const PolyMap& f, const std::optional<CoeffCovariance>& sigma_f,
                                 const AlsConfig& config) {
  config.validate();
  if (config.weight != WeightKind::none && !sigma_f)
    throw DomainError("weight kind '" + to_string(config.weight) + "' needs a coefficient covariance");
  if (sigma_f) sigma_f->check_compatible(f.basis(), f.num_outputs());

  PipelineResult out;
  out.points = sample_points(f.num_inputs(), config.effective_points(f.basis()), config.sampling, config.seed);
  const Tensor3 jac = build_jacobian_tensor(f, out.points);

  Weighting weighting = Weighting::none();
  switch (config.weight) {
    case WeightKind::none:
      break;
    case WeightKind::element:
      weighting = Weighting::from_covariance(sigma_elementwise(*sigma_f, f.basis(), f.num_outputs(), out.points),
                                             config.rank_threshold, config.nullspace_scale, config.strict_weight);
      break;
    case WeightKind::slice:
      weighting = Weighting::from_covariance(sigma_slicewise(*sigma_f, f.basis(), f.num_outputs(), out.points),
                                             config.rank_threshold, config.nullspace_scale, config.strict_weight);
      break;
    case WeightKind::dense:
      weighting = Weighting::from_covariance(sigma_dense(*sigma_f, f.basis(), f.num_outputs(), out.points),
                                             config.rank_threshold, config.nullspace_scale, config.strict_weight);
      break;
  }

  AlsResult fit = run_wals(jac, weighting, config);
  out.factors = normalize_factors(std::move(fit.factors));
  out.report = std::move(fit.report);
  out.report.config = config;
  out.report.config.n_points = static_cast<int>(out.points.size());

  out.model = reconstruct_branches(out.factors, f, out.points, f.degree());
  const PolyMap composed = compose(out.model, f.basis());
  out.report.unweighted_residual = (jac.data() - cpd_reconstruct(out.factors).data()).squaredNorm();
  out.report.coeff_rel_error = coeff_rel_error(f, composed);
  out.report.constant_abs_error = constant_abs_error(f, composed);
  if (sigma_f) out.report.weighted_coeff_error = weighted_coeff_error(f, composed, *sigma_f, config.rank_threshold);
  return out;
}

}  // namespace polydec
