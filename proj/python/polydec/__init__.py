"""Weighted CPD-based decoupling of multivariate polynomials."""

from ._core import (
    AlsConfig,
    DecoupledModel,
    PolyMap,
    a_matrix,
    basis_enumerate,
    compose,
    decouple,
    multisine,
    run_corr_experiment,
    sigma_dense,
    svd_split,
    synthesize_decoupled,
)

__all__ = [
    "AlsConfig",
    "DecoupledModel",
    "PolyMap",
    "a_matrix",
    "basis_enumerate",
    "compose",
    "decouple",
    "multisine",
    "run_corr_experiment",
    "sigma_dense",
    "svd_split",
    "synthesize_decoupled",
]
