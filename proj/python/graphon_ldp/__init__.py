"""Python bindings for the graphon large-deviation library."""

from ._core import (
    GridGraphon,
    LdpError,
    ReferenceGraphon,
    __version__,
    bernoulli_relent,
    block_average,
    build_reference,
    cut_norm_distance,
    finiterank_norm_fixedpoint,
    l2_distance,
    make_rank1_reference,
    max_eigenvalue,
    minimize_rate_at_norm,
    operator_norm,
    optimal_perturbation,
    psi_curve,
    rank1_norm_fixedpoint,
    rate_I,
    reference_constants,
    reflect,
    sample_graph,
    scaling_probe,
    spectral_sample_stats,
    validate_reference,
    witness_upper_bound,
)

__all__ = [
    "GridGraphon",
    "LdpError",
    "ReferenceGraphon",
    "__version__",
    "bernoulli_relent",
    "block_average",
    "build_reference",
    "cut_norm_distance",
    "finiterank_norm_fixedpoint",
    "l2_distance",
    "make_rank1_reference",
    "max_eigenvalue",
    "minimize_rate_at_norm",
    "operator_norm",
    "optimal_perturbation",
    "psi_curve",
    "rank1_norm_fixedpoint",
    "rate_I",
    "reference_constants",
    "reflect",
    "sample_graph",
    "scaling_probe",
    "spectral_sample_stats",
    "validate_reference",
    "witness_upper_bound",
]
