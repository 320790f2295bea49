"""Invariant Hermitian exterior calculus on Lie-algebra complex models.

Finite-dimensional models of compact homogeneous complex manifolds: exterior
algebra with Hermitian metrics, differential operators and cohomology from
structure constants, order-by-order deformation series, copolarised
deformation directions and the metrics they carry.
"""

from .errors import (
    Degenerate, DimMismatch, DimTooSmall, HdlError, IntegrabilityViolated,
    NoDClosedRepresentative, NoTrivialization, NotBalanced, NotClosedSquare,
    NotInKernel, NotInPlusSpace, NotPrimitiveClass, NotUnimodular, NotUnique,
    ObstructionNotExact, OrderOutOfRange, ParseError, UnsupportedBidegree,
    VanishingForm, WrongDegree,
)
from .exterior import (
    Form, HermitianMetric, VectorForm, contract, hodge_star, integrate,
    l2_inner, l2_norm, lambda_op, lefschetz, omega_form, primitive_decompose,
    volume_form, wedge, wedge_power,
)
from .model import (
    Model, build_model, builtin_model, builtin_names, cohomology,
    ddbar_lemma_check, harmonic_basis, harmonic_representative, load_model,
    metric_flags, minimal_d_closed_rep, operator_matrix,
)
from .deformation import (
    KuranishiSeries, bracket, canonical_trivialization, cy_contract,
    cy_invert, deformation_directions, kuranishi_series,
    maurer_cartan_residual,
)
from .copolar import (
    CopolarisedSpace, MetricReport, PairingReport, copolarised_subspace,
    pairings, period_domain_check, polarised_subspace, primitive_11,
    primitive_11_rep, primitive_rep_search, star_projectors, symplectic_maps,
    wp_metrics,
)
from .cli import RunConfig, Report, main

__version__ = "0.1.0"

__all__ = [
    "Degenerate", "DimMismatch", "DimTooSmall", "HdlError",
    "IntegrabilityViolated", "NoDClosedRepresentative", "NoTrivialization",
    "NotBalanced", "NotClosedSquare", "NotInKernel", "NotInPlusSpace",
    "NotPrimitiveClass", "NotUnimodular", "NotUnique", "ObstructionNotExact",
    "OrderOutOfRange", "ParseError", "UnsupportedBidegree", "VanishingForm",
    "WrongDegree",
    "Form", "HermitianMetric", "VectorForm", "contract", "hodge_star",
    "integrate", "l2_inner", "l2_norm", "lambda_op", "lefschetz",
    "omega_form", "primitive_decompose", "volume_form", "wedge",
    "wedge_power",
    "Model", "build_model", "builtin_model", "builtin_names", "cohomology",
    "ddbar_lemma_check", "harmonic_basis", "harmonic_representative",
    "load_model", "metric_flags", "minimal_d_closed_rep", "operator_matrix",
    "KuranishiSeries", "bracket", "canonical_trivialization", "cy_contract",
    "cy_invert", "deformation_directions", "kuranishi_series",
    "maurer_cartan_residual",
    "CopolarisedSpace", "MetricReport", "PairingReport",
    "copolarised_subspace", "pairings", "period_domain_check",
    "polarised_subspace", "primitive_11", "primitive_11_rep",
    "primitive_rep_search", "star_projectors", "symplectic_maps",
    "wp_metrics",
    "RunConfig", "Report", "main",
]
