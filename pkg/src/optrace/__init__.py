"""Numerical laboratory for higher regularized traces of operator Sturm-Liouville problems."""

from optrace.galerkin import (
    GalerkinModel,
    SpectralClusters,
    TruncationSpec,
    assemble_matrix,
    eigen_clusters,
    power_sum,
)
from optrace.potential import (
    ConditionReport,
    TrigOperatorPotential,
    check_conditions,
    cos_moment,
    coupling_block,
    derivative,
    endpoint_trace,
    evaluate,
    sup_norm_estimate,
)
from optrace.resolvent import (
    ContourOptions,
    ContourSpec,
    TraceVariant,
    contour_integral,
    m_pj,
    m_pj_all,
    remainder_estimate,
    residue_at,
    residues_at,
    weighted_trace,
)
from optrace.traceformula import (
    VerificationReport,
    a_coefficient,
    fourier_boundary_sum,
    ibp_check,
    lhs_partial,
    rhs_candidates,
    rhs_value,
    route_table,
    verify_convergence,
)

__version__ = "0.1.0"
