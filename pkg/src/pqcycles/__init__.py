"""Cycle bounds for the 3x+1 problem and its px+q generalization.

Exact integer dynamics of the accelerated odd map, cycle discovery and
classification, certified fixed-point evaluation of the minimum-element
bounds, and the two minimal cycle-length searches.
"""

from .bounds import (
    BoundEvaluation,
    MinMResult,
    NearTie,
    alpha_bound,
    beta_bound,
    evaluate_bounds,
    frac_m_log2p,
    min_m_alpha,
    min_m_beta_exhaustive,
    rhs_threshold,
    sandwich_interval_check,
)
from .cycles import (
    BoundCheck,
    CatalogError,
    CycleRecord,
    DivergenceReport,
    LoopClass,
    SearchLimits,
    SweepResult,
    classify_cycle,
    classify_values,
    enumerate_cycles,
    exact_bound_check,
    find_cycle_from,
    read_catalog,
    sandwich_check,
    write_catalog,
)
from .dynamics import (
    CLASSIC,
    IdentityCheck,
    NotACycleError,
    PqSystem,
    StepRecord,
    Trajectory,
    coefficient_cm,
    f_step,
    t_step,
    t_trajectory,
    v2,
    verify_linear_form,
    verify_product_identity,
)
from .fixedpoint import (
    CertifiedValue,
    FixedFraction,
    PrecisionError,
    log2_frac,
    pow2_exponent,
)
from .scan import ScanConfig, min_m_beta_scan

__version__ = "0.1.0"

__all__ = [
    "BoundCheck",
    "BoundEvaluation",
    "CLASSIC",
    "CatalogError",
    "CertifiedValue",
    "CycleRecord",
    "DivergenceReport",
    "FixedFraction",
    "IdentityCheck",
    "LoopClass",
    "MinMResult",
    "NearTie",
    "NotACycleError",
    "PqSystem",
    "PrecisionError",
    "ScanConfig",
    "SearchLimits",
    "StepRecord",
    "SweepResult",
    "Trajectory",
    "alpha_bound",
    "beta_bound",
    "classify_cycle",
    "classify_values",
    "coefficient_cm",
    "enumerate_cycles",
    "evaluate_bounds",
    "exact_bound_check",
    "f_step",
    "find_cycle_from",
    "frac_m_log2p",
    "log2_frac",
    "min_m_alpha",
    "min_m_beta_exhaustive",
    "min_m_beta_scan",
    "pow2_exponent",
    "read_catalog",
    "rhs_threshold",
    "sandwich_check",
    "sandwich_interval_check",
    "t_step",
    "t_trajectory",
    "v2",
    "verify_linear_form",
    "verify_product_identity",
    "write_catalog",
]
