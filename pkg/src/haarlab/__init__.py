"""Haar unitary sampling, exact moment formulas, and Monte Carlo checks."""

__version__ = "0.1.0"

from .densities import (
    DensityPoint,
    Measure,
    entry_radial_cdf,
    ginibre_limit_density,
    truncated_jpdf,
    truncation_constant,
    weyl_density,
)
from .ensembles import (
    TruncationSpec,
    coupled_truncation_pair,
    haar_unitary,
    haar_unitary_qr,
    sample_truncation,
    truncate,
    unitarity_defect,
)
from .moments import (
    LimitMomentQuery,
    MomentSpec,
    complex_normal_moment,
    diagonal_product_moment_leading,
    entry_abs_moment,
    is_forced_zero,
    limit_mixed_moment,
    limit_trace_moment,
)
from .rng import RngStream, complex_normal, ginibre_matrix
from .spectral import Spectrum, eigenangle_powers, eigenvalues, trace_power
from .stats import EstimateReport, ExperimentConfig, ExperimentResult, make_report, verify_suite

__all__ = [
    "__version__",
    "DensityPoint",
    "Measure",
    "entry_radial_cdf",
    "ginibre_limit_density",
    "truncated_jpdf",
    "truncation_constant",
    "weyl_density",
    "TruncationSpec",
    "coupled_truncation_pair",
    "haar_unitary",
    "haar_unitary_qr",
    "sample_truncation",
    "truncate",
    "unitarity_defect",
    "LimitMomentQuery",
    "MomentSpec",
    "complex_normal_moment",
    "diagonal_product_moment_leading",
    "entry_abs_moment",
    "is_forced_zero",
    "limit_mixed_moment",
    "limit_trace_moment",
    "RngStream",
    "complex_normal",
    "ginibre_matrix",
    "Spectrum",
    "eigenangle_powers",
    "eigenvalues",
    "trace_power",
    "EstimateReport",
    "ExperimentConfig",
    "ExperimentResult",
    "make_report",
    "verify_suite",
]
