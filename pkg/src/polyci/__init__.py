"""Selective confidence intervals after l1-penalized model selection.

The package is layered: interval unions and a numerically hardened
truncated-Gaussian kernel at the bottom, a coordinate-descent solver and
the selection-event geometry in the middle, interval assembly and the
infinite-length certificate on top, with a seeded simulation harness and
CLI alongside.
"""

__version__ = "0.1.0"

from .intervals import IntervalUnion
from .truncgauss import (
    BracketingError,
    TruncatedGaussian,
    ci_location,
    ci_location_many,
    length_bounds,
    log_gauss_mass,
    min_coverage_mass,
    quantile_floor,
    sample_truncated,
    solve_location,
    solve_location_many,
    trunc_cdf,
    trunc_cdf_many,
    trunc_pdf,
    trunc_quantile_w,
)
from .lasso import ConvergenceError, LassoFit, LassoProblem, fit, selection
from .geometry import (
    CapacityError,
    ContrastSpec,
    LineSection,
    Polyhedron,
    build_event_polyhedron,
    line_section,
    make_contrast,
    truncation_union,
    unboundedness_probe,
)
from .inference import (
    BoundarySelectionError,
    ConfidenceInterval,
    LengthCertificate,
    ci_given_model,
    ci_given_signs,
    empty_model_interval,
    estimate_sigma,
    generic_polyhedral_ci,
    infinite_length_certificate,
)

__all__ = [
    "__version__",
    "IntervalUnion",
    "BracketingError",
    "TruncatedGaussian",
    "ci_location",
    "ci_location_many",
    "length_bounds",
    "log_gauss_mass",
    "min_coverage_mass",
    "quantile_floor",
    "sample_truncated",
    "solve_location",
    "solve_location_many",
    "trunc_cdf",
    "trunc_cdf_many",
    "trunc_pdf",
    "trunc_quantile_w",
    "ConvergenceError",
    "LassoFit",
    "LassoProblem",
    "fit",
    "selection",
    "CapacityError",
    "ContrastSpec",
    "LineSection",
    "Polyhedron",
    "build_event_polyhedron",
    "line_section",
    "make_contrast",
    "truncation_union",
    "unboundedness_probe",
    "BoundarySelectionError",
    "ConfidenceInterval",
    "LengthCertificate",
    "ci_given_model",
    "ci_given_signs",
    "empty_model_interval",
    "estimate_sigma",
    "generic_polyhedral_ci",
    "infinite_length_certificate",
]
