"""fairbox: certified group-fairness verification of loop-free decision
programs against Gaussian/Bernoulli population models.

Pipeline: parse + validate the input file, enumerate execution paths of the
composed model+program symbolically, bound the four event probabilities by
branch-and-bound over boxes, bracket the fairness ratio, and emit a
certificate an external checker can re-verify from the source text alone.
"""

from .dsl import (
    Diagnostic,
    ParseError,
    ValidatedTask,
    ValidationFailure,
    VerificationTask,
    format_task,
    parse_source,
    validate,
)
from .engine import available_engines
from .fairness import (
    Certificate,
    CheckResult,
    InvalidBounds,
    NothingToCertify,
    RatioBounds,
    Verdict,
    certificate_from_json,
    certificate_to_json,
    check_fairness,
    emit_certificate,
    ratio_bounds,
    verify_certificate,
)
from .mc import McEstimate, mc_estimate
from .regions import Box, Classification, DegenerateDimension, MissingDimension
from .symexec import (
    EVENTS,
    EventRegion,
    PathCondition,
    PathExplosion,
    build_event_region,
    enumerate_paths,
)
from .volume import (
    GaussianProduct,
    MixtureMeasure,
    ProbabilityBounds,
    RefinementBudget,
    bound_volume,
    box_mass,
    gaussian_cdf,
    mixture_measure,
)

__version__ = "0.1.0"

__all__ = [
    "Box", "Certificate", "CheckResult", "Classification",
    "DegenerateDimension", "Diagnostic", "EVENTS", "EventRegion",
    "GaussianProduct", "InvalidBounds", "McEstimate", "MissingDimension",
    "MixtureMeasure", "NothingToCertify", "ParseError", "PathCondition",
    "PathExplosion", "ProbabilityBounds", "RatioBounds", "RefinementBudget",
    "ValidatedTask", "ValidationFailure", "Verdict", "VerificationTask",
    "available_engines", "bound_volume", "box_mass", "build_event_region",
    "certificate_from_json", "certificate_to_json", "check_fairness",
    "emit_certificate", "enumerate_paths", "format_task", "gaussian_cdf",
    "mc_estimate", "mixture_measure", "parse_source", "ratio_bounds",
    "validate", "verify_certificate", "__version__",
]
