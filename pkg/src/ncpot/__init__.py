"""Matrix-valued potential theory on the disc at finite truncation.

Outer factorization of positive matrix Laurent polynomials, the flat
Dirichlet problem, curvature classification of matrix metrics, circle-mean
certificates, and the weighted-shift Harnack family.
"""

from .circle import UNIT_DISC, BoundarySamples, DiscSpec
from .curvature import (
    Constant,
    DirectSum,
    DualFlatSum,
    FlatSum,
    Gauged,
    classify_field,
    curvature_defect,
    curvature_fd,
)
from .dirichlet import FlatMetric, newton_schwarz_solve, solve_dirichlet
from .errors import (
    ConvergenceError,
    DegeneracyError,
    DomainError,
    InputError,
    NcpotError,
    NotStrictlyPositiveError,
    PreconditionError,
    ResolutionError,
)
from .harnack import harnack_family, noninvertible_limit_witness, resolvent_vector
from .kernels import JIT_ENABLED
from .meanvalue import certify_semipositive, certify_seminegative, gauge_mean, schur_mean
from .poly import MatrixLaurentPolynomial, MatrixPolynomial
from .specfact import FactorizationReport, fejer_riesz_factor, normalize_factor

__version__ = "0.1.0"

__all__ = [
    "UNIT_DISC",
    "BoundarySamples",
    "DiscSpec",
    "Constant",
    "DirectSum",
    "DualFlatSum",
    "FlatSum",
    "Gauged",
    "classify_field",
    "curvature_defect",
    "curvature_fd",
    "FlatMetric",
    "newton_schwarz_solve",
    "solve_dirichlet",
    "ConvergenceError",
    "DegeneracyError",
    "DomainError",
    "InputError",
    "NcpotError",
    "NotStrictlyPositiveError",
    "PreconditionError",
    "ResolutionError",
    "harnack_family",
    "noninvertible_limit_witness",
    "resolvent_vector",
    "JIT_ENABLED",
    "certify_semipositive",
    "certify_seminegative",
    "gauge_mean",
    "schur_mean",
    "MatrixLaurentPolynomial",
    "MatrixPolynomial",
    "FactorizationReport",
    "fejer_riesz_factor",
    "normalize_factor",
]
