"""Flat Dirichlet problem: boundary metric to zero-curvature metric ``P = H^* H``.

The direct solver approximates the boundary data by a Laurent polynomial and
factors it. The Newton-Schwarz solver works near a constant and inverts the
linearization ``h -> (h + h^*)|circle`` with the Schwarz integral.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circle import (
    UNIT_DISC,
    BoundarySamples,
    DiscSpec,
    fejer_truncate,
    fourier_coefficients,
    polar_grid,
)
from .errors import (
    ConvergenceError,
    DegeneracyError,
    InputError,
    NotStrictlyPositiveError,
    PreconditionError,
)
from .linalg import dagger, inv_sqrt_psd, sqrt_psd
from .poly import MatrixPolynomial, unit_circle
from .report import collect
from .specfact import (
    DEFAULT_TOL,
    POSITIVITY_FLOOR,
    FactorizationReport,
    fejer_riesz_factor,
    normalize_factor,
    wilson_iteration,
)

__all__ = [
    "FlatMetric",
    "solve_dirichlet",
    "evaluate_metric",
    "newton_schwarz_solve",
    "compare_boundary_interior",
    "unitary_gauge_distance",
    "sandwich_constant",
    "polar_grid",
]

DEFAULT_DEGREE = 64
NEWTON_RADIUS = 0.25


@dataclass(frozen=True, eq=False)
class FlatMetric:
    """``P(z) = H(w)^* H(w)`` with ``w = (z - z0) / r`` the domain's local coordinate.

    ``report`` holds the factorization diagnostics and ``truncation_error``
    the sup distance between the boundary samples and the Laurent data that
    was actually factored (``nan`` when built directly from a factor).
    """

    h: MatrixPolynomial
    domain: DiscSpec = UNIT_DISC
    report: FactorizationReport | None = None
    truncation_error: float = float("nan")
    truncation: str = "exact"

    @property
    def dim(self):
        return self.h.dim

    def factor(self, z):
        """``H`` at global points z (no domain check)."""
        return self.h(self.domain.to_local(z))

    def __call__(self, z):
        return evaluate_metric(self, z)


def evaluate_metric(fm, z):
    """``H(z)^* H(z)``; z may be a scalar or an array of points in the closed domain."""
    fm.domain.require_points(z)
    hv = fm.factor(z)
    p = dagger(hv) @ hv
    return 0.5 * (p + dagger(p))


def _trim(laurent_coeffs, rel=1e-15):
    """Drop trailing coefficient pairs that vanish to rounding."""
    c = laurent_coeffs
    N = c.shape[0] // 2
    scale = float(np.linalg.norm(c[N], 2))
    k = N
    while k > 0 and float(np.linalg.norm(c[N + k], 2)) <= rel * scale:
        k -= 1
    return c[N - k : N + k + 1]


def solve_dirichlet(f, degree=DEFAULT_DEGREE, tol=DEFAULT_TOL, method="bauer", truncation="auto"):
    """Flat metric on the disc of ``f`` with boundary values ``f``.

    Parameters
    ----------
    f : BoundarySamples
        Strictly positive boundary data.
    degree : int
        Truncation degree N, capped at ``(n - 1) // 2``.
    truncation : {"auto", "fejer", "fourier"}
        Laurent approximant of the data. ``"fejer"`` uses Cesaro means,
        which keep positivity. ``"fourier"`` uses the raw coefficients, exact
        for band-limited data. ``"auto"`` takes the raw coefficients when they
        stay above the positivity floor and falls back to Fejer otherwise.

    Returns
    -------
    FlatMetric
        With the factorization report and the sup truncation error
        ``max_j ||F_N(w_j) - f_j||`` at the sample points.
    """
    if not isinstance(f, BoundarySamples):
        raise InputError("boundary data must be BoundarySamples")
    margin = f.min_eigenvalue()
    if margin < POSITIVITY_FLOOR * f.sup_norm():
        raise NotStrictlyPositiveError("boundary data not strictly positive", margin=margin)
    N = min(int(degree), (f.n - 1) // 2)
    if N < 0:
        raise InputError("degree must be nonnegative", degree=degree)
    used = truncation
    if truncation in ("auto", "fourier"):
        laurent = fourier_coefficients(f, N)
        floor = POSITIVITY_FLOOR * f.sup_norm()
        if truncation == "auto" and laurent.min_eigenvalue(max(64, 8 * (2 * N + 1))) < floor:
            laurent, _ = fejer_truncate(f, N)
            used = "fejer"
        else:
            used = "fourier"
    elif truncation == "fejer":
        laurent, _ = fejer_truncate(f, N)
    else:
        raise InputError(f"unknown truncation {truncation!r}")
    laurent = type(laurent)(_trim(laurent.coeffs))
    trunc_err = float(
        np.max(np.linalg.norm(laurent.on_circle(f.n) - f.values, 2, axis=(1, 2)))
    )
    h, report = fejer_riesz_factor(laurent, tol=tol, method=method)
    return FlatMetric(h, f.disc, report, trunc_err, used)


def newton_schwarz_solve(f, tol=DEFAULT_TOL, max_iters=20, radius=NEWTON_RADIUS):
    """Perturbative solver for boundary data close to a constant.

    The data is normalized to ``g = F(1)^{-1/2} F F(1)^{-1/2}`` and Newton's
    method is applied to ``h -> (h^* + h + h^* h)|circle - (g - Id)`` with
    ``h`` holomorphic and ``h(1) = 0``. Writing the update as ``e (Id + h)``,
    each step needs ``e + e^*`` equal to ``(Id+h)^{-*} g (Id+h)^{-1} - Id``,
    which the Schwarz integral solves. The result is
    ``H = (Id + h) F(1)^{1/2}``, re-normalized to ``H(0)`` PSD.

    Raises
    ------
    ConvergenceError
        If ``sup ||g - Id|| > radius`` or the residual misses ``tol``.
    """
    if not isinstance(f, BoundarySamples):
        raise InputError("boundary data must be BoundarySamples")
    f1 = f.values[0]
    s = sqrt_psd(f1)
    si = inv_sqrt_psd(f1)
    g = si @ f.values @ si
    g = 0.5 * (g + dagger(g))
    eye = np.eye(f.dim)
    dist = float(np.max(np.linalg.norm(g - eye, 2, axis=(1, 2))))
    if dist > radius:
        raise ConvergenceError(
            "data outside the perturbative neighborhood; use solve_dirichlet",
            distance=dist,
            radius=radius,
        )
    coeffs, _, its = wilson_iteration(g, eye, tol=0.1 * tol, max_iters=max_iters, anchor="one")
    h = normalize_factor(MatrixPolynomial(coeffs @ s).trimmed())
    hv = h(unit_circle(f.n))
    res = float(np.max(np.linalg.norm(dagger(hv) @ hv - f.values, 2, axis=(1, 2))))
    res /= 1.0 + f.sup_norm()
    report = FactorizationReport(
        residual=res,
        winding=0,
        h0_hermiticity=float(np.linalg.norm(h.coeffs[0] - dagger(h.coeffs[0]), 2)),
        method="newton-schwarz",
        iterations=its,
        samples=f.n,
        passed=res <= tol,
    )
    if res > tol:
        raise ConvergenceError("Newton-Schwarz residual above tolerance", **report.to_dict())
    return FlatMetric(h, f.disc, report, 0.0, "samples")


def compare_boundary_interior(p, q, grid=None, tol=1e-9, n_boundary=256):
    """Certify ``P >= Q`` inside from ``P >= Q`` on the boundary.

    Raises
    ------
    PreconditionError
        If the boundary ordering fails, i.e. the hypothesis is absent.
    """
    if p.domain != q.domain:
        raise InputError("metrics must share a domain")
    disc = p.domain
    zb = disc.from_local(unit_circle(n_boundary))
    pb, qb = evaluate_metric(p, zb), evaluate_metric(q, zb)
    bmargin = float(np.min(np.linalg.eigvalsh(pb - qb)))
    bscale = 1.0 + float(np.max(np.linalg.norm(pb, 2, axis=(1, 2))))
    if bmargin < -tol * bscale:
        raise PreconditionError("boundary ordering P >= Q fails", margin=bmargin)
    z = polar_grid(disc) if grid is None else np.asarray(grid, dtype=complex).ravel()
    pz, qz = evaluate_metric(p, z), evaluate_metric(q, z)
    margins = np.linalg.eigvalsh(pz - qz)[:, 0]
    items = [
        {"z": complex(zz), "margin": float(m), "threshold": -tol}
        for zz, m in zip(z, margins)
    ]
    rep = collect("max-principle", items)
    rep.diagnostics["boundary_margin"] = bmargin
    return rep


def unitary_gauge_distance(h1, h2, n=256):
    """``max(||U^*U - Id||, sup_circle ||h2 - U h1||)`` with ``U = h2(0) h1(0)^{-1}``."""
    a, b = h1.coeffs[0], h2.coeffs[0]
    for m in (a, b):
        s = np.linalg.svd(m, compute_uv=False)
        if s[-1] <= 1e-14 * max(1.0, s[0]):
            raise DegeneracyError("singular constant term", sigma_min=float(s[-1]))
    u = b @ np.linalg.inv(a)
    unit = float(np.linalg.norm(dagger(u) @ u - np.eye(u.shape[0]), 2))
    w = unit_circle(n)
    diff = h2(w) - u @ h1(w)
    return max(unit, float(np.max(np.linalg.norm(diff, 2, axis=(1, 2)))))


def sandwich_constant(p, q, eps, points):
    """Smallest ``c`` with ``(1 - c eps) P <= Q <= (1 + c eps) P`` at the points.

    When the boundary data satisfy the sandwich with ``c = 1`` the maximum
    principle predicts ``c <= 1`` inside.
    """
    pz, qz = evaluate_metric(p, points), evaluate_metric(q, points)
    worst = 0.0
    for a, b in zip(pz, qz):
        r = inv_sqrt_psd(a)
        ev = np.linalg.eigvalsh(r @ b @ r - np.eye(a.shape[0]))
        worst = max(worst, float(np.max(np.abs(ev))))
    return worst / eps
