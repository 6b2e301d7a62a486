"""Circle means of a metric and the curvature-sign certificates built on them.

For a disc ``D_r(z0)`` with circle averages ``m0 = avg P|dz|``,
``m+ = avg P dz`` and ``m- = avg P dzbar``:

* ``M = [[m0, r m+], [r m-, r^2 m0]]`` is the moment block,
* ``S = m0 - m+ m0^{-1} m-`` is its Schur complement (a ``t -> 0`` limit
  when ``m0`` is singular),
* ``T = H(z0)^{-*} H(z0)^{-1}`` where ``H`` is holomorphic on the disc with
  ``H^* P H = Id`` on the circle; it is the smallest of the gauge-transformed
  Schur means.

Seminegative curvature holds iff ``S >= P(z0)`` on every disc; semipositive
curvature iff ``T <= P(z0)``.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .circle import BoundarySamples, CircleMoments, DiscSpec, average_moments, circle_samples
from .errors import ConvergenceError, DegeneracyError, InputError
from .linalg import BlockMatrix2x2, dagger, schur_complement_limit
from .poly import MatrixPolynomial
from .report import collect, disc_dict
from .specfact import dual_boundary_factor

__all__ = [
    "MeanBlock",
    "SchurMean",
    "GaugeMean",
    "DEFAULT_SAMPLES",
    "boundary_samples",
    "mean_block",
    "schur_mean",
    "block_margin",
    "certify_seminegative",
    "monotonicity_check",
    "three_circles_convexity",
    "gauge_mean",
    "gauge_competitor_value",
    "certify_semipositive",
    "default_disc_family",
    "radial_profile",
    "profile_csv",
    "small_radius_ratio",
]

DEFAULT_SAMPLES = 256
MAX_SAMPLES = 1 << 13


@dataclass(frozen=True, eq=False)
class MeanBlock:
    disc: DiscSpec
    block: BlockMatrix2x2
    moments: CircleMoments


@dataclass(frozen=True, eq=False)
class SchurMean:
    disc: DiscSpec
    value: np.ndarray
    t_diagnostic: float


@dataclass(frozen=True, eq=False)
class GaugeMean:
    disc: DiscSpec
    value: np.ndarray
    factor_residual: float
    h: MatrixPolynomial
    samples: int


def boundary_samples(source, disc=None, n=DEFAULT_SAMPLES):
    """Circle samples of a metric field on ``disc``, or ``source`` itself if already sampled."""
    if isinstance(source, BoundarySamples):
        if disc is not None and disc != source.disc:
            raise InputError("samples were taken on a different disc")
        return source
    if disc is None:
        raise InputError("a disc is required for a metric field")
    source.domain.require_disc(disc)
    return BoundarySamples(disc, source(circle_samples(disc, n)))


def mean_block(source, disc=None, n=DEFAULT_SAMPLES):
    """The moment block ``[[m0, r m+], [r m-, r^2 m0]]``."""
    s = boundary_samples(source, disc, n)
    mom = average_moments(s)
    r = s.disc.r
    return MeanBlock(s.disc, BlockMatrix2x2(mom.m0, r * mom.mplus, r * r * mom.m0), mom)


def schur_mean(source, disc=None, n=DEFAULT_SAMPLES):
    """``S(P, z0, r)`` through the regularized limit; raises DegeneracyError if it diverges."""
    s = boundary_samples(source, disc, n)
    mom = average_moments(s)
    value, spread = schur_complement_limit(mom.m0, mom.mplus, mom.m0)
    return SchurMean(s.disc, value, spread)


def block_margin(mom, p0, iters=80):
    """``sup { s : [[m0, m+], [m-, m0]] >= diag(P(z0) + s Id, 0) }`` by bisection.

    This is the margin of the block form of the sub-mean-value inequality.
    When ``m0`` is invertible it equals ``lambda_min(S - P(z0))``; returns
    ``-inf`` when no shift makes the block PSD.
    """
    d = p0.shape[0]
    base = np.block([[mom.m0, mom.mplus], [mom.mminus, mom.m0]])
    base = 0.5 * (base + dagger(base))
    shift = np.zeros_like(base)

    def ok(s):
        shift[:d, :d] = p0 + s * np.eye(d)
        return np.linalg.eigvalsh(base - shift)[0] >= 0.0

    hi = float(np.linalg.eigvalsh(mom.m0 - p0)[0])
    if ok(hi):
        return hi
    lo = -1.0 - float(np.linalg.norm(base, 2)) - float(np.linalg.norm(p0, 2))
    if not ok(lo):
        lo *= 1e6
        if not ok(lo):
            return float("-inf")
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if ok(mid):
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-15 * (1.0 + abs(lo)):
            break
    return lo


def default_disc_family(domain, centers=5, radii=3, fill=0.9):
    """``centers x centers`` grid of centers times ``radii`` radii, inside ``fill * domain``.

    A center at distance ``rho`` from the domain center gets radii
    ``(j / radii) * (fill * R - rho)``, ``j = 1..radii``.
    """
    R = domain.r * fill
    xs = np.linspace(-0.5, 0.5, centers) * R
    out = []
    for y in xs:
        for x in xs:
            c = domain.z0 + complex(x, y)
            room = R - abs(c - domain.z0)
            for j in range(1, radii + 1):
                out.append(DiscSpec(c, room * j / radii))
    return out


def _scale(p0):
    return 1.0 + float(np.linalg.norm(p0, 2))


def certify_seminegative(field, discs=None, tol=1e-9, n=DEFAULT_SAMPLES, agree_tol=1e-8):
    """Check ``S(P, z0, r) >= P(z0)`` in block form and in Schur form on each disc.

    Both margins are reported per disc; ``diagnostics['forms_agree']`` records
    whether the two forms give the same verdict with margins within
    ``agree_tol`` (relative to ``1 + ||P(z0)||``).
    """
    discs = default_disc_family(field.domain) if discs is None else list(discs)
    items = []
    agree = True
    gap = 0.0
    for disc in discs:
        s = boundary_samples(field, disc, n)
        mom = average_moments(s)
        p0 = field(disc.z0)
        scale = _scale(p0)
        mb = block_margin(mom, p0)
        try:
            value, spread = schur_complement_limit(mom.m0, mom.mplus, mom.m0)
            ms = float(np.linalg.eigvalsh(value - p0)[0])
        except DegeneracyError:
            ms, spread = float("-inf"), float("inf")
        threshold = -tol * scale
        same = (mb >= threshold) == (ms >= threshold)
        diff = abs(mb - ms) if np.isfinite(mb) and np.isfinite(ms) else (0.0 if mb == ms else np.inf)
        gap = max(gap, diff / scale)
        agree = agree and same and diff <= agree_tol * scale
        items.append(
            {
                "disc": disc_dict(disc),
                "margin": min(mb, ms),
                "margin_block": mb,
                "margin_schur": ms,
                "t_spread": spread,
                "threshold": threshold,
            }
        )
    rep = collect("seminegative", items)
    rep.diagnostics.update({"forms_agree": agree, "max_margin_gap": gap, "samples": n})
    return rep


def _schur_values(field, z0, radii, n):
    return [schur_mean(field, DiscSpec(z0, r), n).value for r in radii]


def monotonicity_check(field, z0, radii, tol=1e-9, n=DEFAULT_SAMPLES):
    """``S(P, z0, r_j) <= S(P, z0, r_{j+1})`` for ascending radii."""
    radii = [float(r) for r in radii]
    if any(b <= a for a, b in zip(radii, radii[1:])):
        raise InputError("radii must be strictly ascending")
    vals = _schur_values(field, z0, radii, n)
    items = []
    for j in range(len(radii) - 1):
        m = float(np.linalg.eigvalsh(vals[j + 1] - vals[j])[0])
        items.append(
            {
                "radii": [radii[j], radii[j + 1]],
                "margin": m,
                "threshold": -tol * _scale(vals[j + 1]),
            }
        )
    return collect("monotonicity", items)


def three_circles_convexity(field, z0, radii, tol=1e-9, n=DEFAULT_SAMPLES):
    """Midpoint convexity of ``t -> S(P, z0, e^t)`` on geometrically spaced radii."""
    radii = np.asarray(radii, dtype=float)
    if radii.size < 3 or np.any(radii <= 0):
        raise InputError("need three or more positive radii")
    t = np.log(radii)
    if np.any(np.diff(t) <= 0) or np.ptp(np.diff(t)) > 1e-9 * (1 + abs(t).max()):
        raise InputError("radii must be ascending and geometrically spaced")
    vals = _schur_values(field, z0, radii, n)
    items = []
    for j in range(len(radii) - 2):
        mid = 0.5 * (vals[j] + vals[j + 2]) - vals[j + 1]
        items.append(
            {
                "radii": radii[j : j + 3].tolist(),
                "margin": float(np.linalg.eigvalsh(mid)[0]),
                "threshold": -tol * _scale(vals[j + 1]),
            }
        )
    return collect("three-circles", items)


def gauge_mean(source, disc=None, tol=1e-10, n=DEFAULT_SAMPLES):
    """``T(P, z0, r) = H(z0)^{-*} H(z0)^{-1}`` from the dual boundary factor.

    For a metric field the circle is resampled with doubled ``n`` until the
    factor residual ``sup ||H^* P H - Id||`` meets ``tol``.
    """
    while True:
        s = boundary_samples(source, disc, n)
        try:
            h, res = dual_boundary_factor(s, tol=tol)
            break
        except ConvergenceError:
            if isinstance(source, BoundarySamples) or n >= MAX_SAMPLES:
                raise
            n *= 2
    hinv = np.linalg.inv(h.coeffs[0])
    value = dagger(hinv) @ hinv
    return GaugeMean(s.disc, 0.5 * (value + dagger(value)), res, h, n)


def gauge_competitor_value(field, disc, k, n=DEFAULT_SAMPLES):
    """``K(z0)^{-*} S(K^* P K, z0, r) K(z0)^{-1}`` for a competitor gauge ``K``.

    ``K`` is a matrix polynomial in the global coordinate. ``T`` is the
    minimum of these values over holomorphic invertible ``K``.
    """
    field.domain.require_disc(disc)
    z = circle_samples(disc, n)
    kv = k(z)
    q = BoundarySamples(disc, dagger(kv) @ field(z) @ kv)
    sv = schur_mean(q).value
    kinv = np.linalg.inv(k(disc.z0))
    out = dagger(kinv) @ sv @ kinv
    return 0.5 * (out + dagger(out))


def certify_semipositive(field, discs=None, tol=1e-8, n=DEFAULT_SAMPLES, factor_tol=1e-10):
    """Check ``T(P, z0, r) <= P(z0)`` on each disc."""
    discs = default_disc_family(field.domain) if discs is None else list(discs)
    items = []
    for disc in discs:
        gm = gauge_mean(field, disc, tol=factor_tol, n=n)
        p0 = field(disc.z0)
        items.append(
            {
                "disc": disc_dict(disc),
                "margin": float(np.linalg.eigvalsh(p0 - gm.value)[0]),
                "factor_residual": gm.factor_residual,
                "threshold": -tol * _scale(p0),
            }
        )
    rep = collect("semipositive", items)
    rep.diagnostics["samples"] = n
    return rep


def radial_profile(field, z0, radii, n=DEFAULT_SAMPLES):
    """Rows ``(r, trace, lambda_min, lambda_max, margin)`` of ``S(P, z0, r)``.

    ``margin`` is ``lambda_min(S - P(z0))``.
    """
    p0 = field(z0)
    rows = []
    for r in radii:
        sm = schur_mean(field, DiscSpec(z0, r), n)
        ev = np.linalg.eigvalsh(sm.value)
        rows.append(
            {
                "r": float(r),
                "trace": float(np.trace(sm.value).real),
                "lambda_min": float(ev[0]),
                "lambda_max": float(ev[-1]),
                "margin": float(np.linalg.eigvalsh(sm.value - p0)[0]),
            }
        )
    return rows


def profile_csv(rows):
    buf = io.StringIO()
    if rows:
        w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        w.writerows({k: repr(v) if isinstance(v, float) else v for k, v in row.items()} for row in rows)
    return buf.getvalue()


def small_radius_ratio(field, z0, r, n=DEFAULT_SAMPLES):
    """``||S(r) - P(z0)|| / ||S(r/2) - P(z0)||``, close to 4 for smooth fields."""
    p0 = field(z0)
    big = schur_mean(field, DiscSpec(z0, r), n).value - p0
    small = schur_mean(field, DiscSpec(z0, r / 2), n).value - p0
    return float(np.linalg.norm(big, 2) / np.linalg.norm(small, 2))
