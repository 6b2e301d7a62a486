"""Matrix Fejer-Riesz factorization ``F = H^* H`` on the unit circle.

Two independent algorithms produce the outer factor:

* Bauer: Cholesky of the banded block-Toeplitz matrix with symbol ``F``;
  the last block row converges to the factor coefficients.
* Wilson: Newton iteration ``H <- [H^{-*} F H^{-1} + Id]_+ H`` on circle
  samples, where ``[.]_+`` keeps the analytic part and halves the zero mode.

Both are normalized so that ``H(0)`` is hermitian positive definite, which
fixes the unitary gauge.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .circle import BoundarySamples, winding_number
from .errors import (
    ConvergenceError,
    DegeneracyError,
    InputError,
    NotStrictlyPositiveError,
    ResolutionError,
)
from .kernels import BandCholesky
from .linalg import dagger, sqrt_psd
from .poly import MatrixLaurentPolynomial, MatrixPolynomial, unit_circle

__all__ = [
    "DEFAULT_TOL",
    "POSITIVITY_FLOOR",
    "FactorizationReport",
    "fejer_riesz_factor",
    "normalize_factor",
    "factor_bauer",
    "factor_wilson",
    "wilson_iteration",
    "dual_boundary_factor",
    "validation_grid_size",
    "circle_residual",
    "certify_winding",
]

DEFAULT_TOL = 1e-10
POSITIVITY_FLOOR = 1e-6
MAX_WILSON_SAMPLES = 1 << 15


@dataclass
class FactorizationReport:
    residual: float
    winding: int
    h0_hermiticity: float
    method: str
    iterations: int
    tail: float = 0.0
    min_singular: float = float("nan")
    samples: int = 0
    passed: bool = False

    def to_dict(self):
        return asdict(self)


def validation_grid_size(degree):
    """Eight times the Nyquist count for a degree-``2N`` product, as a power of two."""
    n = max(64, 8 * (2 * degree + 1))
    return 1 << (n - 1).bit_length()


def circle_residual(h, f, n):
    """``sup_w ||H(w)^* H(w) - F(w)||_2 / (1 + sup ||F||)`` on n points."""
    w = unit_circle(n)
    hv = h(w)
    fv = f.on_circle(n) if isinstance(f, MatrixLaurentPolynomial) else f
    diff = dagger(hv) @ hv - fv
    fnorm = float(np.max(np.linalg.norm(fv, 2, axis=(1, 2))))
    return float(np.max(np.linalg.norm(diff, 2, axis=(1, 2)))) / (1.0 + fnorm)


def certify_winding(h, n=256, max_n=1 << 16):
    """Winding number of ``det H`` on the unit circle, refining the grid as needed."""
    while True:
        try:
            return winding_number(np.linalg.det(h(unit_circle(n)))), n
        except ResolutionError:
            if n >= max_n:
                raise
            n *= 2


def _check_positive(f, n):
    vals = f.on_circle(n)
    margin = float(np.min(np.linalg.eigvalsh(vals)))
    fnorm = float(np.max(np.linalg.norm(vals, 2, axis=(1, 2))))
    if margin < POSITIVITY_FLOOR * fnorm or fnorm == 0.0:
        raise NotStrictlyPositiveError(
            "symbol is not uniformly positive definite on the circle",
            margin=margin,
            floor=POSITIVITY_FLOOR * fnorm,
        )
    return margin, fnorm


def normalize_factor(h):
    """Left-multiply by ``U = (H(0)^* H(0))^{1/2} H(0)^{-1}`` so ``H(0)`` is PSD.

    ``U`` is unitary, so ``H^* H`` is unchanged on the circle.
    """
    h0 = h.coeffs[0]
    s = np.linalg.svd(h0, compute_uv=False)
    if s[-1] <= 1e-14 * max(1.0, s[0]):
        raise DegeneracyError("H(0) is singular", sigma_min=float(s[-1]))
    u = sqrt_psd(h0.conj().T @ h0) @ np.linalg.inv(h0)
    defect = float(np.linalg.norm(u.conj().T @ u - np.eye(h.dim), 2))
    if defect > 1e-10:
        raise DegeneracyError("normalizing factor is not unitary", defect=defect)
    out = u @ h.coeffs
    out[0] = 0.5 * (out[0] + out[0].conj().T)
    return MatrixPolynomial(out)


def factor_bauer(f, tol=DEFAULT_TOL, max_blocks=1 << 16, use_jit=None):
    """Bauer's method: Cholesky of the growing block-Toeplitz section ``T_m``.

    With block ``(i, j)`` of ``T_m`` equal to ``F_{j-i}`` and ``T_m = L L^*``,
    ``H_n = L[m-1, m-1-n]^*``. ``m`` doubles until successive candidates
    differ by at most ``tol/4`` relative to their size and the candidate
    meets ``tol`` on the validation grid (two close candidates alone can
    stall by coincidence). The first candidate uses ``m = N + 1`` blocks, the
    smallest section whose last row holds all N+1 coefficients.

    Returns ``(H, blocks_used)``; ``H`` is not yet gauge-normalized.
    """
    chol = BandCholesky(f.nonnegative(), use_jit=use_jit)
    n_val = validation_grid_size(f.degree)
    prev = None
    diff = float("inf")
    m = f.degree + 1
    while True:
        bad = chol.advance(m)
        if bad >= 0:
            raise NotStrictlyPositiveError(
                "Cholesky breakdown: the Toeplitz section is not positive definite",
                row=bad,
            )
        cand = dagger(chol.last_block_row())
        if prev is not None:
            scale = 1.0 + float(np.max(np.linalg.norm(cand, 2, axis=(1, 2))))
            diff = float(np.max(np.linalg.norm(cand - prev, 2, axis=(1, 2))))
            if diff <= 0.25 * tol * scale:
                h = MatrixPolynomial(cand)
                if circle_residual(h, f, n_val) <= tol:
                    return h, m
        if m >= max_blocks:
            raise ConvergenceError(
                "Bauer iteration did not converge", blocks=m, difference=diff
            )
        prev = cand
        m *= 2


def _analytic_step(x_hat, anchor):
    """Fourier coefficients of ``Id + e`` with ``e + e^* = X - Id`` and ``e`` analytic.

    ``anchor='zero'`` halves the zero mode (Wilson); ``anchor='one'`` instead
    pins ``e(1) = 0`` (the normalization used by the perturbative solver).
    """
    M, d = x_hat.shape[0], x_hat.shape[1]
    eye = np.eye(d)
    g = np.zeros_like(x_hat)
    g[: M // 2] = x_hat[: M // 2]
    zero = x_hat[0] - eye
    g[0] = 0.25 * (zero + zero.conj().T)
    if anchor == "one":
        g[0] -= g[: M // 2].sum(axis=0)
    elif anchor != "zero":
        raise InputError(f"unknown anchor {anchor!r}")
    g[0] += eye
    return g


def wilson_iteration(fvals, h_init, tol=DEFAULT_TOL, max_iters=100, anchor="zero"):
    """Newton iteration for ``H^* H = F`` on M circle samples.

    Parameters
    ----------
    fvals : (M, d, d) array
        Hermitian positive definite samples at the M-th roots of unity.
    h_init : (d, d) array or (M, d, d) array
        Starting factor, invertible on the circle.

    Returns
    -------
    coeffs : (M/2, d, d) array
        Taylor coefficients of the factor.
    residual : float
        Relative sample residual ``sup ||H^*H - F|| / (1 + sup ||F||)``.
    iterations : int
    """
    M = fvals.shape[0]
    h = np.broadcast_to(np.asarray(h_init, dtype=np.complex128), fvals.shape).copy()
    fnorm = float(np.max(np.linalg.norm(fvals, 2, axis=(1, 2))))
    best = (np.inf, h, 0)
    stall = 0
    it = 0
    for it in range(1, max_iters + 1):
        hinv = np.linalg.inv(h)
        x = dagger(hinv) @ fvals @ hinv
        x = 0.5 * (x + dagger(x))
        g = np.fft.ifft(_analytic_step(np.fft.fft(x, axis=0) / M, anchor), axis=0) * M
        h = g @ h
        h_hat = np.fft.fft(h, axis=0) / M
        h_hat[M // 2 :] = 0.0
        h = np.fft.ifft(h_hat, axis=0) * M
        res = float(np.max(np.linalg.norm(dagger(h) @ h - fvals, 2, axis=(1, 2)))) / (1.0 + fnorm)
        if not np.isfinite(res):
            raise DegeneracyError("Wilson iterate lost invertibility on the circle")
        if res < best[0] * 0.5:
            stall = 0
        else:
            stall += 1
        if res < best[0]:
            best = (res, h, it)
        if res <= tol or stall >= 4:
            break
    res, h, _ = best
    coeffs = (np.fft.fft(h, axis=0) / M)[: M // 2]
    return coeffs, res, it


def factor_wilson(f, tol=DEFAULT_TOL, max_iters=100, samples=None):
    """Wilson's Newton iteration, resampled until the degree-N truncation validates.

    A sample count is accepted when the truncated factor meets ``tol`` on the
    validation grid and the dropped coefficients are below ``tol`` relative
    to the kept ones.

    Returns ``(H, iterations, tail, samples_used)``; ``H`` has degree N and
    ``tail`` is the largest dropped coefficient norm.
    """
    N = f.degree
    M = samples or max(256, 1 << (32 * (N + 1) - 1).bit_length())
    n_val = validation_grid_size(N)
    h0 = sqrt_psd(f.coeff(0))
    last = None
    while M <= MAX_WILSON_SAMPLES:
        coeffs, _, its = wilson_iteration(f.on_circle(M), h0, tol=0.1 * tol, max_iters=max_iters)
        series = MatrixPolynomial(coeffs)
        h = series.truncate(N)
        tail = series.tail_norm(N)
        res = circle_residual(h, f, n_val)
        last = (h, its, tail, M, res)
        # mass beyond degree N means the inverse is under-resolved on M points
        if res <= tol and tail <= tol * (1.0 + float(np.abs(h.coeffs).max())):
            return h, its, tail, M
        M *= 2
    h, its, tail, M, res = last
    raise ConvergenceError(
        "Wilson iteration did not reach tolerance", residual=res, samples=M, tail=tail
    )


def fejer_riesz_factor(f, tol=DEFAULT_TOL, method="bauer", max_blocks=1 << 16, max_iters=100):
    """Outer factor ``H`` (degree N) of a positive Laurent polynomial ``F``.

    Returns ``(H, report)`` with ``H(0)`` hermitian PSD, ``det H`` winding 0
    about the unit circle, and ``H^*H = F`` on the circle within
    ``tol * (1 + ||F||)``.

    Raises
    ------
    NotStrictlyPositiveError
        If the smallest circle eigenvalue is below ``1e-6 * ||F||``.
    ConvergenceError
        If the residual misses ``tol``; the report is attached.
    """
    if not isinstance(f, MatrixLaurentPolynomial):
        raise InputError("expected a MatrixLaurentPolynomial")
    N = f.degree
    n_val = validation_grid_size(N)
    _check_positive(f, n_val)
    tail = 0.0
    samples = 0
    if method == "bauer":
        h, iterations = factor_bauer(f, tol=tol, max_blocks=max_blocks)
    elif method == "wilson":
        h, iterations, tail, samples = factor_wilson(f, tol=tol, max_iters=max_iters)
    else:
        raise InputError(f"unknown factorization method {method!r}")
    h = normalize_factor(h)
    report = factor_report(h, f, method, iterations, tol, tail=tail, samples=samples)
    if report.residual > tol:
        raise ConvergenceError("factorization residual above tolerance", **report.to_dict())
    if not report.passed:
        raise DegeneracyError("factor is not outer (winding or invertibility)", **report.to_dict())
    return h, report


def factor_report(h, f, method, iterations, tol, tail=0.0, samples=0):
    n_val = validation_grid_size(f.degree)
    res = circle_residual(h, f, n_val)
    wind, n_used = certify_winding(h, n=n_val)
    smin = float(np.min(np.linalg.svd(h(unit_circle(n_used)), compute_uv=False)[:, -1]))
    h0 = h.coeffs[0]
    herm = float(np.linalg.norm(h0 - h0.conj().T, 2))
    passed = res <= tol and wind == 0 and herm <= 1e-10 and smin > 0
    return FactorizationReport(
        residual=res,
        winding=wind,
        h0_hermiticity=herm,
        method=method,
        iterations=int(iterations),
        tail=float(tail),
        min_singular=smin,
        samples=int(samples),
        passed=bool(passed),
    )


def _band_limit(values, rel=1e-13):
    n = values.shape[0]
    spec = np.linalg.norm(np.fft.fft(values, axis=0) / n, 2, axis=(1, 2))
    k = np.minimum(np.arange(n), n - np.arange(n))
    big = spec > rel * spec[0]
    return int(k[big].max()) if np.any(big) else 0


def dual_boundary_factor(p, tol=DEFAULT_TOL, degree=None, max_iters=100):
    """Holomorphic ``H`` with ``H^* P H = Id`` on the circle of ``p``'s disc.

    Factors ``(P^{-1})^T = K^* K`` by Wilson's iteration and returns
    ``H = K^T`` (in the disc's local coordinate), since then
    ``P^{-1} = H H^*``. The power series is truncated at ``degree``
    (default four times the band limit of ``P``), doubled until the residual
    ``sup ||H^* P H - Id||`` passes ``tol``.

    Returns ``(H, residual)``.
    """
    if not isinstance(p, BoundarySamples):
        raise InputError("expected BoundarySamples")
    vals = p.values
    margin = p.min_eigenvalue()
    if margin < POSITIVITY_FLOOR * p.sup_norm():
        raise NotStrictlyPositiveError("boundary data not strictly positive", margin=margin)
    n = p.n
    q = np.swapaxes(np.linalg.inv(vals), 1, 2)
    q = 0.5 * (q + dagger(q))
    h0 = sqrt_psd(q.mean(axis=0))
    coeffs, _, _ = wilson_iteration(q, h0, tol=0.1 * tol, max_iters=max_iters)
    series = MatrixPolynomial(np.swapaxes(coeffs, 1, 2))
    top = n // 2 - 1
    deg = min(top, max(1, 4 * _band_limit(vals))) if degree is None else min(top, degree)
    w = unit_circle(n)
    eye = np.eye(p.dim)
    while True:
        hv = series.truncate(deg)(w)
        res = float(np.max(np.linalg.norm(dagger(hv) @ vals @ hv - eye, 2, axis=(1, 2))))
        if res <= tol:
            return normalize_dual(series.truncate(deg)), res
        if deg >= top:
            raise ConvergenceError(
                "dual factor residual above tolerance; sample more points",
                residual=res,
                degree=deg,
                samples=n,
            )
        deg = min(top, 2 * deg)


def normalize_dual(h):
    """Right-multiply by a unitary so ``H(0)`` is hermitian; ``H^* P H`` is unchanged."""
    return normalize_factor(h.transpose()).transpose()
