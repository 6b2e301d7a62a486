"""Dense complex matrix kernel: hermitian/PSD structure, Schur complements, norms.

Matrices are plain ``complex128`` ndarrays. Functions that expect hermitian
input canonicalize it as ``(M + M^*) / 2`` after checking that the
antihermitian part is at rounding level.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegeneracyError, InputError

__all__ = [
    "PSD_TOL",
    "HERMITIAN_TOL",
    "as_matrix",
    "hermitian",
    "is_psd",
    "sqrt_psd",
    "inv_sqrt_psd",
    "schur_complement",
    "schur_complement_limit",
    "default_t_grid",
    "BlockMatrix2x2",
    "block_psd_test",
    "invertibility_certificate",
    "operator_norm",
    "min_singular",
    "dagger",
]

PSD_TOL = 1e-9
HERMITIAN_TOL = 1e-12
LIMIT_TOL = 1e-6


def dagger(m):
    """Conjugate transpose over the last two axes."""
    return np.conj(np.swapaxes(m, -1, -2))


def as_matrix(m):
    a = np.asarray(m, dtype=np.complex128)
    if a.ndim == 0:
        a = a.reshape(1, 1)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InputError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InputError("matrix has non-finite entries")
    return a


def hermitian(m, tol=HERMITIAN_TOL):
    """Validate and canonicalize a hermitian matrix (or a stack of them)."""
    a = np.asarray(m, dtype=np.complex128)
    if a.ndim < 2:
        a = as_matrix(a)
    if not np.all(np.isfinite(a)):
        raise InputError("matrix has non-finite entries")
    ah = dagger(a)
    defect = np.linalg.norm(a - ah, axis=(-2, -1))
    bound = tol * (1.0 + np.linalg.norm(a, axis=(-2, -1)))
    if np.any(defect > bound):
        raise InputError(
            "matrix is not hermitian", defect=float(np.max(defect - bound))
        )
    return 0.5 * (a + ah)


def operator_norm(m):
    return float(np.linalg.norm(as_matrix(m), 2))


def min_singular(m):
    return float(np.linalg.svd(as_matrix(m), compute_uv=False)[-1])


def is_psd(m, tol=PSD_TOL):
    """Return ``(passed, margin)`` where margin is the smallest eigenvalue.

    Passes when ``lambda_min >= -tol * (1 + ||m||_2)``.
    """
    h = hermitian(as_matrix(m))
    eig = np.linalg.eigvalsh(h)
    margin = float(eig[0])
    scale = 1.0 + float(np.max(np.abs(eig)))
    return margin >= -tol * scale, margin


def sqrt_psd(m):
    """Principal square root; negative eigenvalues within tolerance are clamped to 0."""
    h = hermitian(as_matrix(m))
    w, v = np.linalg.eigh(h)
    if w[0] < -PSD_TOL * (1.0 + abs(w[-1])):
        raise InputError("matrix is not positive semidefinite", margin=float(w[0]))
    w = np.clip(w, 0.0, None)
    s = (v * np.sqrt(w)) @ v.conj().T
    return 0.5 * (s + s.conj().T)


def inv_sqrt_psd(m):
    h = hermitian(as_matrix(m))
    w, v = np.linalg.eigh(h)
    if w[0] <= 0:
        raise DegeneracyError("matrix is not positive definite", margin=float(w[0]))
    s = (v / np.sqrt(w)) @ v.conj().T
    return 0.5 * (s + s.conj().T)


def schur_complement(a, b, c, t):
    """``a - b (c + t Id)^{-1} b^*`` for ``t > 0``."""
    if not t > 0:
        raise InputError("regularization t must be positive", t=t)
    a = hermitian(a)
    b = np.asarray(b, dtype=np.complex128)
    c = hermitian(c)
    ct = c + t * np.eye(c.shape[0])
    x = np.linalg.solve(ct, b.conj().T)
    out = a - b @ x
    return 0.5 * (out + out.conj().T)


def default_t_grid(c):
    scale = 1.0 + float(np.linalg.norm(c, 2))
    return np.array([1e-3, 1e-5, 1e-7, 1e-9]) * scale


def schur_complement_limit(a, b, c, t_grid=None, limit_tol=LIMIT_TOL):
    """Limit of ``a - b (c + t)^{-1} b^*`` as ``t`` decreases to 0.

    ``D(t) = b (c + t)^{-1} b^*`` is evaluated on a decreasing grid and the
    last two values are extrapolated linearly in ``t``. Returns
    ``(value, spread)`` where ``spread`` is ``||D(t_last) - D(t_prev)||_2``.

    Raises
    ------
    DegeneracyError
        If ``D(t)`` fails to be monotone or the spread exceeds
        ``limit_tol * (1 + ||a||_2)``; ``c`` is then effectively singular in a
        direction ``b`` reaches.
    """
    a = hermitian(a)
    b = np.asarray(b, dtype=np.complex128)
    c = hermitian(c)
    grid = default_t_grid(c) if t_grid is None else np.sort(np.asarray(t_grid, float))[::-1]
    if grid.size < 2 or grid[-1] <= 0:
        raise InputError("t-grid needs at least two positive values")
    eye = np.eye(c.shape[0])
    ds = []
    for t in grid:
        d_t = b @ np.linalg.solve(c + t * eye, b.conj().T)
        ds.append(0.5 * (d_t + d_t.conj().T))
    a_scale = 1.0 + float(np.linalg.norm(a, 2))
    for d_prev, d_next in zip(ds, ds[1:]):
        step = np.linalg.eigvalsh(d_next - d_prev)[0]
        if step < -limit_tol * (1.0 + float(np.linalg.norm(d_next, 2))):
            raise DegeneracyError("D(t) is not monotone in t", step=float(step))
    spread = float(np.linalg.norm(ds[-1] - ds[-2], 2))
    if not spread <= limit_tol * a_scale:
        raise DegeneracyError(
            "Schur complement limit diverges as t -> 0", spread=spread, t_min=float(grid[-1])
        )
    t1, t0 = grid[-2], grid[-1]
    d0 = ds[-1] + (ds[-1] - ds[-2]) * (t0 / (t1 - t0))
    out = a - d0
    return 0.5 * (out + out.conj().T), spread


@dataclass(frozen=True, eq=False)
class BlockMatrix2x2:
    """Hermitian block matrix ``[[a, b], [b^*, c]]``."""

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "a", hermitian(self.a))
        object.__setattr__(self, "c", hermitian(self.c))
        object.__setattr__(self, "b", np.asarray(self.b, dtype=np.complex128))

    def assemble(self):
        return np.block([[self.a, self.b], [self.b.conj().T, self.c]])


def block_psd_test(block, tol=PSD_TOL):
    return is_psd(block.assemble(), tol)[0]


def invertibility_certificate(ms, tol):
    """True iff every matrix has ``sigma_min >= tol``, i.e. ``sup ||m^{-1}|| <= 1/tol``."""
    ms = list(ms)
    if not ms:
        return True
    d = np.shape(ms[0])
    if any(np.shape(m) != d for m in ms):
        raise InputError("all matrices must share one dimension")
    smin = min(min_singular(m) for m in ms)
    return smin >= tol
