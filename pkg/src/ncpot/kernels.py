"""Hot inner loops, each with a numba implementation and a numpy fallback.

The numba path is used when numba imports and ``NCPOT_NO_JIT`` is unset.
Both implementations stay importable (``*_numba`` / ``*_numpy``) so tests
and ``benchmarks/bench_kernels.py`` can compare them directly.
"""

from __future__ import annotations

import os

import numpy as np
from scipy.linalg import solve_triangular

try:
    import numba
except ImportError:  # pragma: no cover - exercised only without numba
    numba = None

__all__ = [
    "JIT_ENABLED",
    "BandCholesky",
    "polyval_matrix",
    "polyval_matrix_numba",
    "polyval_matrix_numpy",
]

JIT_ENABLED = numba is not None and os.environ.get("NCPOT_NO_JIT", "").lower() not in (
    "1",
    "true",
    "yes",
)


def _njit(func):
    if numba is None:
        return func
    return numba.njit(cache=True)(func)


# ---------------------------------------------------------------------------
# Banded block-Toeplitz Cholesky, streamed one row at a time.
#
# The matrix T has block (I, J) = F_{J-I}, with F_{-n} = F_n^*.  Only the
# lower triangle is touched, so the kernel reads F_{I-J} for I >= J and
# uses T[r, c] = conj(F_{I-J}[c % d, r % d]).


def _band_chol_rows(coeffs, ring, r_start, r_stop):
    d = coeffs.shape[1]
    nmax = coeffs.shape[0] - 1
    p = ring.shape[1] - 1
    q = p + 1
    for r in range(r_start, r_stop):
        rr = r % q
        big_i = r // d
        a = r % d
        c0 = r - p
        if c0 < 0:
            c0 = 0
        for c in range(c0, r + 1):
            k = big_i - c // d
            if k <= nmax:
                s = np.conj(coeffs[k, c % d, a])
            else:
                s = 0.0j
            cr = c % q
            for l in range(c0, c):
                s -= ring[rr, r - l] * np.conj(ring[cr, c - l])
            if c < r:
                ring[rr, r - c] = s / ring[cr, 0].real
            else:
                if not s.real > 0.0:
                    return r
                ring[rr, 0] = np.sqrt(s.real)
    return -1


_band_chol_rows_numba = _njit(_band_chol_rows)


class BandCholesky:
    """Incremental Cholesky factor ``T_m = L_m L_m^*`` of a banded block-Toeplitz matrix.

    Leading principal submatrices of ``T_m`` are ``T_{m'}`` for ``m' < m``,
    so growing ``m`` only appends rows; nothing is recomputed.

    Parameters
    ----------
    coeffs : (N+1, d, d) complex array
        Nonnegative-index symbol coefficients ``F_0 .. F_N``.
    use_jit : bool, optional
        Force a path; defaults to :data:`JIT_ENABLED`.
    """

    def __init__(self, coeffs, use_jit=None):
        self.coeffs = np.ascontiguousarray(coeffs, dtype=np.complex128)
        self.N = self.coeffs.shape[0] - 1
        self.d = self.coeffs.shape[1]
        self.use_jit = JIT_ENABLED if use_jit is None else (use_jit and numba is not None)
        self.blocks = 0
        if self.use_jit:
            p = (self.N + 1) * self.d - 1
            self._ring = np.zeros((p + 1, p + 1), dtype=np.complex128)
        else:
            q = self.N + 1
            self._ring = np.zeros((q, q, self.d, self.d), dtype=np.complex128)

    def advance(self, m):
        """Extend the factorization to ``m`` block rows.

        Returns the scalar row index where the Cholesky pivot broke down,
        or -1 on success.
        """
        if m <= self.blocks:
            return -1
        if self.use_jit:
            bad = _band_chol_rows_numba(
                self.coeffs, self._ring, self.blocks * self.d, m * self.d
            )
        else:
            bad = self._advance_numpy(m)
        if bad < 0:
            self.blocks = m
        return int(bad)

    def _advance_numpy(self, m):
        F, ring, q, N = self.coeffs, self._ring, self.N + 1, self.N
        for i in range(self.blocks, m):
            ri = i % q
            j0 = max(0, i - N)
            for j in range(j0, i):
                rj = j % q
                s = F[i - j].conj().T.copy()
                for l in range(j0, j):
                    s -= ring[ri, i - l] @ ring[rj, j - l].conj().T
                # X L_jj^* = s  <=>  L_jj X^* = s^*
                ring[ri, i - j] = solve_triangular(
                    ring[rj, 0], s.conj().T, lower=True
                ).conj().T
            s = F[0].copy()
            for l in range(j0, i):
                blk = ring[ri, i - l]
                s -= blk @ blk.conj().T
            s = 0.5 * (s + s.conj().T)
            try:
                ring[ri, 0] = np.linalg.cholesky(s)
            except np.linalg.LinAlgError:
                return i * self.d
        return -1

    def last_block_row(self):
        """Blocks ``L[m-1, m-1-n]`` for ``n = 0..N`` as an (N+1, d, d) array."""
        m, d, N = self.blocks, self.d, self.N
        out = np.zeros((N + 1, d, d), dtype=np.complex128)
        if m == 0:
            return out
        i = m - 1
        if not self.use_jit:
            q = N + 1
            for n in range(min(N, i) + 1):
                out[n] = self._ring[i % q, n]
            return out
        q = self._ring.shape[0]
        for a in range(d):
            r = i * d + a
            for n in range(min(N, i) + 1):
                for b in range(d):
                    o = n * d + a - b
                    if 0 <= o <= r:
                        out[n, a, b] = self._ring[r % q, o]
        return out


# ---------------------------------------------------------------------------
# Horner evaluation of a matrix polynomial and its derivative at many points.


def polyval_matrix_numpy(coeffs, z, derivative=False):
    """Evaluate ``sum_n coeffs[n] z**n`` (and optionally its z-derivative).

    Returns an (M, d, d) array, or a pair of them when ``derivative`` is set.
    """
    coeffs = np.asarray(coeffs, dtype=np.complex128)
    z = np.asarray(z, dtype=np.complex128).reshape(-1)
    zz = z[:, None, None]
    val = np.broadcast_to(coeffs[-1], (z.size,) + coeffs.shape[1:]).copy()
    der = np.zeros_like(val)
    for c in coeffs[-2::-1]:
        if derivative:
            der = der * zz + val
        val = val * zz + c
    return (val, der) if derivative else val


def _polyval_loops(coeffs, z, val, der):
    nc = coeffs.shape[0]
    d1 = coeffs.shape[1]
    d2 = coeffs.shape[2]
    for m in range(z.shape[0]):
        w = z[m]
        for a in range(d1):
            for b in range(d2):
                v = coeffs[nc - 1, a, b]
                dv = 0.0j
                for n in range(nc - 2, -1, -1):
                    dv = dv * w + v
                    v = v * w + coeffs[n, a, b]
                val[m, a, b] = v
                der[m, a, b] = dv


_polyval_loops_numba = _njit(_polyval_loops)


def polyval_matrix_numba(coeffs, z, derivative=False):
    coeffs = np.ascontiguousarray(coeffs, dtype=np.complex128)
    z = np.ascontiguousarray(np.asarray(z, dtype=np.complex128).reshape(-1))
    val = np.empty((z.size,) + coeffs.shape[1:], dtype=np.complex128)
    der = np.empty_like(val)
    _polyval_loops_numba(coeffs, z, val, der)
    return (val, der) if derivative else val


polyval_matrix = polyval_matrix_numba if JIT_ENABLED else polyval_matrix_numpy
