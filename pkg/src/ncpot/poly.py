"""Matrix polynomials ``H(w) = sum_{n>=0} H_n w^n`` and hermitian Laurent polynomials."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError
from .kernels import polyval_matrix

__all__ = ["MatrixPolynomial", "MatrixLaurentPolynomial", "unit_circle"]


def unit_circle(n):
    """The n equispaced points ``exp(2 pi i j / n)``."""
    return np.exp(2j * np.pi * np.arange(n) / n)


def _as_coeff_stack(coeffs):
    c = np.asarray(coeffs, dtype=np.complex128)
    if c.ndim == 2:
        c = c[None]
    if c.ndim != 3 or c.shape[1] != c.shape[2] or c.shape[0] == 0:
        raise InputError(f"expected an (N+1, d, d) coefficient stack, got shape {c.shape}")
    if not np.all(np.isfinite(c)):
        raise InputError("coefficients must be finite")
    return c


@dataclass(frozen=True, eq=False)
class MatrixPolynomial:
    """Holomorphic matrix polynomial with coefficients ``coeffs[n] = H_n``."""

    coeffs: np.ndarray

    # let ``ndarray @ MatrixPolynomial`` reach __rmatmul__
    __array_ufunc__ = None

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _as_coeff_stack(self.coeffs))

    @classmethod
    def constant(cls, m):
        return cls(np.asarray(m, dtype=np.complex128)[None])

    @property
    def degree(self):
        return self.coeffs.shape[0] - 1

    @property
    def dim(self):
        return self.coeffs.shape[1]

    def __call__(self, w):
        w_arr = np.asarray(w, dtype=np.complex128)
        out = polyval_matrix(self.coeffs, w_arr.reshape(-1))
        return out.reshape(w_arr.shape + out.shape[1:])

    def value_and_derivative(self, w):
        w_arr = np.asarray(w, dtype=np.complex128)
        val, der = polyval_matrix(self.coeffs, w_arr.reshape(-1), derivative=True)
        shape = w_arr.shape + val.shape[1:]
        return val.reshape(shape), der.reshape(shape)

    def derivative(self):
        if self.degree == 0:
            return MatrixPolynomial(np.zeros_like(self.coeffs))
        n = np.arange(1, self.degree + 1)[:, None, None]
        return MatrixPolynomial(self.coeffs[1:] * n)

    def __matmul__(self, other):
        if isinstance(other, MatrixPolynomial):
            a, b = self.coeffs, other.coeffs
            out = np.zeros((a.shape[0] + b.shape[0] - 1, a.shape[1], b.shape[2]), complex)
            for i in range(a.shape[0]):
                out[i : i + b.shape[0]] += a[i] @ b
            return MatrixPolynomial(out)
        return MatrixPolynomial(self.coeffs @ np.asarray(other))

    def __rmatmul__(self, other):
        return MatrixPolynomial(np.asarray(other) @ self.coeffs)

    def __mul__(self, scalar):
        return MatrixPolynomial(self.coeffs * scalar)

    __rmul__ = __mul__

    def transpose(self):
        return MatrixPolynomial(np.swapaxes(self.coeffs, 1, 2))

    def truncate(self, degree):
        return MatrixPolynomial(self.coeffs[: degree + 1])

    def trimmed(self, rel=1e-15):
        """Drop trailing coefficients below ``rel`` times the largest one."""
        norms = np.linalg.norm(self.coeffs, 2, axis=(1, 2))
        keep = np.nonzero(norms > rel * norms.max())[0] if norms.max() > 0 else [0]
        return self.truncate(int(keep[-1]))

    def tail_norm(self, degree):
        """Largest coefficient norm beyond ``degree``."""
        tail = self.coeffs[degree + 1 :]
        if tail.shape[0] == 0:
            return 0.0
        return float(max(np.linalg.norm(c, 2) for c in tail))

    def gram(self):
        """The Laurent polynomial ``H(w)^* H(w)`` restricted to the unit circle."""
        c = self.coeffs
        N = self.degree
        out = np.zeros((2 * N + 1, self.dim, self.dim), dtype=np.complex128)
        for k in range(N + 1):
            acc = sum(c[n].conj().T @ c[n + k] for n in range(N + 1 - k))
            out[N + k] = acc
            if k:
                out[N - k] = acc.conj().T
        return MatrixLaurentPolynomial(out)


@dataclass(frozen=True, eq=False)
class MatrixLaurentPolynomial:
    """``F(w) = sum_{n=-N}^{N} F_n w^n`` with ``F_{-n} = F_n^*``.

    ``coeffs`` has shape (2N+1, d, d) with ``coeffs[N + n] = F_n``.
    """

    coeffs: np.ndarray
    symmetry_tol: float = 1e-12

    def __post_init__(self):
        c = _as_coeff_stack(self.coeffs)
        if c.shape[0] % 2 != 1:
            raise InputError("a Laurent polynomial needs an odd number of coefficients")
        N = c.shape[0] // 2
        scale = 1.0 + float(np.max(np.abs(c)))
        asym = float(np.max(np.abs(c - np.conj(np.swapaxes(c[::-1], 1, 2)))))
        if asym > self.symmetry_tol * scale:
            raise InputError(
                "Laurent coefficients violate F_{-n} = F_n^*", asymmetry=asym
            )
        # canonical form: average each pair so the symmetry is exact
        c = 0.5 * (c + np.conj(np.swapaxes(c[::-1], 1, 2)))
        c[N] = 0.5 * (c[N] + c[N].conj().T)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def from_nonnegative(cls, coeffs):
        """Build from ``F_0 .. F_N``; negative indices are filled by symmetry."""
        c = _as_coeff_stack(coeffs)
        neg = np.conj(np.swapaxes(c[:0:-1], 1, 2))
        return cls(np.concatenate([neg, c]))

    @property
    def degree(self):
        return self.coeffs.shape[0] // 2

    @property
    def dim(self):
        return self.coeffs.shape[1]

    def coeff(self, n):
        N = self.degree
        if abs(n) > N:
            return np.zeros((self.dim, self.dim), dtype=np.complex128)
        return self.coeffs[N + n]

    def nonnegative(self):
        """``F_0 .. F_N`` as an (N+1, d, d) array."""
        return self.coeffs[self.degree :]

    def __call__(self, w):
        w_arr = np.asarray(w, dtype=np.complex128)
        flat = w_arr.reshape(-1)
        N = self.degree
        pos = polyval_matrix(self.coeffs[N:], flat)
        neg = polyval_matrix(self.coeffs[N::-1], 1.0 / flat)
        out = pos + neg - self.coeffs[N]
        return out.reshape(w_arr.shape + out.shape[1:])

    def on_circle(self, n):
        """Values at the n-th roots of unity; hermitian by construction."""
        vals = self(unit_circle(n))
        return 0.5 * (vals + np.conj(np.swapaxes(vals, 1, 2)))

    def sup_norm(self, n=None):
        n = n or max(64, 16 * (self.degree + 1))
        return float(np.max(np.linalg.norm(self.on_circle(n), 2, axis=(1, 2))))

    def min_eigenvalue(self, n=None):
        n = n or max(64, 16 * (self.degree + 1))
        return float(np.min(np.linalg.eigvalsh(self.on_circle(n))))

    def __add__(self, other):
        if isinstance(other, MatrixLaurentPolynomial):
            N = max(self.degree, other.degree)
            out = np.zeros((2 * N + 1, self.dim, self.dim), dtype=np.complex128)
            out[N - self.degree : N + self.degree + 1] += self.coeffs
            out[N - other.degree : N + other.degree + 1] += other.coeffs
            return MatrixLaurentPolynomial(out)
        # hermitian constant
        out = self.coeffs.copy()
        out[self.degree] = out[self.degree] + np.asarray(other)
        return MatrixLaurentPolynomial(out)

    def lift(self, eps):
        """``F + eps * Id``: the explicit strict-positivity lift."""
        return self + eps * np.eye(self.dim)
