"""Circle sampling, circle averages, Fourier/Fejer analysis and the Schwarz integral.

Every disc works in its local coordinate ``w = (z - z0) / r``, so all
boundary data lives on the unit circle ``w = exp(i t)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegeneracyError, DomainError, InputError, ResolutionError
from .linalg import dagger, hermitian
from .poly import MatrixLaurentPolynomial, MatrixPolynomial, unit_circle

__all__ = [
    "DiscSpec",
    "UNIT_DISC",
    "BoundarySamples",
    "CircleMoments",
    "circle_samples",
    "default_sample_count",
    "average_moments",
    "fourier_coefficients",
    "fejer_truncate",
    "schwarz_integral",
    "winding_number",
    "is_power_of_two",
    "polar_grid",
]


def is_power_of_two(n):
    return isinstance(n, (int, np.integer)) and n > 0 and (n & (n - 1)) == 0


def default_sample_count(degree):
    n = max(256, 8 * (degree + 1))
    return 1 << (n - 1).bit_length()


@dataclass(frozen=True)
class DiscSpec:
    z0: complex = 0j
    r: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "z0", complex(self.z0))
        object.__setattr__(self, "r", float(self.r))
        if not (self.r > 0 and np.isfinite(self.r) and np.isfinite(self.z0)):
            raise InputError("disc radius must be positive and finite", r=self.r)

    def to_local(self, z):
        return (np.asarray(z, dtype=np.complex128) - self.z0) / self.r

    def from_local(self, w):
        return self.z0 + self.r * np.asarray(w, dtype=np.complex128)

    def contains(self, z, slack=1e-12):
        return np.abs(np.asarray(z) - self.z0) <= self.r * (1.0 + slack)

    def contains_disc(self, other, slack=1e-12):
        return abs(other.z0 - self.z0) + other.r <= self.r * (1.0 + slack)

    def require_points(self, z):
        if not np.all(self.contains(z)):
            raise DomainError("point outside the closed domain disc", z0=str(self.z0), r=self.r)

    def require_disc(self, other):
        if not self.contains_disc(other):
            raise DomainError(
                "disc is not contained in the domain",
                disc={"z0": [other.z0.real, other.z0.imag], "r": other.r},
            )


UNIT_DISC = DiscSpec(0j, 1.0)


def circle_samples(disc, n):
    """Points ``z0 + r exp(2 pi i j / n)``, ``j = 0..n-1``."""
    if not is_power_of_two(n):
        raise InputError("sample count must be a power of two", n=n)
    return disc.from_local(unit_circle(n))


@dataclass(frozen=True, eq=False)
class BoundarySamples:
    """Hermitian matrices sampled at the n equispaced points of a circle."""

    disc: DiscSpec
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.complex128)
        if v.ndim == 1:
            v = v[:, None, None]
        if v.ndim != 3 or v.shape[1] != v.shape[2]:
            raise InputError(f"samples must be an (n, d, d) stack, got {v.shape}")
        n = v.shape[0]
        if n < 4 or not is_power_of_two(n):
            raise InputError("sample count must be a power of two >= 4", n=n)
        object.__setattr__(self, "values", hermitian(v))

    @classmethod
    def from_function(cls, func, n, disc=UNIT_DISC):
        """Sample ``func(z)`` (vectorized over z) on the circle of ``disc``."""
        return cls(disc, func(circle_samples(disc, n)))

    @property
    def n(self):
        return self.values.shape[0]

    @property
    def dim(self):
        return self.values.shape[1]

    def min_eigenvalue(self):
        return float(np.min(np.linalg.eigvalsh(self.values)))

    def sup_norm(self):
        return float(np.max(np.linalg.norm(self.values, 2, axis=(1, 2))))


@dataclass(frozen=True, eq=False)
class CircleMoments:
    """Circle averages of P|dz|, P dz and P dz-bar, each normalized by 1/(2 pi r)."""

    m0: np.ndarray
    mplus: np.ndarray
    mminus: np.ndarray


def average_moments(samples):
    """Equal-weight trapezoidal rule for the three circle averages.

    With ``dz = i r e^{it} dt`` and ``|dz| = r dt`` the 1/(2 pi r)
    normalization leaves ``m0 = mean(P)``, ``mplus = i mean(P e^{it})``.
    """
    P = samples.values
    e = unit_circle(samples.n)
    m0 = P.mean(axis=0)
    m0 = 0.5 * (m0 + m0.conj().T)
    mplus = 1j * np.einsum("j,jab->ab", e, P) / samples.n
    return CircleMoments(m0=m0, mplus=mplus, mminus=mplus.conj().T)


def fourier_coefficients(samples, degree):
    """Coefficients ``F_k = mean_j P_j e^{-i k t_j}`` for ``|k| <= degree``."""
    n = samples.n
    if 2 * degree + 1 > n:
        raise InputError("degree too large for the sample count", degree=degree, n=n)
    spec = np.fft.fft(samples.values, axis=0) / n
    idx = np.arange(-degree, degree + 1) % n
    return MatrixLaurentPolynomial(spec[idx], symmetry_tol=1e-9)


def fejer_truncate(samples, degree, floor=0.0):
    """Fejer (Cesaro) mean of order ``degree``: ``F_k`` weighted by ``1 - |k|/(N+1)``.

    The Fejer kernel is nonnegative, so PSD samples give a Laurent polynomial
    that is PSD on the circle. Returns ``(laurent, margin)`` with the smallest
    eigenvalue on a validation grid of at least ``4 N`` points.

    Raises
    ------
    DegeneracyError
        If the margin falls below ``floor``; use a larger degree or lift the
        data by ``eps * Id``.
    """
    raw = fourier_coefficients(samples, degree)
    k = np.arange(-degree, degree + 1)
    weights = 1.0 - np.abs(k) / (degree + 1.0)
    out = MatrixLaurentPolynomial(raw.coeffs * weights[:, None, None])
    n_val = max(16, 1 << (4 * degree - 1).bit_length()) if degree else 16
    margin = out.min_eigenvalue(n_val)
    if margin < floor - 1e-12 * (1.0 + samples.sup_norm()):
        raise DegeneracyError(
            "Fejer truncation lost the positivity floor; raise the degree or lift by eps*Id",
            margin=margin,
            floor=floor,
        )
    return out, margin


def schwarz_integral(samples):
    """Taylor coefficients of the Schwarz integral of hermitian circle data.

    ``s_0 = f_0 / 2`` and ``s_k = f_k`` for ``1 <= k < n/2``, so that
    ``s + s^* = f`` on the circle up to the band limit.
    """
    n = samples.n
    spec = np.fft.fft(samples.values, axis=0) / n
    s = spec[: n // 2].copy()
    s[0] = 0.25 * (s[0] + s[0].conj().T)
    return MatrixPolynomial(s)


def winding_number(values):
    """Winding number about 0 of a closed sampled curve of nonzero complex values.

    Raises
    ------
    ResolutionError
        If a phase step reaches pi/2; resample with twice as many points.
    """
    v = np.asarray(values, dtype=np.complex128).reshape(-1)
    if v.size < 2:
        raise InputError("need at least two values")
    if np.any(v == 0) or not np.all(np.isfinite(v)):
        raise DegeneracyError("curve passes through zero")
    steps = np.angle(np.roll(v, -1) / v)
    worst = float(np.max(np.abs(steps)))
    if worst >= np.pi / 2:
        raise ResolutionError("phase step too large, refine the sampling", step=worst)
    return int(np.rint(steps.sum() / (2 * np.pi)))


def polar_grid(disc, n_radii=8, n_angles=16, rmax=0.95):
    """Center plus ``n_radii x n_angles`` points on circles of radius up to ``rmax * r``."""
    rho = np.linspace(rmax / n_radii, rmax, n_radii)
    t = 2 * np.pi * np.arange(n_angles) / n_angles
    w = (rho[:, None] * np.exp(1j * t)[None, :]).ravel()
    return disc.from_local(np.concatenate([[0j], w]))


def hermitian_stack(values):
    return 0.5 * (values + dagger(values))
