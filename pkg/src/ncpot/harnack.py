"""The weighted shift with weights ``1/beta(n)`` and the resulting flat metrics
for which no Harnack inequality holds.

``beta(n)`` is the largest power of two dividing n. The truncations ``A_k``
drop the weights at multiples of ``2^k``; they are nilpotent, so
``H_k(zeta) = Id - zeta A_k`` is invertible for every zeta and
``P_k = L_k^{-*} L_k^{-1}`` with ``L_k(z) = H_k(2 z / z0) / (1 + 2/|z0|)`` is
a flat metric with ``P_k >= Id`` on the unit circle and ``P_k(0)`` a fixed
multiple of ``Id``, while ``||P_k(z0)||`` grows without bound.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.linalg import eigvalsh_tridiagonal, solve_triangular

from .curvature import FlatSum, curvature_defect
from .errors import DegeneracyError, InputError
from .poly import unit_circle

__all__ = [
    "beta",
    "shift_weights",
    "shift_matrix",
    "ResolventVector",
    "resolvent_vector",
    "product_identity_check",
    "NeumannFactor",
    "HarnackRecord",
    "HarnackFamily",
    "harnack_family",
    "family_csv",
    "noninvertible_limit_witness",
    "scalar_harnack_margin",
]


def beta(n):
    """Largest power of two dividing ``n >= 1``."""
    n = int(n)
    if n < 1:
        raise InputError("beta is defined for n >= 1", n=n)
    return n & -n


def _divides(k, m):
    return k is not None and m % (1 << k) == 0


def shift_weights(d, k=None):
    """Subdiagonal ``w[i-1] = A[i, i-1]`` (0-based), as exact Fractions."""
    if d < 2:
        raise InputError("dimension must be at least 2", d=d)
    if k is not None and k < 0:
        raise InputError("k must be nonnegative", k=k)
    return [Fraction(0) if _divides(k, i) else Fraction(1, beta(i)) for i in range(1, d)]


def shift_matrix(d, k=None):
    """The d x d truncation of ``A`` (``k=None``) or of ``A_k``.

    With 1-based indices the entry ``(n, n-1)`` is ``1/beta(n-1)``, set to 0
    for ``A_k`` when ``2^k`` divides ``n - 1``.
    """
    a = np.zeros((d, d))
    a[np.arange(1, d), np.arange(d - 1)] = [float(w) for w in shift_weights(d, k)]
    return a


@dataclass(frozen=True)
class ResolventVector:
    """Solution of ``(Id - zeta A_k) x = e_1``; ``exact`` holds Fractions for rational zeta."""

    x: np.ndarray
    exact: tuple | None
    norm_sq_exact: Fraction | None

    @property
    def norm(self):
        if self.norm_sq_exact is not None:
            return float(np.sqrt(float(self.norm_sq_exact)))
        return float(np.linalg.norm(self.x))


def _as_rational(zeta):
    if isinstance(zeta, (int, Fraction)) and not isinstance(zeta, bool):
        return Fraction(zeta)
    z = complex(zeta)
    if z.imag == 0 and float(z.real).is_integer():
        return Fraction(int(z.real))
    return None


def resolvent_vector(k, zeta, d):
    """Forward substitution for ``(Id - zeta A_k) x = e_1``.

    ``x_1 = 1`` and ``x_n = zeta x_{n-1} / beta(n-1)``, except ``x_n = 0``
    when ``2^k`` divides ``n - 1`` (after which the solution stays 0).
    Integer or Fraction zeta runs in exact rational arithmetic.
    """
    weights = shift_weights(d, k)
    q = _as_rational(zeta)
    if q is not None:
        xs = [Fraction(1)]
        for w in weights:
            xs.append(q * w * xs[-1])
        norm_sq = sum(v * v for v in xs)
        return ResolventVector(np.array([float(v) for v in xs]), tuple(xs), norm_sq)
    z = complex(zeta)
    x = np.empty(d, dtype=np.complex128)
    x[0] = 1.0
    for i, w in enumerate(weights, start=1):
        x[i] = z * float(w) * x[i - 1]
    return ResolventVector(x, None, None)


def product_identity_check(k):
    """Exact check of ``prod_{m < 2^k} beta(m) = 2^{sum_j j 2^{k-j-1}} < 2^{2^k}``.

    Returns ``(lhs, rhs, equal, below)`` as Python integers and booleans.
    """
    if k < 1:
        raise InputError("k must be at least 1", k=k)
    n = 1 << k
    lhs = 1
    for m in range(1, n):
        lhs *= beta(m)
    exponent = sum(j * (1 << (k - j - 1)) for j in range(k))
    rhs = 1 << exponent
    return lhs, rhs, lhs == rhs, lhs < (1 << n)


class NeumannFactor:
    """``H(z) = c (Id - s z A)^{-1}``, a matrix polynomial when ``A`` is nilpotent.

    Evaluated by triangular solves instead of expanding the finite Neumann
    series; ``H'(z) = s H(z) A (Id - s z A)^{-1}``.
    """

    def __init__(self, a, s, c=1.0):
        self.a = np.asarray(a, dtype=np.complex128)
        self.s = complex(s)
        self.c = c
        self.dim = self.a.shape[0]

    def _inv(self, z):
        m = np.eye(self.dim) - self.s * z * self.a
        return solve_triangular(m, np.eye(self.dim, dtype=np.complex128), lower=True)

    def value_and_derivative(self, z):
        z = np.asarray(z, dtype=np.complex128).reshape(-1)
        val = np.empty((z.size, self.dim, self.dim), dtype=np.complex128)
        der = np.empty_like(val)
        for i, w in enumerate(z):
            inv = self._inv(w)
            val[i] = self.c * inv
            der[i] = self.s * val[i] @ self.a @ inv
        return val, der

    def __call__(self, z):
        return self.value_and_derivative(z)[0]


def _max_norm_sq_on_circle(weights, eps, s, n):
    """``max_{|z|=1} ||eps (Id - s z A)||^2`` via the tridiagonal ``L^* L``."""
    w = np.asarray(weights, dtype=float)
    d = w.size + 1
    worst = 0.0
    for z in unit_circle(n):
        zeta = s * z
        diag = np.ones(d)
        diag[:-1] += abs(zeta) ** 2 * w**2
        off = abs(zeta) * w
        # L^* L has off-diagonal -conj(zeta) w; a diagonal unitary makes it real
        top = eigvalsh_tridiagonal(diag, -off, select="i", select_range=(d - 1, d - 1))
        worst = max(worst, float(top[0]))
    return eps * eps * worst


@dataclass(frozen=True)
class HarnackRecord:
    k: int
    norm_exact: float
    lower_bound: float
    p0_scalar: float
    boundary_min_eig: float
    flat_defect: float


@dataclass
class HarnackFamily:
    z0: complex
    d: int
    epsilon: Fraction
    records: list = field(default_factory=list)

    def p0_exact(self):
        return 1 / (self.epsilon * self.epsilon)

    def nondecreasing(self, rel=1e-12):
        v = [r.norm_exact for r in self.records]
        return all(b >= a * (1 - rel) for a, b in zip(v, v[1:]))


def _block_sizes(d, k):
    """Sizes of the distinct diagonal blocks of ``A_k`` (it decouples at multiples of ``2^k``)."""
    if k is None or (1 << k) >= d:
        return [d]
    b = 1 << k
    return [b] + ([d % b] if d % b else [])


def _block_norm(m, k):
    """Operator norm of a matrix with the block pattern of ``A_k``.

    The off-block entries must vanish exactly; the norm is then the largest
    norm of the diagonal blocks.
    """
    d = m.shape[0]
    b = d if k is None or (1 << k) >= d else 1 << k
    mask = np.zeros((d, d), dtype=bool)
    for i in range(0, d, b):
        mask[i : i + b, i : i + b] = True
    if np.any(m[~mask] != 0):
        raise DegeneracyError("inverse is not block diagonal")
    return max(float(np.linalg.norm(m[i : i + b, i : i + b], 2)) for i in range(0, d, b))


def harnack_family(z0, k_range, d, n_boundary=64, flat_points=None):
    """Records of the flat metrics ``P_k`` at ``z0`` for each k.

    ``epsilon = 1 / (1 + 2/|z0|)`` is kept as an exact Fraction of the float
    ``|z0|``, so ``P_k(0) = epsilon^{-2} Id`` is exact (25 for ``z0 = 1/2``).

    Per k: ``||P_k(z0)|| = epsilon^{-2} ||H_k(2)^{-1}||^2`` from a triangular
    solve, the lower bound ``epsilon^{-2} ||x||^2`` from the exact resolvent
    vector, ``1 / max ||L_k||^2`` on the boundary grid (``P_k >= Id`` iff it
    is at least 1) and the largest relative curvature defect at
    ``flat_points`` (default ``0, z0/2, z0, i z0/2``). ``P_k`` is block
    diagonal with identical blocks of size ``2^k``, so the curvature and
    ``P_k(0)`` checks run on the distinct blocks.
    """
    z0 = complex(z0)
    az = abs(z0)
    if not 0 < az < 1:
        raise InputError("z0 must lie in the punctured unit disc", z0=str(z0))
    inv_eps = 1 + 2 / Fraction(az)
    eps = 1 / inv_eps
    fam = HarnackFamily(z0, d, eps)
    s = 2 / z0
    pts = [0, z0 / 2, z0, 1j * z0 / 2] if flat_points is None else list(flat_points)
    for k in k_range:
        a = shift_matrix(d, k)
        inv = solve_triangular(np.eye(d) - 2 * a, np.eye(d), lower=True)
        scale = float(inv_eps * inv_eps)
        norm_exact = scale * _block_norm(inv, k) ** 2
        lower = float(inv_eps * inv_eps * resolvent_vector(k, 2, d).norm_sq_exact)
        top = _max_norm_sq_on_circle(shift_weights(d, k), float(eps), abs(s), n_boundary)
        defect = 0.0
        p0_scalar = None
        for size in _block_sizes(d, k):
            field_k = FlatSum([NeumannFactor(shift_matrix(size, k), s, float(inv_eps))])
            for z in pts:
                cs = curvature_defect(field_k, z)
                ev = np.linalg.eigvalsh(cs.defect_neg)
                defect = max(defect, float(np.max(np.abs(ev))) / cs.scale)
            p0 = field_k(0.0)
            val = float(p0[0, 0].real)
            exact = np.array_equal(p0, val * np.eye(size)) and p0_scalar in (None, val)
            p0_scalar = val if exact else float("nan")
        fam.records.append(HarnackRecord(k, norm_exact, lower, p0_scalar, 1.0 / top, defect))
    return fam


def family_csv(fam):
    lines = ["k,norm_p_z0,lower_bound,p0_scalar,boundary_min_eig,flat_defect"]
    for r in fam.records:
        lines.append(
            f"{r.k},{r.norm_exact!r},{r.lower_bound!r},{r.p0_scalar!r},"
            f"{r.boundary_min_eig!r},{r.flat_defect!r}"
        )
    return "\n".join(lines) + "\n"


def noninvertible_limit_witness(d, zeta=2):
    """Growth of the truncated resolvent of the untruncated shift.

    Returns a dict with the components ``x_{2^j}`` (exact when zeta is an
    integer), whether each exceeds 1/2 in modulus, ``||x||^2``, the bound
    ``(floor(log2 d) + 1) / 4`` and ``sigma_min(Id - zeta A)`` at
    truncations ``8, 16, ..., d``.
    """
    if d < 8:
        raise InputError("need d >= 8", d=d)
    rv = resolvent_vector(None, zeta, d)
    powers = [1 << j for j in range(d.bit_length()) if (1 << j) <= d]
    comps = [rv.exact[n - 1] if rv.exact else rv.x[n - 1] for n in powers]
    above = [abs(c) > Fraction(1, 2) if rv.exact else abs(c) > 0.5 for c in comps]
    norm_sq = rv.norm_sq_exact if rv.exact else float(np.sum(np.abs(rv.x) ** 2))
    bound = Fraction(len(powers), 4)
    sigma = {}
    m = 8
    while m <= d:
        mat = np.eye(m) - complex(zeta) * shift_matrix(m)
        sigma[m] = float(np.linalg.svd(mat, compute_uv=False)[-1])
        m *= 2
    return {
        "powers": powers,
        "components": comps,
        "above_half": above,
        "norm_sq": norm_sq,
        "norm_sq_bound": bound,
        "sigma_min": sigma,
    }


def scalar_harnack_margin(g, points):
    """``min_z ((1+|z|)/(1-|z|)) u(0) - u(z)`` for ``u = log |g|^2``.

    ``g`` is a scalar (1x1) holomorphic polynomial with ``|g| >= 1`` on the
    closed unit disc, so ``u`` is a nonnegative harmonic function and the
    classical Harnack bound says the margin is nonnegative.
    """
    z = np.asarray(points, dtype=np.complex128).ravel()
    if np.any(np.abs(z) >= 1):
        raise InputError("points must lie in the open unit disc")
    u0 = 2 * np.log(abs(g(0.0)[0, 0]))
    u = 2 * np.log(np.abs(g(z)[:, 0, 0]))
    return float(np.min((1 + np.abs(z)) / (1 - np.abs(z)) * u0 - u))
