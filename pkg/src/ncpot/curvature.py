"""Curvature of hermitian metric fields over a disc.

The curvature sign of ``P`` is that of ``P_zbar P^{-1} P_z - P_{z zbar}``:
seminegative when ``P_{z zbar} - P_zbar P^{-1} P_z >= 0``, semipositive when
the reverse holds, flat when it vanishes.

Fields are closed-form, so every derivative is exact:

* ``FlatSum``: ``P = sum_i H_i^* H_i`` (seminegative),
* ``DualFlatSum``: ``P = ((sum_i H_i^* H_i)^T)^{-1}`` (semipositive),
* ``Constant``, ``DirectSum`` (block diagonal) and ``Gauged`` (``K^* P K``).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from .circle import UNIT_DISC, DiscSpec, circle_samples, polar_grid
from .errors import DegeneracyError, DomainError, InputError
from .kernels import polyval_matrix
from .linalg import dagger, hermitian, is_psd
from .report import collect, disc_dict

__all__ = [
    "MetricField",
    "FlatSum",
    "DualFlatSum",
    "Constant",
    "DirectSum",
    "Gauged",
    "CurvatureSample",
    "Classification",
    "derivatives_exact",
    "curvature_defect",
    "defect_from_derivatives",
    "curvature_fd",
    "classify_field",
    "subharmonicity_test",
    "log_norm_psh_test",
    "default_step",
]


def _herm(m):
    return 0.5 * (m + dagger(m))


class MetricField:
    """Base class. Subclasses implement ``_derivatives`` on a flat array of points."""

    domain: DiscSpec = UNIT_DISC
    dim: int

    def derivatives(self, z, check=True):
        """``(P, P_z, P_zbar, P_{z zbar})`` at z (scalar or array)."""
        z_arr = np.asarray(z, dtype=np.complex128)
        if check:
            self.domain.require_points(z_arr)
        out = self._derivatives(z_arr.reshape(-1))
        return tuple(o.reshape(z_arr.shape + o.shape[1:]) for o in out)

    def __call__(self, z):
        z_arr = np.asarray(z, dtype=np.complex128)
        p = self._values(z_arr.reshape(-1))
        return p.reshape(z_arr.shape + p.shape[1:])

    def _values(self, z):
        return self._derivatives(z)[0]


class FlatSum(MetricField):
    """``P(z) = sum_i H_i(z)^* H_i(z)``.

    Terms need ``dim`` and ``value_and_derivative(z)``; a ``MatrixPolynomial``
    in the global coordinate z qualifies.
    """

    def __init__(self, terms, domain=UNIT_DISC):
        self.terms = list(terms)
        if not self.terms:
            raise InputError("a FlatSum needs at least one term")
        self.dim = self.terms[0].dim
        if any(t.dim != self.dim for t in self.terms):
            raise InputError("all terms must share one dimension")
        self.domain = domain

    def _derivatives(self, z):
        shape = (z.size, self.dim, self.dim)
        p, pz, pzz = (np.zeros(shape, dtype=np.complex128) for _ in range(3))
        for t in self.terms:
            h, dh = t.value_and_derivative(z)
            hs = dagger(h)
            p += hs @ h
            pz += hs @ dh
            pzz += dagger(dh) @ dh
        return _herm(p), pz, dagger(pz), _herm(pzz)

    def _values(self, z):
        p = np.zeros((z.size, self.dim, self.dim), dtype=np.complex128)
        for t in self.terms:
            h = t(z)
            p += dagger(h) @ h
        return _herm(p)


class DualFlatSum(MetricField):
    """``P = (S^T)^{-1}`` with ``S = sum_i H_i^* H_i``; derivatives by the chain rule.

    With ``R = S^T`` and ``Q = R^{-1}``: ``Q_z = -Q R_z Q`` and
    ``Q_{z zbar} = Q R_zbar Q R_z Q + Q R_z Q R_zbar Q - Q R_{z zbar} Q``.
    """

    max_condition = 1e12

    def __init__(self, terms, domain=UNIT_DISC):
        self.inner = FlatSum(terms, domain)
        self.terms = self.inner.terms
        self.dim = self.inner.dim
        self.domain = domain

    def _inverse(self, s):
        cond = np.linalg.cond(s)
        if not np.all(cond <= self.max_condition):
            raise DegeneracyError("inner sum is singular", condition=float(np.max(cond)))
        return _herm(np.linalg.inv(np.swapaxes(s, 1, 2)))

    def _derivatives(self, z):
        s, sz, szb, szz = self.inner._derivatives(z)
        q = self._inverse(s)
        rz, rzb, rzz = (np.swapaxes(m, 1, 2) for m in (sz, szb, szz))
        qz = -q @ rz @ q
        qzb = dagger(qz)
        qzz = q @ rzb @ q @ rz @ q + q @ rz @ q @ rzb @ q - q @ rzz @ q
        return q, qz, qzb, _herm(qzz)

    def _values(self, z):
        return self._inverse(self.inner._values(z))


class Constant(MetricField):
    """``P`` constant PSD matrix; all derivatives vanish."""

    def __init__(self, matrix, domain=UNIT_DISC):
        m = hermitian(matrix)
        ok, margin = is_psd(m)
        if not ok:
            raise InputError("constant metric must be PSD", margin=margin)
        self.matrix = m
        self.dim = m.shape[0]
        self.domain = domain

    def _derivatives(self, z):
        p = np.broadcast_to(self.matrix, (z.size, self.dim, self.dim)).copy()
        zero = np.zeros_like(p)
        return p, zero, zero.copy(), zero.copy()


class DirectSum(MetricField):
    """Block-diagonal combination of fields on a common domain."""

    def __init__(self, fields):
        self.fields = list(fields)
        if not self.fields:
            raise InputError("empty direct sum")
        self.domain = self.fields[0].domain
        self.dim = sum(f.dim for f in self.fields)

    def _derivatives(self, z):
        out = [np.zeros((z.size, self.dim, self.dim), dtype=np.complex128) for _ in range(4)]
        i = 0
        for f in self.fields:
            parts = f._derivatives(z)
            for o, part in zip(out, parts):
                o[:, i : i + f.dim, i : i + f.dim] = part
            i += f.dim
        return tuple(out)


class Gauged(MetricField):
    """``K(z)^* P(z) K(z)`` for a holomorphic matrix polynomial ``K``."""

    def __init__(self, field, k):
        if k.dim != field.dim:
            raise InputError("gauge dimension mismatch")
        self.field = field
        self.k = k
        self.dim = field.dim
        self.domain = field.domain

    def _derivatives(self, z):
        p, pz, pzb, pzz = self.field._derivatives(z)
        k, dk = self.k.value_and_derivative(z)
        ks, dks = dagger(k), dagger(dk)
        qz = ks @ pz @ k + ks @ p @ dk
        qzz = dks @ pz @ k + ks @ pzz @ k + dks @ p @ dk + ks @ pzb @ dk
        return _herm(ks @ p @ k), qz, dagger(qz), _herm(qzz)


def derivatives_exact(field, z):
    return field.derivatives(z)


@dataclass(frozen=True, eq=False)
class CurvatureSample:
    """Curvature defects at one point.

    ``defect_neg = P_{z zbar} - P_zbar P^{-1} P_z`` and
    ``defect_pos = -defect_neg``; the margins are their smallest eigenvalues
    and ``scale`` is ``1 + ||P_{z zbar}|| + ||P_zbar P^{-1} P_z||``.
    """

    z: complex
    defect_neg: np.ndarray
    defect_pos: np.ndarray
    margin_neg: float
    margin_pos: float
    scale: float

    def is_seminegative(self, tol=1e-9):
        return self.margin_neg >= -tol * self.scale

    def is_semipositive(self, tol=1e-9):
        return self.margin_pos >= -tol * self.scale

    def is_flat(self, tol=1e-9):
        return self.is_seminegative(tol) and self.is_semipositive(tol)


def defect_from_derivatives(z, p, pz, pzb, pzz):
    """Assemble a ``CurvatureSample`` from ``(P, P_z, P_zbar, P_{z zbar})`` at one point.

    ``P_zbar P^{-1} P_z`` is formed as ``Y^* Y`` with ``Y = L^{-1} P_z`` and
    ``P = L L^*``, which keeps it PSD in floating point.
    """
    try:
        low = np.linalg.cholesky(_herm(p))
    except np.linalg.LinAlgError:
        raise DegeneracyError("P is not invertible at the point", z=str(complex(z))) from None
    s = np.abs(np.diag(low))
    if s.min() <= 1e-8 * s.max():
        raise DegeneracyError("P is numerically singular at the point", z=str(complex(z)))
    y = solve_triangular(low, pz, lower=True)
    term = _herm(dagger(y) @ y)
    neg = _herm(pzz) - term
    margin_neg = float(np.linalg.eigvalsh(neg)[0])
    margin_pos = float(np.linalg.eigvalsh(-neg)[0])
    scale = 1.0 + float(np.linalg.norm(pzz, 2)) + float(np.linalg.norm(term, 2))
    return CurvatureSample(complex(z), neg, -neg, margin_neg, margin_pos, scale)


def curvature_defect(field, z):
    """Exact curvature defects of ``field`` at the point z."""
    p, pz, pzb, pzz = field.derivatives(complex(z))
    return defect_from_derivatives(z, p, pz, pzb, pzz)


def default_step(field, z):
    """Fourth root of machine epsilon times the domain radius, clipped by the boundary."""
    disc = field.domain
    dist = disc.r - abs(complex(z) - disc.z0)
    return min(np.finfo(float).eps ** 0.25 * disc.r, 0.5 * dist)


def curvature_fd(field, z, step=None):
    """Curvature defects from second-order central differences of ``P``.

    Raises
    ------
    DomainError
        If z is closer than ``2 * step`` to the boundary of the field's domain.
    """
    z = complex(z)
    disc = field.domain
    dist = disc.r - abs(z - disc.z0)
    h = default_step(field, z) if step is None else float(step)
    if not (h > 0 and dist >= 2 * h * (1 - 1e-12)):
        raise DomainError("finite-difference stencil leaves the domain", step=h, distance=dist)
    pts = np.array([z, z + h, z - h, z + 1j * h, z - 1j * h])
    p0, pe, pw, pn, ps = field(pts)
    px = (pe - pw) / (2 * h)
    py = (pn - ps) / (2 * h)
    pz = 0.5 * (px - 1j * py)
    pzb = 0.5 * (px + 1j * py)
    pzz = (pe + pw + pn + ps - 4 * p0) / (4 * h * h)
    return defect_from_derivatives(z, p0, pz, pzb, _herm(pzz))


@dataclass(frozen=True)
class Classification:
    label: str
    margin_neg: float
    margin_pos: float
    witness_neg: complex
    witness_pos: complex
    points: int

    def to_dict(self):
        return {
            "label": self.label,
            "margin_neg": self.margin_neg,
            "margin_pos": self.margin_pos,
            "witness_neg": [self.witness_neg.real, self.witness_neg.imag],
            "witness_pos": [self.witness_pos.real, self.witness_pos.imag],
            "points": self.points,
        }


def classify_field(field, grid=None, tol=1e-9):
    """Curvature class over a grid: flat, seminegative, semipositive or indefinite.

    Margins are relative (divided by each sample's ``scale``); the witnesses
    are the points with the worst relative margins.
    """
    z = polar_grid(field.domain, 6, 12, 0.9) if grid is None else np.ravel(grid)
    p, pz, pzb, pzz = field.derivatives(z)
    samples = [defect_from_derivatives(*args) for args in zip(z, p, pz, pzb, pzz)]
    rel_neg = np.array([s.margin_neg / s.scale for s in samples])
    rel_pos = np.array([s.margin_pos / s.scale for s in samples])
    neg_ok = bool(np.all(rel_neg >= -tol))
    pos_ok = bool(np.all(rel_pos >= -tol))
    label = {
        (True, True): "flat",
        (True, False): "seminegative",
        (False, True): "semipositive",
        (False, False): "indefinite",
    }[(neg_ok, pos_ok)]
    i, j = int(np.argmin(rel_neg)), int(np.argmin(rel_pos))
    return Classification(
        label, float(rel_neg[i]), float(rel_pos[j]), complex(z[i]), complex(z[j]), len(z)
    )


def _eval_vector_poly(phi, z):
    c = np.asarray(phi, dtype=np.complex128)
    if c.ndim == 1:
        c = c[None]
    return polyval_matrix(c[:, :, None], z)[:, :, 0]


def subharmonicity_test(field, phi, discs, tol=1e-9, n=256):
    """Sub-mean-value test of ``u = <P phi, phi>`` for a holomorphic vector ``phi``.

    ``phi`` is an (m+1, d) array of Taylor coefficients in z. Each disc
    passes when ``mean_circle u - u(z0) >= -tol * (1 + |u(z0)|)``.
    """
    items = []
    for k, disc in enumerate(discs):
        field.domain.require_disc(disc)
        z = np.concatenate([[disc.z0], circle_samples(disc, n)])
        v = _eval_vector_poly(phi, z)
        u = np.einsum("ma,mab,mb->m", v.conj(), field(z), v).real
        margin = float(u[1:].mean() - u[0])
        items.append(
            {
                "disc": disc_dict(disc),
                "center_value": float(u[0]),
                "mean_value": float(u[1:].mean()),
                "margin": margin,
                "threshold": -tol * (1.0 + abs(u[0])),
            }
        )
    return collect("subharmonicity", items)


def log_norm_psh_test(p, q, a, discs, tol=1e-9, n=256):
    """Sub-mean-value test of ``log ||Q^{1/2} A P^{-1/2}||`` for flat ``P``, ``Q``.

    With ``P = H_p^* H_p`` and ``Q = H_q^* H_q`` the norm equals
    ``||H_q A H_p^{-1}||``, which is what is evaluated.
    """
    items = []
    for disc in discs:
        p.domain.require_disc(disc)
        z = np.concatenate([[disc.z0], circle_samples(disc, n)])
        hp, hq, av = p.factor(z), q.factor(z), a(z)
        s = np.linalg.svd(hp, compute_uv=False)
        if np.any(s[:, -1] <= 1e-13 * s[:, 0]):
            raise DegeneracyError("P is singular on the disc")
        m = hq @ av @ np.linalg.inv(hp)
        ln = np.log(np.linalg.norm(m, 2, axis=(1, 2)))
        items.append(
            {
                "disc": disc_dict(disc),
                "center_value": float(ln[0]),
                "mean_value": float(ln[1:].mean()),
                "margin": float(ln[1:].mean() - ln[0]),
                "threshold": -tol,
            }
        )
    return collect("log-norm-subharmonicity", items)
