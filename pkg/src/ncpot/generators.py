"""Random instances for self-tests, property tests and benchmarks."""

from __future__ import annotations

import numpy as np

from .curvature import DualFlatSum, FlatSum
from .poly import MatrixPolynomial

__all__ = [
    "complex_normal",
    "random_poly",
    "random_outer_poly",
    "random_symbol",
    "random_flat_sum",
    "random_dual_flat_sum",
    "random_unitary",
]


def complex_normal(rng, shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def random_poly(rng, d, degree, scale=1.0):
    return MatrixPolynomial(scale * complex_normal(rng, (degree + 1, d, d)))


def random_outer_poly(rng, d, degree, contraction=0.5):
    """``prod_j (Id - w B_j)`` with ``||B_j|| = contraction``, invertible on the closed disc."""
    out = MatrixPolynomial(np.eye(d, dtype=np.complex128)[None])
    for _ in range(degree):
        b = complex_normal(rng, (d, d))
        b *= contraction / np.linalg.norm(b, 2)
        out = out @ MatrixPolynomial(np.stack([np.eye(d), -b]))
    return out


def random_symbol(rng, d, degree, margin=0.1, n_check=1024):
    """``G^* G + delta Id`` with random G, delta chosen so the circle margin is ``margin``."""
    g = random_poly(rng, d, degree)
    f = g.gram()
    delta = max(0.0, margin - f.min_eigenvalue(n_check))
    return f.lift(delta)


def random_unitary(rng, d):
    q, r = np.linalg.qr(complex_normal(rng, (d, d)))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_flat_sum(rng, d, terms=None, degree=None, scale=0.5):
    """Up to 4 terms of degree up to 5; the first term has an identity constant part."""
    terms = terms or int(rng.integers(1, 5))
    polys = []
    for i in range(terms):
        deg = int(rng.integers(0, 6)) if degree is None else degree
        c = scale * complex_normal(rng, (deg + 1, d, d)) / max(1, deg)
        if i == 0:
            c[0] += np.eye(d)
        polys.append(MatrixPolynomial(c))
    return FlatSum(polys)


def random_dual_flat_sum(rng, d, terms=None, degree=None, scale=0.5):
    return DualFlatSum(random_flat_sum(rng, d, terms, degree, scale).terms)
