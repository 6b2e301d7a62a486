"""Quick seeded invariant checks behind ``ncpot selftest``."""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from . import kernels
from .circle import DiscSpec, BoundarySamples
from .curvature import classify_field, curvature_defect
from .dirichlet import solve_dirichlet
from .generators import random_dual_flat_sum, random_flat_sum, random_outer_poly, random_symbol
from .harnack import harnack_family, product_identity_check
from .meanvalue import certify_seminegative
from .poly import unit_circle
from .specfact import circle_residual, fejer_riesz_factor, normalize_factor

__all__ = ["run_selftest"]


def _factor_checks(rng):
    f = random_symbol(rng, 3, 4)
    out = {}
    for method in ("bauer", "wilson"):
        h, rep = fejer_riesz_factor(f, tol=1e-10, method=method)
        out[f"factor_{method}_residual"] = rep.passed and circle_residual(h, f, 256) <= 1e-9
    h, _ = fejer_riesz_factor(f)
    nh = normalize_factor(h)
    out["normalize_idempotent"] = bool(np.abs(normalize_factor(nh).coeffs - nh.coeffs).max() <= 1e-12)
    return out


def _dirichlet_check(rng):
    h = random_outer_poly(rng, 2, 3)
    w = unit_circle(128)
    vals = h(w)
    f = BoundarySamples(DiscSpec(), np.conj(np.swapaxes(vals, -1, -2)) @ vals)
    fm = solve_dirichlet(f, degree=8)
    z = 0.6 * unit_circle(16)
    hz = h(z)
    want = np.conj(np.swapaxes(hz, -1, -2)) @ hz
    return {"dirichlet_recovers_flat": bool(np.abs(fm(z) - want).max() <= 1e-9)}


def _curvature_checks(rng):
    grid = 0.5 * unit_circle(8)
    neg = classify_field(random_flat_sum(rng, 2), grid)
    pos = classify_field(random_dual_flat_sum(rng, 2), grid)
    return {
        "flat_sum_seminegative": neg.label in ("seminegative", "flat"),
        "dual_flat_sum_semipositive": pos.label in ("semipositive", "flat"),
    }


def _meanvalue_check(rng):
    field = random_flat_sum(rng, 2, terms=2, degree=2)
    discs = [DiscSpec(0.2, 0.3), DiscSpec(-0.1j, 0.5)]
    return {"mean_value_seminegative": certify_seminegative(field, discs, n=128).passed}


def _harnack_checks():
    fam = harnack_family(0.5, [1, 2], 16)
    ok = all(product_identity_check(k)[2] for k in range(1, 6))
    return {
        "harnack_center_value": all(r.p0_scalar == Fraction(25) for r in fam.records),
        "harnack_lower_bound": all(r.norm_exact >= r.lower_bound for r in fam.records),
        "product_identities": ok,
    }


def _kernel_check(rng):
    c = rng.standard_normal((5, 3, 3)) + 1j * rng.standard_normal((5, 3, 3))
    z = 0.7 * unit_circle(32)
    a = kernels.polyval_matrix_numpy(c, z)
    b = kernels.polyval_matrix_numba(c, z)
    return {"kernel_paths_agree": bool(np.abs(a - b).max() <= 1e-12)}


def run_selftest(seed=0):
    """Run every check; returns ``{name: bool}`` in a fixed order."""
    rng = np.random.default_rng(seed)
    out = {}
    out.update(_kernel_check(rng))
    out.update(_factor_checks(rng))
    out.update(_dirichlet_check(rng))
    out.update(_curvature_checks(rng))
    out.update(_meanvalue_check(rng))
    out.update(_harnack_checks())
    # curvature of a constant metric vanishes
    out["constant_flat"] = curvature_defect(random_flat_sum(rng, 2, terms=1, degree=0), 0.1).is_flat()
    return {k: bool(v) for k, v in out.items()}
