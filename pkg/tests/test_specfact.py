import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ncpot.circle import BoundarySamples, DiscSpec
from ncpot.errors import InputError, NotStrictlyPositiveError
from ncpot.generators import random_outer_poly, random_poly, random_symbol
from ncpot.poly import MatrixLaurentPolynomial, MatrixPolynomial, unit_circle
from ncpot.specfact import (
    circle_residual,
    dual_boundary_factor,
    factor_bauer,
    fejer_riesz_factor,
    normalize_factor,
    wilson_iteration,
)

seeds = st.integers(0, 2**32 - 1)
SQ2 = np.sqrt(2.0)


def scalar(coeffs):
    return MatrixLaurentPolynomial(np.asarray(coeffs, dtype=complex)[:, None, None])


def root_oracle(f):
    """Outer scalar factor from the roots of ``w^N f(w)`` lying outside the disc."""
    c = f.coeffs[:, 0, 0]
    N = f.degree
    roots = np.roots(c[::-1])
    outside = roots[np.abs(roots) > 1]
    assert outside.size == N
    poly = np.poly(outside)[::-1]  # ascending coefficients of prod (w - a)
    poly = poly / poly[0]  # value 1 at w = 0
    scale = np.sqrt(f(np.array([1.0]))[0, 0].real) / abs(np.polyval(poly[::-1], 1.0))
    return poly * scale


FIVE_HALVES = scalar([1, 2.5, 1])


@pytest.mark.parametrize("method", ["bauer", "wilson"])
def test_constant_symbol(method):
    f = MatrixLaurentPolynomial(np.diag([4.0, 1.0])[None])
    h, rep = fejer_riesz_factor(f, method=method)
    np.testing.assert_allclose(h.coeffs[0], np.diag([2.0, 1.0]), atol=1e-12)
    assert rep.passed and rep.winding == 0
    h, _ = fejer_riesz_factor(MatrixLaurentPolynomial(np.eye(3)[None]), method=method)
    np.testing.assert_allclose(h.coeffs[0], np.eye(3), atol=1e-12)


@pytest.mark.parametrize("method", ["bauer", "wilson"])
def test_scalar_closed_form(method):
    h, rep = fejer_riesz_factor(FIVE_HALVES, method=method)
    np.testing.assert_allclose(h.coeffs[:, 0, 0], [SQ2, 1 / SQ2], atol=1e-9)
    np.testing.assert_allclose(root_oracle(FIVE_HALVES), [SQ2, 1 / SQ2], atol=1e-12)


@pytest.mark.parametrize("method", ["bauer", "wilson"])
def test_matrix_closed_form(method):
    c = np.zeros((3, 2, 2), dtype=complex)
    c[1] = [[1, 0], [0, 2]]
    c[2] = [[0, 1], [0, 0]]
    c[0] = c[2].conj().T
    h, _ = fejer_riesz_factor(MatrixLaurentPolynomial(c), method=method)
    np.testing.assert_allclose(h.coeffs[0], np.eye(2), atol=1e-9)
    np.testing.assert_allclose(h.coeffs[1], [[0, 1], [0, 0]], atol=1e-9)


@settings(max_examples=20)
@given(seeds, st.integers(1, 5))
def test_scalar_factor_matches_root_oracle(seed, N):
    rng = np.random.default_rng(seed)
    f = random_symbol(rng, 1, N, margin=0.2)
    want = root_oracle(f)
    for method in ("bauer", "wilson"):
        h, _ = fejer_riesz_factor(f, method=method)
        got = h.coeffs[:, 0, 0]
        # both are normalized to a positive constant term
        assert np.abs(got - want).max() <= 1e-7 * (1 + np.abs(want).max())


def test_normalize_factor_fixes_sign_and_keeps_identity():
    h = MatrixPolynomial(np.array([[[-SQ2]], [[-1 / SQ2]]]))
    np.testing.assert_allclose(normalize_factor(h).coeffs[:, 0, 0], [SQ2, 1 / SQ2])
    hid = MatrixPolynomial(np.stack([np.eye(2), [[0, 1], [2, 0]]]).astype(complex))
    np.testing.assert_array_equal(normalize_factor(hid).coeffs, hid.coeffs)


@given(seeds, st.integers(1, 4), st.integers(0, 4))
def test_normalize_factor_properties(seed, d, N):
    rng = np.random.default_rng(seed)
    h = random_poly(rng, d, N)
    h.coeffs[0] += 2 * np.eye(d)
    nh = normalize_factor(h)
    h0 = nh.coeffs[0]
    assert np.abs(h0 - h0.conj().T).max() <= 1e-12
    assert np.linalg.eigvalsh(h0)[0] >= -1e-12
    w = unit_circle(64)
    a, b = h(w), nh(w)
    gram = lambda v: np.conj(np.swapaxes(v, 1, 2)) @ v
    assert np.abs(gram(a) - gram(b)).max() <= 1e-12 * (1 + np.abs(gram(a)).max())
    assert np.abs(normalize_factor(nh).coeffs - nh.coeffs).max() <= 1e-12


def test_bauer_converges_immediately_for_constant():
    f = MatrixLaurentPolynomial(np.diag([4.0, 1.0])[None])
    h, m = factor_bauer(f)
    assert m <= 2
    np.testing.assert_allclose(h.coeffs[0], np.diag([2.0, 1.0]))


def test_bauer_candidates_converge_geometrically(rng):
    f = random_symbol(rng, 3, 3, margin=0.5)
    ref, _ = factor_bauer(f, tol=1e-14)
    ref = normalize_factor(ref).coeffs
    errs = []
    for tol in (1e-2, 1e-4, 1e-6, 1e-8):
        h, _ = factor_bauer(f, tol=tol)
        errs.append(np.abs(normalize_factor(h).coeffs - ref).max())
    assert all(b <= a for a, b in zip(errs, errs[1:]))
    assert errs[-1] <= 1e-7


def test_wilson_constant_one_step():
    c = np.diag([4.0, 1.0]).astype(complex)
    f = np.broadcast_to(c, (16, 2, 2))
    coeffs, res, its = wilson_iteration(f, np.diag([2.0, 1.0]), tol=1e-12)
    assert its == 1 and res <= 1e-15
    np.testing.assert_allclose(coeffs[0], np.diag([2.0, 1.0]), atol=1e-15)
    # from the scalar start ||f||^(1/2) Id the iteration still converges
    coeffs, res, _ = wilson_iteration(f, 2.0 * np.eye(2), tol=1e-12)
    assert res <= 1e-12
    np.testing.assert_allclose(coeffs[0], np.diag([2.0, 1.0]), atol=1e-10)


@settings(max_examples=10)
@given(seeds, st.integers(1, 4), st.integers(1, 4))
def test_wilson_residual_within_thirty_iterations(seed, d, N):
    f = random_symbol(np.random.default_rng(seed), d, N, margin=0.1)
    h, rep = fejer_riesz_factor(f, method="wilson", max_iters=30)
    assert rep.residual <= 1e-10 and rep.iterations <= 30


@settings(max_examples=15)
@given(seeds, st.integers(1, 4), st.integers(0, 5))
def test_factor_round_trip_and_degree_bound(seed, d, N):
    f = random_symbol(np.random.default_rng(seed), d, N)
    for method in ("bauer", "wilson"):
        h, rep = fejer_riesz_factor(f, method=method)
        assert h.degree == N
        assert rep.winding == 0 and rep.passed
        assert circle_residual(h, f, 512) <= 1e-9
        assert rep.tail <= 1e-9


def test_block_diagonal_symbols_give_block_diagonal_factors(rng):
    a = random_symbol(rng, 2, 3)
    b = random_symbol(rng, 1, 2)
    c = np.zeros((7, 3, 3), dtype=complex)
    c[:, :2, :2] = a.coeffs
    c[1:6, 2:, 2:] = b.coeffs
    f = MatrixLaurentPolynomial(c)
    for method in ("bauer", "wilson"):
        h, _ = fejer_riesz_factor(f, method=method)
        off = max(np.abs(h.coeffs[:, :2, 2:]).max(), np.abs(h.coeffs[:, 2:, :2]).max())
        assert off <= 1e-10


def test_rejects_indefinite_and_bad_method():
    with pytest.raises(NotStrictlyPositiveError):
        fejer_riesz_factor(scalar([1, 1, 1]))
    with pytest.raises(NotStrictlyPositiveError):
        fejer_riesz_factor(scalar([1, 2, 1]))
    with pytest.raises(InputError):
        fejer_riesz_factor(FIVE_HALVES, method="newton")


def test_dual_factor_constant():
    c = np.diag([4.0, 1.0])
    p = BoundarySamples(DiscSpec(), np.broadcast_to(c, (32, 2, 2)))
    h, res = dual_boundary_factor(p)
    np.testing.assert_allclose(h.coeffs[0], np.diag([0.5, 1.0]), atol=1e-10)
    assert np.abs(h.coeffs[1:]).max() <= 1e-10 and res <= 1e-10


def test_dual_factor_scalar_flat():
    p = BoundarySamples.from_function(lambda w: np.abs(1 + w / 2) ** 2, 256)
    h, _ = dual_boundary_factor(p)
    assert h.coeffs[0, 0, 0].real == pytest.approx(1.0, abs=1e-9)


@settings(max_examples=10)
@given(seeds, st.integers(1, 3), st.integers(1, 3))
def test_dual_factor_inverts_flat_metric(seed, d, N):
    g = random_outer_poly(np.random.default_rng(seed), d, N)
    w = unit_circle(256)
    gv = g(w)
    p = BoundarySamples(DiscSpec(), np.conj(np.swapaxes(gv, 1, 2)) @ gv)
    h, res = dual_boundary_factor(p)
    assert res <= 1e-10
    h0inv = np.linalg.inv(h.coeffs[0])
    g0 = g.coeffs[0]
    np.testing.assert_allclose(h0inv.conj().T @ h0inv, g0.conj().T @ g0, atol=1e-8)
