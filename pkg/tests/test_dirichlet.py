import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ncpot.circle import BoundarySamples, DiscSpec
from ncpot.dirichlet import (
    FlatMetric,
    compare_boundary_interior,
    evaluate_metric,
    newton_schwarz_solve,
    sandwich_constant,
    solve_dirichlet,
    unitary_gauge_distance,
)
from ncpot.errors import ConvergenceError, DomainError, NotStrictlyPositiveError, PreconditionError
from ncpot.generators import random_outer_poly, random_symbol, random_unitary
from ncpot.poly import MatrixPolynomial, unit_circle
from ncpot.specfact import fejer_riesz_factor

seeds = st.integers(0, 2**32 - 1)


def gram(v):
    return np.conj(np.swapaxes(v, -1, -2)) @ v


def poisson_exp_log(fvals, z):
    """exp of the Poisson integral of log f: the scalar flat extension."""
    n = fvals.size
    w = unit_circle(n)
    kern = (1 - np.abs(z[:, None]) ** 2) / np.abs(w[None, :] - z[:, None]) ** 2
    return np.exp((kern * np.log(fvals)[None, :]).mean(axis=1))


def test_constant_boundary():
    c = np.array([[2.0, 0.5j], [-0.5j, 1.0]])
    fm = solve_dirichlet(BoundarySamples(DiscSpec(), np.broadcast_to(c, (32, 2, 2))))
    z = 0.7 * unit_circle(5)
    np.testing.assert_allclose(fm(z), np.broadcast_to(c, (5, 2, 2)), atol=1e-12)
    from ncpot.linalg import sqrt_psd

    np.testing.assert_allclose(fm.h.coeffs[0], sqrt_psd(c), atol=1e-12)


def test_scalar_closed_form():
    f = BoundarySamples.from_function(lambda w: 1.25 + w.real, 256)
    fm = solve_dirichlet(f)
    assert fm(0.0)[0, 0].real == pytest.approx(1.0, abs=1e-12)
    assert fm(0.6)[0, 0].real == pytest.approx(1.69, abs=1e-12)


@settings(max_examples=10)
@given(seeds, st.integers(1, 4))
def test_scalar_matches_poisson_oracle(seed, N):
    rng = np.random.default_rng(seed)
    f = random_symbol(rng, 1, N, margin=0.3)
    s = BoundarySamples(DiscSpec(), f.on_circle(1024))
    fm = solve_dirichlet(s, degree=N)
    z = 0.8 * np.sqrt(rng.uniform(size=20)) * np.exp(2j * np.pi * rng.uniform(size=20))
    want = poisson_exp_log(s.values[:, 0, 0].real, z)
    assert np.abs(fm(z)[:, 0, 0] - want).max() <= 1e-9 * want.max()


def test_matrix_worked_case():
    f = BoundarySamples.from_function(
        lambda w: np.stack(
            [np.stack([np.ones_like(w), w], -1), np.stack([w.conj(), 2 * np.ones_like(w)], -1)], -2
        ),
        64,
    )
    fm = solve_dirichlet(f)
    np.testing.assert_allclose(fm.h.coeffs[0], np.eye(2), atol=1e-9)
    np.testing.assert_allclose(fm.h.coeffs[1], [[0, 1], [0, 0]], atol=1e-9)
    z = 0.4 - 0.3j
    np.testing.assert_allclose(fm(z), [[1, z], [np.conj(z), 1 + abs(z) ** 2]], atol=1e-9)


def test_boundary_values_reproduced(rng):
    f = random_symbol(rng, 3, 4)
    s = BoundarySamples(DiscSpec(0.5j, 2.0), f.on_circle(128))
    fm = solve_dirichlet(s)
    zb = s.disc.from_local(unit_circle(128))
    assert np.abs(fm(zb) - s.values).max() <= 1e-9 * (1 + s.sup_norm())
    assert fm.truncation == "fourier" and fm.truncation_error <= 1e-12


def test_fejer_path_and_error_report():
    # a non band-limited boundary function
    f = BoundarySamples.from_function(lambda w: np.exp(w.real), 256)
    errs = []
    for N in (4, 8, 16):
        fm = solve_dirichlet(f, degree=N, truncation="fejer")
        assert fm.truncation == "fejer"
        errs.append(fm.truncation_error)
    assert errs[0] > errs[1] > errs[2]


def test_evaluate_outside_domain():
    fm = FlatMetric(MatrixPolynomial.constant(np.eye(2)), DiscSpec(0, 0.5))
    with pytest.raises(DomainError):
        evaluate_metric(fm, 0.6)


def test_rejects_singular_boundary():
    f = BoundarySamples.from_function(lambda w: 2 + 2 * w.real, 64)
    with pytest.raises(NotStrictlyPositiveError):
        solve_dirichlet(f)


def test_newton_schwarz_identity():
    f = BoundarySamples(DiscSpec(), np.broadcast_to(np.eye(2), (32, 2, 2)))
    fm = newton_schwarz_solve(f)
    np.testing.assert_allclose(fm.h.coeffs[0], np.eye(2), atol=1e-15)
    assert fm.h.degree == 0


def test_newton_schwarz_scalar_matches_direct():
    f = BoundarySamples.from_function(lambda w: 1 + 0.1 * w.real, 128)
    a = newton_schwarz_solve(f)
    b = solve_dirichlet(f)
    assert unitary_gauge_distance(a.h, b.h) <= 1e-8


def test_newton_schwarz_matrix_case():
    def f(w):
        out = np.zeros(w.shape + (2, 2), dtype=complex)
        out[..., 0, 0] = out[..., 1, 1] = 1
        out[..., 0, 1] = 0.1 * w
        out[..., 1, 0] = 0.1 * w.conj()
        return out

    fm = newton_schwarz_solve(BoundarySamples.from_function(f, 128))
    assert fm.report.residual <= 1e-10 and fm.report.iterations <= 10


def test_newton_schwarz_refuses_far_data():
    f = BoundarySamples.from_function(lambda w: 2 + w.real, 64)
    with pytest.raises(ConvergenceError):
        newton_schwarz_solve(f)


def test_max_principle_closed_forms():
    one = FlatMetric(MatrixPolynomial.constant(np.eye(2)))
    half = FlatMetric(MatrixPolynomial.constant(np.sqrt(0.5) * np.eye(2)))
    rep = compare_boundary_interior(one, half)
    assert rep.passed and rep.margin == pytest.approx(0.5)
    p = FlatMetric(MatrixPolynomial(np.array([[[1.0]], [[0.5]]])))
    q = FlatMetric(MatrixPolynomial.constant([[0.5]]))
    rep = compare_boundary_interior(p, q)
    assert rep.passed and rep.margin >= -1e-12


def test_max_principle_requires_boundary_order():
    p = FlatMetric(MatrixPolynomial.constant(np.eye(1)))
    q = FlatMetric(MatrixPolynomial.constant(2 * np.eye(1)))
    with pytest.raises(PreconditionError):
        compare_boundary_interior(p, q)


@settings(max_examples=10)
@given(seeds, st.integers(1, 3))
def test_max_principle_on_generated_pairs(seed, d):
    rng = np.random.default_rng(seed)
    hq = random_outer_poly(rng, d, 2)
    w = unit_circle(128)
    qb = gram(hq(w))
    pb = qb + random_symbol(rng, d, 2, margin=0.05).on_circle(128)
    p = solve_dirichlet(BoundarySamples(DiscSpec(), pb))
    q = FlatMetric(hq)
    rep = compare_boundary_interior(p, q)
    assert rep.margin >= -1e-9


def test_gauge_distance_closed_forms(rng):
    h = random_outer_poly(rng, 3, 2)
    u = random_unitary(rng, 3)
    assert unitary_gauge_distance(h, u @ h) <= 1e-12
    assert unitary_gauge_distance(h, 2 * h) == pytest.approx(3.0)


def test_sandwich_constant_bounded(rng):
    f = random_symbol(rng, 2, 3)
    w = unit_circle(256)
    eps = 1e-3
    fv = f.on_circle(256)
    pert = (1 + eps * np.cos(np.angle(w) + 0.3))[:, None, None] * fv
    p = solve_dirichlet(BoundarySamples(DiscSpec(), fv))
    q = solve_dirichlet(BoundarySamples(DiscSpec(), pert))
    c = sandwich_constant(p, q, eps, 0.9 * unit_circle(32))
    assert c <= 1.0 + 1e-6


def test_bauer_and_wilson_solutions_agree(rng):
    f = random_symbol(rng, 3, 3)
    h1, _ = fejer_riesz_factor(f, method="bauer")
    h2, _ = fejer_riesz_factor(f, method="wilson")
    assert unitary_gauge_distance(h1, h2) <= 1e-6
