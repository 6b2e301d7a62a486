import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ncpot.circle import DiscSpec
from ncpot.curvature import Constant, DualFlatSum, FlatSum, Gauged, curvature_defect
from ncpot.errors import InputError
from ncpot.generators import random_dual_flat_sum, random_flat_sum, random_outer_poly, random_poly
from ncpot.meanvalue import (
    block_margin,
    certify_semipositive,
    certify_seminegative,
    default_disc_family,
    gauge_competitor_value,
    gauge_mean,
    mean_block,
    monotonicity_check,
    profile_csv,
    radial_profile,
    schur_mean,
    small_radius_ratio,
    three_circles_convexity,
)
from ncpot.poly import MatrixPolynomial

seeds = st.integers(0, 2**32 - 1)
ONE = MatrixPolynomial.constant([[1.0]])
Z = MatrixPolynomial(np.array([[[0.0]], [[1.0]]]))
ONE_PLUS_Z = FlatSum([MatrixPolynomial(np.array([[[1.0]], [[1.0]]]))])
ABS_Z = FlatSum([Z])
C = np.array([[2.0, 0.5], [0.5, 1.0]])


def schur_closed_form(r):
    return (1 + r * r) - r * r / (1 + r * r)


def test_block_closed_forms():
    mb = mean_block(Constant(C), DiscSpec(0.1, 0.5), 64)
    np.testing.assert_allclose(mb.block.assemble(), np.block([[C, 0 * C], [0 * C, 0.25 * C]]), atol=1e-15)
    r = 0.6
    mb = mean_block(ONE_PLUS_Z, DiscSpec(0, r), 64)
    want = [[1 + r * r, 1j * r * r], [-1j * r * r, r * r * (1 + r * r)]]
    np.testing.assert_allclose(mb.block.assemble(), want, atol=1e-14)
    mb = mean_block(ABS_Z, DiscSpec(0, r), 64)
    np.testing.assert_allclose(mb.block.assemble(), [[r * r, 0], [0, r**4]], atol=1e-14)


@pytest.mark.parametrize("r", [0.2, 0.5, 0.9])
def test_schur_closed_forms(r):
    assert schur_mean(ONE_PLUS_Z, DiscSpec(0, r), 64).value[0, 0].real == pytest.approx(
        schur_closed_form(r), abs=1e-12
    )
    np.testing.assert_allclose(schur_mean(Constant(C), DiscSpec(0, r), 64).value, C, atol=1e-12)
    assert schur_mean(ABS_Z, DiscSpec(0, r), 64).value[0, 0].real == pytest.approx(r * r)


@settings(max_examples=15)
@given(seeds, st.integers(1, 3))
def test_block_margin_equals_schur_margin(seed, d):
    rng = np.random.default_rng(seed)
    field = random_flat_sum(rng, d)
    disc = DiscSpec(0.1j, 0.6)
    mb = mean_block(field, disc)
    p0 = field(disc.z0) + rng.uniform(-0.5, 0.5) * np.eye(d)
    s = schur_mean(field, disc).value
    assert block_margin(mb.moments, p0) == pytest.approx(np.linalg.eigvalsh(s - p0)[0], abs=1e-9)


def test_seminegative_certificate_closed_forms():
    rep = certify_seminegative(FlatSum([ONE, Z]), [DiscSpec(0, 0.5)])
    assert rep.passed
    rep = certify_seminegative(Constant(C))
    assert rep.passed and abs(rep.margin) <= 1e-12
    rep = certify_seminegative(DualFlatSum([ONE, Z]), [DiscSpec(0, 0.1), DiscSpec(0, 0.5)])
    assert not rep.passed and rep.witness["margin"] < 0
    assert rep.diagnostics["forms_agree"]


@settings(max_examples=8)
@given(seeds, st.integers(1, 3))
def test_flat_sums_certify_seminegative(seed, d):
    rep = certify_seminegative(random_flat_sum(np.random.default_rng(seed), d))
    assert rep.passed and rep.diagnostics["forms_agree"]


def test_default_disc_family_inside_domain():
    dom = DiscSpec(1 + 1j, 2.0)
    fam = default_disc_family(dom)
    assert len(fam) == 75
    assert all(dom.contains_disc(d) for d in fam)


def test_monotonicity_closed_form():
    radii = [0.2, 0.4, 0.6]
    vals = [schur_mean(ONE_PLUS_Z, DiscSpec(0, r), 128).value[0, 0].real for r in radii]
    np.testing.assert_allclose(vals, [schur_closed_form(r) for r in radii], atol=1e-12)
    assert vals[0] < vals[1] < vals[2]
    assert monotonicity_check(ONE_PLUS_Z, 0, radii).passed
    rep = monotonicity_check(Constant(C), 0, radii)
    assert rep.passed and abs(rep.margin) <= 1e-12
    with pytest.raises(InputError):
        monotonicity_check(ONE_PLUS_Z, 0, [0.4, 0.2])


def test_three_circles_closed_form():
    radii = [0.2, 0.4, 0.8]
    v = [schur_closed_form(r) for r in radii]
    assert 0.5 * (v[0] + v[2]) - v[1] >= 0
    assert three_circles_convexity(ONE_PLUS_Z, 0, radii).passed
    with pytest.raises(InputError):
        three_circles_convexity(ONE_PLUS_Z, 0, [0.2, 0.3, 0.8])


@settings(max_examples=8)
@given(seeds)
def test_monotone_and_convex_for_flat_sums(seed):
    field = random_flat_sum(np.random.default_rng(seed), 2)
    radii = 0.8 * 0.8 ** np.arange(8)[::-1]
    assert monotonicity_check(field, 0.05, radii).passed
    assert three_circles_convexity(field, 0.05, radii).passed
    # doubled quadrature reproduces the same values
    for r in radii[-2:]:
        a = schur_mean(field, DiscSpec(0.05, r), 256).value
        b = schur_mean(field, DiscSpec(0.05, r), 512).value
        assert np.abs(a - b).max() <= 1e-10


def test_small_radius_ratio(rng):
    field = random_flat_sum(rng, 2, terms=3)
    assert 3.5 <= small_radius_ratio(field, 0.1, 0.1) <= 4.5


def test_gauge_mean_closed_forms():
    gm = gauge_mean(Constant(C), DiscSpec(0.2, 0.5), n=64)
    np.testing.assert_allclose(gm.value, C, atol=1e-10)
    g = random_outer_poly(np.random.default_rng(3), 2, 2)
    field = FlatSum([g])
    disc = DiscSpec(0.1, 0.6)
    np.testing.assert_allclose(gauge_mean(field, disc).value, field(disc.z0), atol=1e-8)


@settings(max_examples=6)
@given(seeds)
def test_gauge_mean_covariance(seed):
    rng = np.random.default_rng(seed)
    field = random_dual_flat_sum(rng, 2)
    k = random_poly(rng, 2, 1, 0.2)
    k.coeffs[0] += np.eye(2)
    disc = DiscSpec(-0.1, 0.5)
    t = gauge_mean(field, disc).value
    tk = gauge_mean(Gauged(field, k), disc).value
    k0 = k(disc.z0)
    want = k0.conj().T @ t @ k0
    assert np.abs(tk - want).max() <= 1e-8 * (1 + np.abs(want).max())


def test_semipositive_certificate():
    assert certify_semipositive(DualFlatSum([ONE, Z]), [DiscSpec(0, 0.3), DiscSpec(0.2, 0.5)]).passed
    assert not certify_semipositive(FlatSum([ONE, Z]), [DiscSpec(0, 0.1)]).passed
    g = random_outer_poly(np.random.default_rng(5), 2, 2)
    rep = certify_semipositive(FlatSum([g]), [DiscSpec(0, 0.5)])
    assert rep.passed and abs(rep.margin) <= 1e-8


@settings(max_examples=5)
@given(seeds)
def test_dual_fields_pass_semipositive(seed):
    rng = np.random.default_rng(seed)
    field = random_dual_flat_sum(rng, 2)
    discs = [DiscSpec(0.1, 0.3), DiscSpec(-0.2j, 0.5)]
    assert certify_semipositive(field, discs).passed
    assert all(curvature_defect(field, d.z0).is_semipositive() for d in discs)


def test_competitors_do_not_beat_gauge_mean(rng):
    field = random_dual_flat_sum(rng, 2)
    disc = DiscSpec(0.1, 0.5)
    t = gauge_mean(field, disc).value
    for _ in range(5):
        k = random_poly(rng, 2, 2, 0.3)
        k.coeffs[0] += np.eye(2)
        v = gauge_competitor_value(field, disc, k)
        assert np.linalg.eigvalsh(v - t)[0] >= -1e-8


def test_radial_profile_csv():
    rows = radial_profile(ONE_PLUS_Z, 0, [0.2, 0.4], 64)
    assert rows[0]["trace"] == pytest.approx(schur_closed_form(0.2))
    text = profile_csv(rows)
    assert text.splitlines()[0] == "r,trace,lambda_min,lambda_max,margin"
    assert len(text.splitlines()) == 3
