"""
Tests for S_Omega: membership, strata, closed-form integrals, sampling.
"""
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rough_sio.config.catalogue import build_kernel
from rough_sio.errors import DomainError
from rough_sio.models.starset import StarSet, dilation_identity, membership, set_integrals, strata, stratum_index
from rough_sio.services.star_geometry import outline, sample_uniform

TWO_ARC = StarSet.from_kernel(build_kernel("two_arc"))

coordinates = st.floats(min_value=-3.0, max_value=3.0, allow_nan=False)


def test_stratum_index_uses_half_open_dyadic_shells():
    rho = np.array([0.5, 1.0, 1.5, 2.0, 2.01, 4.0, 4.5])
    np.testing.assert_array_equal(stratum_index(rho), [0, 0, 1, 1, 2, 2, 3])


def test_disc_membership(disc):
    assert disc.measure == pytest.approx(math.pi)
    assert disc.rho_max == pytest.approx(1.0)
    assert membership(disc, [0.5, 0.0], 1.0)
    assert not membership(disc, [1.1, 0.0], 1.0)
    assert membership(disc, [1.1, 0.0], 2.0)
    assert membership(disc, [0.0, 0.0], 0.1)
    assert not membership(disc, [0.1, 0.0], 1.0, epsilon=0.2)


def test_contains_rejects_bad_arguments(disc):
    with pytest.raises(DomainError):
        disc.contains(np.ones(2), t=0.0)
    with pytest.raises(DomainError):
        disc.contains(np.ones(2), epsilon=-1.0)


@settings(max_examples=60, deadline=None)
@given(x=coordinates, y=coordinates, s=st.floats(min_value=0.01, max_value=0.99), t=st.floats(min_value=0.1, max_value=4.0))
def test_dilates_are_star_shaped(x, y, s, t):
    point = np.array([x, y])
    if membership(TWO_ARC, point, t):
        assert membership(TWO_ARC, s * point, t)


@settings(max_examples=60, deadline=None)
@given(x=coordinates, y=coordinates, t=st.floats(min_value=0.1, max_value=4.0),
       grow=st.floats(min_value=1.0, max_value=8.0))
def test_dilates_are_nested(x, y, t, grow):
    point = np.array([x, y])
    if membership(TWO_ARC, point, t):
        assert membership(TWO_ARC, point, t * grow)


@pytest.mark.parametrize("point", [[0.5, 0.3], [-1.2, 0.4], [0.05, -2.0]])
def test_dilation_identity_matches_closed_form(point):
    numeric, closed = dilation_identity(TWO_ARC, point)
    assert numeric == pytest.approx(closed, rel=1e-5)


def test_dilation_identity_inside_truncation_is_zero(disc):
    assert dilation_identity(disc, [0.1, 0.0], epsilon=0.5) == (0.0, 0.0)
    with pytest.raises(DomainError):
        dilation_identity(disc, [0.0, 0.0])


def test_disc_set_integrals(disc):
    integrals = set_integrals(disc)
    assert integrals.measure == pytest.approx(math.pi)
    assert integrals.sgn_integral == pytest.approx(math.pi)
    assert integrals.omega_integral_over_n == pytest.approx(math.pi)
    assert integrals.logp_integral == 0.0
    # int_0^1 |log r| r dr = 1/4 on every ray
    assert integrals.log_integral == pytest.approx(math.pi / 2)
    assert integrals.log_bound == pytest.approx(math.pi)
    assert integrals.strata_constant == pytest.approx(0.5)
    assert integrals.log_ok and integrals.logp_ok and integrals.strata_ok


def test_cancelling_kernel_has_zero_sign_integral():
    integrals = set_integrals(TWO_ARC)
    assert abs(integrals.sgn_integral) < 1e-12
    assert integrals.measure == pytest.approx(math.pi)


def test_larger_disc_lies_in_stratum_one():
    star = StarSet.from_kernel(build_kernel("constant", {"value": 4.0}))
    assert star.measure == pytest.approx(4.0 * math.pi)
    assert [s.m for s in strata(star)] == [1]
    assert set_integrals(star).logp_integral > 0


def test_scaled_star_is_dilate(disc):
    assert disc.scaled(2.0).measure == pytest.approx(4.0 * math.pi)
    assert disc.scaled(2.0).rho_max == pytest.approx(2.0)


def test_two_arc_strata():
    levels = strata(TWO_ARC)
    assert [s.m for s in levels] == [0, 1]
    assert levels[0].measure == pytest.approx(math.pi / 2)
    assert levels[1].measure == pytest.approx(math.pi / 2)
    assert levels[1].to_dict()["cell_count"] == 1


def test_strata_cap_moves_mass_to_residual():
    star = StarSet.from_kernel(build_kernel("dyadic_arms", {"arms": 6}), strata_cap=3)
    assert max(star.strata_measures) <= 3
    expected = sum(2.0 ** (-3 * k) for k in range(4, 7)) / 2.0
    assert star.residual_mass == pytest.approx(expected)


def test_samples_lie_in_the_set(rng):
    points = sample_uniform(TWO_ARC, 500, rng)
    assert points.shape == (500, 2)
    assert np.all(TWO_ARC.contains(points, t=1.0 + 1e-9))


def test_stratum_samples_stay_in_their_stratum(rng):
    points = sample_uniform(TWO_ARC, 300, rng, m=1)
    angles = np.mod(np.arctan2(points[:, 1], points[:, 0]), 2 * math.pi)
    assert np.all(angles <= math.pi / 2 + 1e-12)
    assert sample_uniform(TWO_ARC, 10, rng, m=5).shape == (0, 2)
    with pytest.raises(DomainError):
        sample_uniform(TWO_ARC, -1, rng)


def test_monte_carlo_measure_within_standard_errors(rng):
    estimate, error = TWO_ARC.monte_carlo_measure(20000, rng)
    assert error > 0
    assert abs(estimate - TWO_ARC.measure) <= 4.0 * error


def test_monte_carlo_measure_of_ball_is_exact(disc, rng):
    estimate, error = disc.monte_carlo_measure(1000, rng)
    assert estimate == pytest.approx(math.pi)
    assert error == 0.0


def test_outline_traces_every_cell():
    points = outline(TWO_ARC)
    assert len(points) == 2 * TWO_ARC.kernel.cell_count
    assert points[0] == pytest.approx((math.sqrt(2.0), 0.0))
    three = StarSet.from_kernel(build_kernel("constant", dimension=3, resolution=8))
    with pytest.raises(DomainError):
        three.outline()
