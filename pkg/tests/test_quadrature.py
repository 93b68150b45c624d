"""
Tests for the quadrature helpers and trend statistics.
"""
import math

import numpy as np
import pytest

from rough_sio.errors import DomainError
from rough_sio.utils.quadrature import (
    ceil_log2_ratio,
    dyadic_pieces,
    gauss_legendre,
    geometric_grid,
    gl_box,
    gl_interval,
    piecewise_simpson,
    radial_quad,
    richardson,
)
from rough_sio.utils.trends import envelope_growth, fitted_slope, summability, two_sided_growth


def test_gauss_legendre_is_cached_and_read_only():
    nodes, weights = gauss_legendre(6)
    assert gauss_legendre(6)[0] is nodes
    assert weights.sum() == pytest.approx(2.0)
    assert not nodes.flags.writeable


def test_geometric_grid_pieces_are_simpson_ready():
    pieces = geometric_grid(1.0, 8.0, 4, extra=[2.0, 100.0])
    assert len(pieces) == 2
    assert [len(p) - 1 for p in pieces] == [4, 8]
    assert pieces[0][0] == pytest.approx(0.0)
    assert pieces[-1][-1] == pytest.approx(math.log(8.0))
    for bad in ((0.0, 1.0), (2.0, 1.0), (1.0, 1.0)):
        with pytest.raises(DomainError):
            geometric_grid(*bad, 4)


def test_piecewise_simpson_over_geometric_pieces():
    pieces = geometric_grid(1.0, 8.0, 64)
    assert piecewise_simpson(pieces, [np.ones_like(u) for u in pieces]) == pytest.approx(math.log(8.0), rel=1e-10)
    # int_1^8 r dr / r
    pieces = geometric_grid(1.0, 8.0, 64, extra=[3.0])
    assert piecewise_simpson(pieces, [np.exp(u) for u in pieces]) == pytest.approx(7.0, rel=1e-6)
    rows = piecewise_simpson(pieces, [np.stack([np.ones_like(u), 2.0 * np.ones_like(u)]) for u in pieces])
    np.testing.assert_allclose(rows, [math.log(8.0), 2.0 * math.log(8.0)], rtol=1e-10)


def test_radial_quad_measures():
    assert radial_quad(np.ones_like, 1.0, 8.0, measure="dr/r") == pytest.approx(math.log(8.0), rel=1e-10)
    assert radial_quad(lambda r: r, 0.0, 2.0) == pytest.approx(2.0, rel=1e-10)
    assert radial_quad(lambda r: r, 0.5, 2.0, points=[1.0]) == pytest.approx(1.875, rel=1e-10)
    assert radial_quad(np.ones_like, 3.0, 1.0) == 0.0


def test_dyadic_pieces_of_scale_invariant_measure():
    pieces = dyadic_pieces(np.ones_like, -2, 1, measure="dr/r")
    np.testing.assert_allclose(pieces, [math.log(2.0)] * 4, rtol=1e-10)


def test_gauss_legendre_boxes():
    points, weights = gl_box([0.0, 0.0], [1.0, 2.0], 4)
    assert points.shape == (16, 2)
    assert weights.sum() == pytest.approx(2.0)
    assert np.dot(weights, points[:, 0] * points[:, 1] ** 2) == pytest.approx(4.0 / 3.0)
    nodes, w = gl_interval(0.0, math.pi, 10)
    assert np.dot(w, np.sin(nodes)) == pytest.approx(2.0, rel=1e-9)


def test_richardson_and_log_ratio():
    assert richardson(1.0, 1.5, 1.0) == pytest.approx(2.0)
    assert richardson(1.0, 1.0, 2.0) == 1.0
    assert ceil_log2_ratio(1.0, 8.0) == 3
    assert ceil_log2_ratio(1.0, 9.0) == 4
    assert ceil_log2_ratio(0.1, 0.1 * 2.0**5) == 5


class TestTrends:
    def test_fitted_slope(self):
        x = np.linspace(-1.0, 2.0, 7)
        assert fitted_slope(x, 3.0 * x + 1.0) == pytest.approx(3.0)
        assert fitted_slope([1.0], [2.0]) == 0.0
        assert fitted_slope([1.0, 1.0], [2.0, 3.0]) == 0.0

    def test_power_law_growth_is_its_exponent(self):
        s = np.linspace(0.0, 10.0, 31)
        assert envelope_growth(s, np.exp(0.4 * s)) == pytest.approx(0.4)
        assert envelope_growth(s, np.ones_like(s)) == 0.0
        assert envelope_growth(s[:2], [1.0, 5.0]) == 0.0
        assert math.isinf(envelope_growth(s, np.where(s > 9, np.inf, 1.0)))

    def test_two_sided_growth(self):
        s = np.linspace(-10.0, 10.0, 41)
        growth = two_sided_growth(s, np.exp(0.5 * np.abs(s)))
        assert growth["low"] == pytest.approx(0.5)
        assert growth["high"] == pytest.approx(0.5)


class TestSummability:
    def test_geometric_terms_are_certified(self):
        result = summability({m: 2.0**-m for m in range(1, 17)})
        assert result.cauchy and result.decaying
        assert result.certified
        assert result.decay_rate == pytest.approx(-math.log(2.0))
        assert result.to_dict()["verdict"] == "certified-at-probe-scale"

    def test_constant_terms_are_not(self):
        result = summability({m: 1.0 for m in range(1, 17)})
        assert result.last_block_share == pytest.approx(1.0 / 16.0)
        assert not result.cauchy and not result.decaying

    def test_exhaustive_family_is_a_finite_sum(self):
        assert summability({0: 1.0, 1: 5.0}, exhaustive=True).certified

    def test_empty_and_divergent(self):
        assert not summability({}).certified
        result = summability({1: 1.0, 2: math.inf})
        assert not result.certified
        assert math.isinf(result.decay_rate)
