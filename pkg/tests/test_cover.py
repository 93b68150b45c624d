"""
Tests for rectangles, stratified covers and the rectangle condition.
"""
import math

import numpy as np
import pytest

from rough_sio.config.catalogue import build_kernel, build_radial
from rough_sio.errors import ConfigurationError, DomainError
from rough_sio.models.cover import Rectangle, RectangleFamily, Region, StratifiedCover
from rough_sio.models.factor import KernelFactor
from rough_sio.models.starset import StarSet
from rough_sio.services.covering import (
    build_cover,
    covered,
    hrect_check,
    arm_rectangle_cover,
    _merge_projective,
    rectangle_power_average,
    verify_cover,
)

TWO_ARC = StarSet.from_kernel(build_kernel("two_arc"))


class TestRectangle:
    def test_membership_and_guard(self):
        rect = Rectangle.planar(0.0, 2.0, 1.0)
        assert rect.contains(np.array([1.9, 0.9]))
        assert not rect.contains(np.array([2.1, 0.0]))
        assert rect.contains(np.array([2.1, 0.0]), guard=0.1)

    def test_radial_extent(self):
        rect = Rectangle.planar(0.0, 2.0, 1.0)
        diagonal = np.array([1.0, 1.0]) / math.sqrt(2.0)
        np.testing.assert_allclose(rect.radial_extent(np.array([[1.0, 0.0], [0.0, 1.0], diagonal])),
                                   [2.0, 1.0, math.sqrt(2.0)])

    def test_rotation_moves_the_long_axis(self):
        rect = Rectangle.planar(0.5 * math.pi, 2.0, 1.0)
        assert rect.contains(np.array([0.0, 1.9]))
        assert not rect.contains(np.array([1.9, 0.0]))
        assert rect.major_axis_angle == pytest.approx(0.5 * math.pi)

    def test_volume_and_corners(self):
        rect = Rectangle.planar(0.0, 2.0, 1.0)
        assert rect.volume == 8.0
        assert rect.corner_angles()[0] == pytest.approx(math.atan2(1.0, 2.0))
        np.testing.assert_allclose(rect.corners()[0], [2.0, 1.0], atol=1e-12)
        assert rect.scaled(0.5).volume == pytest.approx(2.0)

    def test_invalid_rectangles(self):
        with pytest.raises(DomainError):
            Rectangle.axis_aligned([1.0, 0.0])
        with pytest.raises(DomainError):
            Rectangle.planar(0.0, 1.0, 1.0).scaled(0.0)

    def test_document_round_trip(self):
        rect = Rectangle.planar(0.4, 3.0, 0.5, m=2, k=1)
        again = Rectangle.from_dict(rect.to_dict())
        assert (again.m, again.k) == (2, 1)
        assert again.angle == pytest.approx(0.4)
        np.testing.assert_allclose(again.half_extents, [3.0, 0.5])
        with pytest.raises(ConfigurationError):
            Rectangle.from_dict({"angle": 0.0})


def test_region_and_family():
    assert Region.cube([1.0, 2.0], 0.5).volume == pytest.approx(1.0)
    family = RectangleFamily.default(Rectangle.axis_aligned([1.0, 0.5]), grid=3, reach=1.0, j_min=0, j_max=1)
    regions = list(family.regions())
    assert len(family) == len(regions) == 18
    assert {r.scale for r in regions} == {1.0, 2.0}


def test_disc_cover_is_one_square(disc):
    cover = build_cover(disc)
    assert list(cover.rectangles) == [0]
    (square,) = cover.rectangles[0]
    np.testing.assert_allclose(square.half_extents, [1.0, 1.0])
    assert cover.global_constant == pytest.approx(4.0 / math.pi)
    assert cover.exhaustive


def test_two_arc_cover():
    cover = build_cover(TWO_ARC)
    assert sorted(cover.rectangles) == [0, 1]
    assert len(cover.rectangles[1]) == 2
    (square,) = cover.rectangles[0]
    np.testing.assert_allclose(square.half_extents, [math.sqrt(2.0 / 3.0)] * 2)
    assert cover.comparability == pytest.approx(math.sqrt(2.0) / 2.0)


def test_two_arc_cover_misses_nothing(rng):
    cover = build_cover(TWO_ARC)
    result = verify_cover(cover, TWO_ARC, samples=2000, rng=rng)
    assert result.miss_rate == 0.0
    assert result.passed
    assert result.c_n == pytest.approx(cover.global_constant)
    assert result.to_dict()["strata"]["1"]["misses"] == 0


def test_dropping_a_rectangle_is_detected(rng):
    cover = build_cover(TWO_ARC).drop_rectangle(1, 0)
    result = verify_cover(cover, TWO_ARC, samples=2000, rng=rng)
    assert not result.passed
    assert result.miss_rate > 0.1


def test_covered_unions_rectangles():
    rects = [Rectangle.planar(0.0, 2.0, 0.1), Rectangle.planar(0.5 * math.pi, 2.0, 0.1)]
    points = np.array([[1.5, 0.0], [0.0, -1.5], [1.0, 1.0]])
    np.testing.assert_array_equal(covered(rects, points, 0.0), [True, True, False])


def test_arms_across_the_axis_stay_apart():
    # gap across the axis is 2/15 of the arc width, as between consecutive strata of |sin|^-1/2
    width, gap = 0.3, 0.04
    arms = [(0.5 * gap, 0.5 * gap + width), (math.pi - 0.5 * gap - width, math.pi - 0.5 * gap)]
    assert len(_merge_projective(arms)) == 2
    # a narrower gap is closed by the enlargement and the arms join across the axis
    gap = 0.02
    arms = [(0.5 * gap, 0.5 * gap + width), (math.pi - 0.5 * gap - width, math.pi - 0.5 * gap)]
    ((start, stop),) = _merge_projective(arms)
    assert start < math.pi < stop
    assert stop - start == pytest.approx(2.0 * (1.05 * width + 0.5 * gap))


def test_sin_power_strata_keep_two_rectangles():
    cover = build_cover(StarSet.from_kernel(build_kernel("sin_power", {"alpha": 0.5})))
    levels = sorted(m for m in cover.rectangles if m >= 2)
    assert levels
    assert all(len(cover.rectangles[m]) == 2 for m in levels[:-1])


def test_dyadic_arm_cover_has_one_stratum_per_arm():
    star = StarSet.from_kernel(build_kernel("dyadic_arms", {"arms": 4}))
    cover = build_cover(star)
    assert sorted(cover.rectangles) == [1, 2, 3, 4]
    assert cover.comparability == pytest.approx(1.0)


def test_arm_cover():
    cover = arm_rectangle_cover(3)
    assert not cover.exhaustive
    for j in (1, 2, 3):
        assert cover.rectangles[j][0].volume == pytest.approx(4.0 * 2.0**-j)
    with pytest.raises(DomainError):
        arm_rectangle_cover(0)


def test_cover_document_round_trip():
    cover = build_cover(TWO_ARC)
    again = StratifiedCover.from_dict(cover.to_dict())
    assert len(again.all_rectangles()) == len(cover.all_rectangles())
    assert again.total_volume() == pytest.approx(cover.total_volume())
    assert again.global_constant == pytest.approx(cover.global_constant)
    assert again.exhaustive
    with pytest.raises(ConfigurationError):
        StratifiedCover.from_dict({"rectangles": []})


class TestRectangleCondition:
    def test_constant_factor(self):
        cover = build_cover(TWO_ARC)
        estimate = hrect_check(KernelFactor.constant(1.0), cover)
        assert estimate.constant == 1.0
        assert not estimate.failed
        assert rectangle_power_average(KernelFactor.constant(2.0), cover.all_rectangles()[0], 2.0) == 4.0

    def test_unit_radial_factor_averages_to_one(self):
        rect = Rectangle.planar(0.3, 2.0, 0.25)
        average = rectangle_power_average(KernelFactor.from_radial(build_radial("constant")), rect, 1.0, t=4.0)
        assert average == pytest.approx(1.0, rel=1e-3)

    def test_angular_factor_on_a_square(self):
        # mean of |cos| over a square centred at the origin
        square = Rectangle.axis_aligned([1.0, 1.0])
        average = rectangle_power_average(KernelFactor.from_angular(build_kernel("cos")), square, 1.0)
        expected = (math.sqrt(2.0) + math.log(1.0 + math.sqrt(2.0))) / 2.0 - 0.5
        assert average == pytest.approx(expected, rel=1e-4)

    def test_empty_and_custom_inputs(self):
        with pytest.raises(DomainError):
            hrect_check(KernelFactor.constant(1.0), [])
        custom = KernelFactor.custom(lambda x, y: np.ones(np.shape(y)[:-1]))
        with pytest.raises(DomainError):
            rectangle_power_average(custom, Rectangle.axis_aligned([1.0, 1.0]), 1.0)
