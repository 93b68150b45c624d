"""
Tests for the cover, weight, maximal and operator check families.
"""
import math

import pytest

from rough_sio.config.catalogue import build_kernel
from rough_sio.models.starset import StarSet
from rough_sio.services.checks import (
    OPERATOR_KERNELS,
    OPERATOR_RADIALS,
    _cover_checks,
    arm_family_checks,
    c_omega_checks,
    commutator_checks,
    cover_tasks,
    dropped_rectangle_check,
    exp_weight_check,
    maximal_checks,
    maximal_tasks,
    operator_tasks,
    weight_tasks,
)


def test_c_omega_closed_forms():
    records = c_omega_checks()
    assert [r.check_id for r in records] == ["operators.c_omega.two_arc", "operators.c_omega.odd",
                                             "operators.c_omega.unimodular"]
    assert all(r.passed for r in records)
    assert records[0].bound["closed_form"] == pytest.approx(0.5 * math.pi * math.log(3.0))


def test_cover_checks_on_two_arc(small_cfg):
    records = _cover_checks("k01_two_arc_n2", StarSet.from_kernel(build_kernel("two_arc")), small_cfg)
    assert [r.check_id for r in records] == ["cover.coverage.k01_two_arc_n2", "cover.constant.k01_two_arc_n2",
                                             "cover.comparability.k01_two_arc_n2"]
    assert all(r.passed for r in records)


def test_dropped_rectangle_is_detected(small_cfg):
    (record,) = dropped_rectangle_check(small_cfg)
    assert record.passed
    assert record.computed["miss_rate"] > small_cfg.tolerance("coverage_miss")


def test_exp_weight_is_not_certified(small_cfg):
    (record,) = exp_weight_check(small_cfg)
    assert record.check_id == "weights.rect_condition.exp_x1.fails"
    assert record.passed


def test_maximal_checks(small_cfg):
    records = {r.check_id: r for r in maximal_checks(small_cfg)}
    assert records["maximal.unit_factor.identity"].passed
    for name in ("radial_log_oscillating", "angular_two_arc", "x_dependent"):
        assert records[f"maximal.domination.{name}"].passed
    assert "maximal.hcube.x_dependent" not in records
    assert records["maximal.hcube.radial_log_oscillating"].passed


def test_task_names(small_cfg):
    assert [name for name, _ in cover_tasks(small_cfg)] == [
        "cover:k00_cos_n2", "cover:k01_two_arc_n2", "cover:arm_family", "cover:dropped_rectangle"]
    assert [name for name, _ in weight_tasks(small_cfg)] == [
        "weights:exp_x1", "weights:w00_constant", "weights:w01_power"]
    assert len(maximal_tasks(small_cfg)) == 2
    names = [name for name, _ in operator_tasks(small_cfg)]
    assert len(names) == 2 + len(OPERATOR_KERNELS) * len(OPERATOR_RADIALS)
    assert "operators:two_arc.gaussian" in names


@pytest.mark.slow
def test_weight_families_are_certified(small_cfg):
    for name, task in weight_tasks(small_cfg)[1:]:
        records = task()
        assert all(r.passed for r in records), [r.check_id for r in records if not r.passed]


@pytest.mark.slow
def test_arm_family(small_cfg):
    records = {r.check_id: r for r in arm_family_checks(small_cfg)}
    assert records["cover.arm_family.membership"].passed
    assert records["cover.arm_family.summable"].passed
    assert records["cover.canonical_sin.hrect_fails"].passed


@pytest.mark.slow
def test_commutator_checks(small_cfg):
    records = {r.check_id: r for r in commutator_checks(small_cfg)}
    assert set(records) == {"operators.commutator.linear_reduction", "operators.commutator.cross_method",
                            "operators.commutator.moment_refusal", "operators.nonconv.cross_method"}
    assert records["operators.commutator.moment_refusal"].passed
    assert records["operators.commutator.linear_reduction"].passed
