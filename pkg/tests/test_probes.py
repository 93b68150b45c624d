"""
Tests for the empirical probes. Only structural facts and the clearly
separated negative control are asserted; trend flatness is left to the
full-resolution runs.
"""
import numpy as np
import pytest

from rough_sio.config.catalogue import build_kernel, build_radial, build_weight
from rough_sio.errors import UncertifiedWeightError
from rough_sio.models.kernel import KernelSpec
from rough_sio.models.starset import StarSet
from rough_sio.services.covering import build_cover, arm_rectangle_cover
from rough_sio.services.probes import (
    BoundednessTrend,
    boundedness_probe,
    boundedness_tasks,
    certify_weight,
    convergence_checks,
    convergence_probe,
    convergence_tasks,
    dyadic_ladder,
    norm_trend,
    probe_resolution,
    probe_tasks,
    probe_test_set,
    random_family,
    vector_probe,
)


def test_dyadic_ladder():
    assert dyadic_ladder([1.0, 0.25]) == [1.0, 0.5, 0.25]
    assert dyadic_ladder([0.75, 0.1]) == [0.5, 0.25, 0.125]


def test_probe_resolution(small_cfg):
    assert probe_resolution(small_cfg) == 64
    coarse = small_cfg.model_copy(update={"grid_resolution": 100})
    assert probe_resolution(coarse) == 100


def test_probe_test_set_is_seeded(small_cfg):
    first = probe_test_set(small_cfg, resolution=16)
    second = probe_test_set(small_cfg, resolution=16)
    assert len(first) == small_cfg.test_function_count
    assert first[0].values.shape == (16, 16)
    for a, b in zip(first, second):
        np.testing.assert_array_equal(a.values, b.values)


def test_trend_flatness():
    trend = BoundednessTrend(epsilons=[1.0, 0.5], ratios=[2.0, 2.0], slope=0.01, tolerance=0.05)
    assert trend.flat
    assert trend.to_dict()["semantics"].startswith("empirical lower bounds")
    assert not BoundednessTrend(epsilons=[], ratios=[], slope=-0.2, tolerance=0.05).flat


def test_certify_weight():
    cover = build_cover(StarSet.from_kernel(build_kernel("cos")))
    certify_weight(build_weight("power", {"alpha": 0.5}), 2.0, 1.25, cover)
    with pytest.raises(UncertifiedWeightError, match="weight-check"):
        certify_weight(build_weight("exp_x1", {"beta": 1.0}), 2.0, 1.25, arm_rectangle_cover(6))


def test_truncations_without_cancellation_grow(small_cfg):
    spec = KernelSpec(omega=build_kernel("constant"), radial=build_radial("constant"))
    trend = norm_trend(spec, None, 2.0, probe_test_set(small_cfg), dyadic_ladder(small_cfg.eps_list), 0.05)
    assert trend.ratios[-1] > trend.ratios[0]
    assert trend.slope < -0.05
    assert not trend.flat


def test_convergence_respects_the_truncation_bound(small_cfg):
    (record,) = convergence_checks("cos", "constant", {"value": 1.0}, small_cfg)
    assert record.check_id == "convergence.cos.constant"
    assert record.passed
    assert len(record.computed["pairs"]) == 3 * len(small_cfg.probe_points) * 2


def test_random_family_stays_on_the_grid(small_cfg):
    family = random_family(small_cfg, np.random.default_rng(0))
    assert len(family) == small_cfg.family_size
    assert all(f.values.shape == (24, 24) for f in family)


def test_vector_probe_record(small_cfg):
    (record,) = vector_probe(small_cfg)
    assert record.probe
    assert record.computed["families"] == small_cfg.vector_families
    assert record.computed["max_over_median"] >= 1.0


def test_probe_task_names(small_cfg):
    names = [name for name, _ in probe_tasks(small_cfg)]
    assert len(names) == len(set(names))
    assert names[:2] == ["probe:boundedness:0", "probe:boundedness:1"]
    assert "probe:boundedness:negative" in names
    assert len(convergence_tasks(small_cfg)) == 9
    assert names[-1] == "probe:vector_valued"
    assert len(boundedness_tasks(small_cfg)) == len(small_cfg.weights) + 2


@pytest.mark.slow
def test_boundedness_probe_report(small_cfg):
    report = boundedness_probe(small_cfg)
    assert report.title == "boundedness probe"
    ids = [record.check_id for record in report.records]
    assert len(ids) == 2 * len(small_cfg.weights) + 1
    assert "probe.boundedness.no_cancellation" in ids
    assert not any(check_id.startswith("error.") for check_id in ids)
    assert all(record.probe for record in report.records)
    assert report.passed


@pytest.mark.slow
def test_convergence_probe_report(small_cfg):
    report = convergence_probe(small_cfg)
    assert report.title == "convergence probe"
    assert len(report.records) == len(convergence_tasks(small_cfg))
    assert {record.family for record in report.records} == {"convergence"}
    assert report.get("convergence.cos.constant").passed
