"""
Tests for the JSON document loaders and the suite configuration.
"""
import json
import math

import numpy as np
import pytest

from rough_sio.config.documents import (
    load_kernel,
    parse_field,
    parse_function,
    parse_kernel,
    parse_points,
    parse_weight,
    read_json,
    write_json,
)
from rough_sio.config.suite_config import SuiteConfig, load_suite_config, save_suite_config
from rough_sio.errors import ConfigurationError
from rough_sio.models.analytic import TestFunction
from rough_sio.models.grid import GridFunction


def test_cell_kernel_document():
    spec = parse_kernel({
        "cells": [{"angle_from": 0.0, "angle_to": math.pi, "value": 1.0},
                  {"angle_from": math.pi, "angle_to": 2 * math.pi, "value": {"re": -1.0}}],
        "radial": {"kind": "gaussian", "params": {"scale": 2.0}},
    })
    assert spec.omega.integral() == pytest.approx(0.0, abs=1e-12)
    assert spec.radial.kind == "gaussian"


def test_callable_kernel_document_with_truncation():
    spec = parse_kernel({"callable_id": "cos", "radial": {"kind": "constant", "epsilon": 0.5}})
    assert spec.omega.catalogue_id == "cos"
    assert spec.radial.epsilon == 0.5


def test_kernel_document_needs_exactly_one_representation():
    with pytest.raises(ConfigurationError):
        parse_kernel({"dimension": 2})
    with pytest.raises(ConfigurationError):
        parse_kernel({"callable_id": "cos", "cells": [{"angle_from": 0.0, "angle_to": 1.0, "value": 1.0}]})


def test_kernel_document_rejects_unknown_fields():
    with pytest.raises(ConfigurationError):
        parse_kernel({"callable_id": "cos", "colour": "red"})


def test_kernel_document_reports_field_path():
    with pytest.raises(ConfigurationError) as excinfo:
        parse_kernel({"callable_id": "cos", "radial": {"sigma": 0.5}})
    assert excinfo.value.field == "radial.sigma"


def test_cell_lists_are_planar_only():
    with pytest.raises(ConfigurationError):
        parse_kernel({"dimension": 3, "cells": [{"angle_from": 0.0, "angle_to": 1.0, "value": 1.0}]})


def test_weight_document():
    w = parse_weight({"family": "power", "alpha": -0.5})
    assert w.degree == -0.5
    with pytest.raises(ConfigurationError):
        parse_weight({"family": "triangle"})


def test_function_documents():
    analytic = parse_function({"family": "bump", "center": [1.0, 2.0], "width": 0.5})
    assert isinstance(analytic, TestFunction)
    assert analytic(np.array([1.0, 2.0])) == pytest.approx(1.0)

    grid = parse_function({"kind": "grid", "corner": [0.0, 0.0], "sides": [1.0, 1.0], "resolution": [2, 3],
                           "values": [[1, 2, 3], [4, 5, 6]]})
    assert isinstance(grid, GridFunction)
    assert grid.resolution == (2, 3)


def test_grid_document_shape_mismatch():
    with pytest.raises(ConfigurationError) as excinfo:
        parse_function({"kind": "grid", "corner": [0.0, 0.0], "sides": [1.0, 1.0], "resolution": [3, 3],
                        "values": [[1, 2], [3, 4]]})
    assert excinfo.value.field == "values"


def test_complex_grid_document():
    grid = parse_function({"kind": "grid", "corner": [0.0, 0.0], "sides": [1.0, 1.0], "resolution": [2, 2],
                           "values": {"re": [[1, 0], [0, 1]], "im": [[0, 1], [1, 0]]}})
    assert np.iscomplexobj(grid.values)


def test_field_and_points_documents():
    a = parse_field({"kind": "sinusoid", "vector": [1.0, 0.0], "amplitude": 2.0})
    assert a.lipschitz_bound == pytest.approx(2.0)
    points = parse_points([[0.0, 0.0], [1.0, 2.0]])
    assert points.shape == (2, 2)
    with pytest.raises(ConfigurationError):
        parse_points([[0.0, 0.0], [1.0]])
    with pytest.raises(ConfigurationError):
        parse_points([])


def test_read_json_errors(tmp_path):
    with pytest.raises(ConfigurationError) as excinfo:
        read_json(str(tmp_path / "missing.json"))
    assert excinfo.value.field == "path"
    broken = tmp_path / "broken.json"
    broken.write_text("{not json")
    with pytest.raises(ConfigurationError):
        read_json(str(broken))


def test_write_json_creates_folders_and_sorts_keys(tmp_path):
    path = tmp_path / "nested" / "doc.json"
    write_json(str(path), {"b": 1, "a": 2})
    assert path.read_text().index('"a"') < path.read_text().index('"b"')
    assert read_json(str(path)) == {"a": 2, "b": 1}


def test_load_kernel_from_file(tmp_path):
    path = tmp_path / "kernel.json"
    path.write_text(json.dumps({"callable_id": "two_arc"}))
    spec = load_kernel(str(path))
    assert spec.omega.catalogue_id == "two_arc"


class TestSuiteConfig:
    def test_default_config_loads(self):
        cfg = load_suite_config()
        assert cfg.r == 1.25
        assert cfg.eps_list == sorted(cfg.eps_list, reverse=True)
        assert {k.id for k in cfg.kernels} >= {"constant", "cos", "two_arc", "dyadic_arms"}

    def test_round_trip_through_file(self, small_cfg, tmp_path):
        path = tmp_path / "suite.json"
        assert save_suite_config(small_cfg, str(path))
        assert load_suite_config(str(path)) == small_cfg

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigurationError):
            load_suite_config(str(tmp_path / "nope.json"))

    @pytest.mark.parametrize("update", [{"p_values": [1.0]}, {"r": 1.0}, {"eps_list": [0.0]},
                                        {"grid_resolution": 1}, {"tolerances": {"identity": -1.0}}])
    def test_invalid_values(self, small_cfg, update):
        data = small_cfg.model_dump()
        data.update(update)
        with pytest.raises(ValueError):
            SuiteConfig.model_validate(data)

    def test_tolerance_override(self, small_cfg):
        cfg = small_cfg.model_copy(update={"tolerances": {"identity": 0.5}})
        assert cfg.tolerance("identity") == 0.5
        assert cfg.tolerance("equality") == 1e-8
