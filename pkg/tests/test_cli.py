"""
Tests for the rough-sio command line.
"""
import csv
import json
import math

import pytest

from rough_sio.cli import build_parser, main


@pytest.fixture
def documents(tmp_path):
    paths = {}
    for name, data in {
        "two_arc": {"callable_id": "two_arc"},
        "cos": {"callable_id": "cos"},
        "constant": {"callable_id": "constant"},
        "broken": {"callable_id": "no_such_kernel"},
        "bump": {"family": "bump", "center": [0.0, 0.0], "width": 1.0},
        "unit_weight": {"family": "constant"},
        "points": [[0.0, 0.0]],
    }.items():
        path = tmp_path / f"{name}.json"
        path.write_text(json.dumps(data))
        paths[name] = str(path)
    return paths


def run(capsys, argv):
    code = main(argv)
    return code, json.loads(capsys.readouterr().out) if code in (0, 1) else None


def test_parser_requires_a_command():
    with pytest.raises(SystemExit):
        build_parser().parse_args([])


def test_set_info(capsys, documents, tmp_path):
    code, data = run(capsys, ["set-info", documents["two_arc"], "--csv", str(tmp_path / "csv")])
    assert code == 0
    assert data["integrals"]["measure"] == pytest.approx(math.pi)
    assert [s["m"] for s in data["strata"]] == [0, 1]
    assert (tmp_path / "csv" / "strata.csv").exists()
    assert (tmp_path / "csv" / "outline.csv").exists()
    with open(tmp_path / "csv" / "outline.csv", newline="") as f:
        rows = [(float(row["x"]), float(row["y"])) for row in csv.DictReader(f)]
    assert len(rows) == 4
    assert rows[0] == pytest.approx((math.sqrt(2.0), 0.0))
    assert rows[1] == pytest.approx((0.0, math.sqrt(2.0)), abs=1e-12)


def test_cover_writes_rectangle_corners(capsys, documents, tmp_path):
    code, data = run(capsys, ["cover", documents["two_arc"], "--samples", "2000", "--csv", str(tmp_path)])
    assert code == 0
    assert data["verification"]["coverage_miss_rate"] == 0.0
    with open(tmp_path / "cover.csv", newline="") as f:
        rows = list(csv.DictReader(f))
    assert len(rows) % 4 == 0 and rows


def test_weight_check_exit_code(capsys, documents):
    code, data = run(capsys, ["weight-check", documents["cos"], documents["unit_weight"], "--p", "2"])
    assert code == 0
    assert data["verdict"] == "certified-at-probe-scale"


def test_apply_direct(capsys, documents, tmp_path):
    out = tmp_path / "apply.json"
    code = main(["apply", documents["constant"], documents["bump"], "--eps", "0.5", "--mode", "direct",
                 "--points", documents["points"], "--out", str(out)])
    assert code == 0
    (row,) = json.loads(out.read_text())["values"]
    expected = 2.0 * math.pi * (-math.log(0.5) - 0.75 + (1.0 - 0.5**4) / 4.0)
    assert row["value_direct"][0] == pytest.approx(expected, rel=1e-3)
    assert "value_rep" not in row


def test_pv_of_radial_function_under_odd_kernel(capsys, documents):
    code, data = run(capsys, ["pv", documents["cos"], documents["bump"], "--points", documents["points"]])
    assert code == 0
    assert abs(data["c_omega"][0]) < 1e-10
    (row,) = data["values"]
    assert abs(row["value_limit"][0]) < 1e-8
    assert row["cauchy"]


def test_library_errors_exit_with_status_two(capsys, documents):
    assert main(["set-info", documents["broken"]]) == 2
    err = capsys.readouterr().err
    assert err.startswith("rough-sio: ")
    assert "callable_id" in err


def test_missing_document_exits_with_status_two(capsys, tmp_path):
    assert main(["cover", str(tmp_path / "missing.json")]) == 2
