import json

import pytest

from qkgeom.cli import dumps, main


def test_unknown_scenario_exits_2(capsys):
    assert main(["foo"]) == 2
    err = capsys.readouterr().err
    assert "unknown scenario" in err and "usage" in err


@pytest.mark.parametrize("argv", [
    ["HopfSphere", "--samples", "2"],
    ["HopfSphere", "--tol-d1", "0"],
    ["HopfSphere", "--n", "2"],
    ["FlatQuaternionicProjection", "--m", "1"],
    ["FlatHyperplane", "--m", "5"],
    ["FlatHyperplane", "--format", "xml"],
    [],
])
def test_usage_errors_exit_2(argv, capsys):
    assert main(argv) == 2


def test_flat_hyperplane_text(capsys):
    assert main(["FlatHyperplane", "--samples", "8"]) == 0
    out = capsys.readouterr().out
    assert out.rstrip().endswith("OVERALL PASS")
    assert "tangent_normal_decomposition" in out


def test_json_schema_and_file_output(tmp_path):
    path = tmp_path / "r.json"
    assert main(["FlatQuaternionicProjection", "--format", "json", "--out", str(path)]) == 0
    doc = json.loads(path.read_text())
    assert list(doc) == ["scenario", "params", "config", "rows", "overall"]
    assert doc["params"] == {"n": 2, "k": 1}
    assert doc["overall"] == "PASS"
    for row in doc["rows"]:
        assert list(row) == ["check_name", "paper_ref", "expected", "passed", "max_residual", "tolerance"]
        assert row["paper_ref"]
    scaled = [r for r in doc["rows"] if r["check_name"] == "quaternionic_submersion_scaled_base"][0]
    assert scaled["expected"] == "fail" and scaled["passed"] is False


def test_mismatch_exits_1(capsys):
    # a tolerance so loose that the required failures pass
    assert main(["FlatQuaternionicProjection", "--tol-d1", "10"]) == 1
    assert "OVERALL FAIL" in capsys.readouterr().out


def test_dumps_floats():
    assert dumps({"a": 0.1, "b": [1, True, None]}, indent=0).replace("\n", "") == '{"a": 0.10000000000000001,"b": [1,true,null]}'
    assert json.loads(dumps({"x": 1e-300})) == {"x": 1e-300}
