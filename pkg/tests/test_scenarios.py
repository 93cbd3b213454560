import numpy as np
import pytest

from qkgeom.errors import InvalidArgument
from qkgeom.scenarios import SCENARIOS, build_scenario, expected_table, hopf_projection, hopf_section
from qkgeom.suite import Runner, RunConfig, run_suite


def test_builders(flat, hopf, quat):
    M = flat.hypersurface
    assert M.chart.ambient_dim == 8 and M.chart.domain_dim == 7
    np.testing.assert_array_equal(M.normal(np.zeros(7)), np.eye(8)[7])
    assert hopf.objects["triple"].convention == "right"
    assert quat.submersion.fiber_dim == 4 and quat.hypersurface is None


def test_hopf_projection_section_roundtrip(rng):
    for _ in range(10):
        q = rng.standard_normal(4)
        np.testing.assert_allclose(hopf_projection(hopf_section(q)), q, atol=1e-12)


def test_build_errors():
    with pytest.raises(InvalidArgument):
        build_scenario("FlatHyperplane", m=3)
    with pytest.raises(InvalidArgument):
        build_scenario("FlatQuaternionicProjection", n=2, k=2)
    with pytest.raises(InvalidArgument):
        build_scenario("FlatQuaternionicProjection", n=4, k=1)
    with pytest.raises(InvalidArgument):
        build_scenario("Torus")
    assert build_scenario("hopfsphere").name == "HopfSphere"


@pytest.mark.parametrize("name", SCENARIOS)
def test_every_expected_row_is_implemented(name):
    sc = build_scenario(name)
    runner = Runner(sc, RunConfig(name, samples=4))
    for row in expected_table(sc):
        assert callable(getattr(runner, row["check"], None)), row["check"]
        assert row["expected"] in ("pass", "fail")


def test_required_failures_are_listed(hopf):
    table = {r["check"]: r["expected"] for r in expected_table(hopf)}
    assert table["cosymplectic"] == "fail"
    assert table["oneill_A_vanishes"] == "fail"
    assert table["space_form"] == "pass"


@pytest.mark.parametrize("name", SCENARIOS)
def test_default_runs_match_expectations(name, suite_reports):
    rows = suite_reports[name]
    bad = {k: (r.expected, r.max_residual) for k, r in rows.items() if not r.matches_expectation}
    assert not bad


def test_rebuild_is_bit_identical():
    cfg = RunConfig("FlatHyperplane", {"m": 1}, samples=6)
    _, a = run_suite(cfg)
    _, b = run_suite(cfg)
    assert [r.components for r in a] == [r.components for r in b]


def test_hopf_chart_independence(suite_reports):
    """Total-space rows give the same verdicts on a patch tilted towards the
    second quaternionic coordinate."""
    _, rows = run_suite(RunConfig("HopfSphere", {"m": 1, "patch": "tilted"}, samples=12))
    tilted = {r.check_name: r for r in rows}
    north = suite_reports["HopfSphere"]
    for name in ("ac3_axioms", "tangent_normal_decomposition", "mixed_geodesic", "extrinsic_sphere",
                 "cosymplectic", "qr3_submersion", "oneill_T_vanishes", "oneill_A_vanishes"):
        assert tilted[name].passed == north[name].passed, name
    assert abs(tilted["space_form"].info["c"] - 4.0) < 0.08
