import numpy as np
import pytest

from qkgeom.hypersurface import SamplePlan
from qkgeom.scenarios import build_scenario
from qkgeom.suite import RunConfig, run_suite

# Filled by test_acceptance.py; printed at the end of the session.
ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])


@pytest.fixture(scope="session")
def hopf():
    return build_scenario("HopfSphere", m=1)


@pytest.fixture(scope="session")
def flat():
    return build_scenario("FlatHyperplane", m=1)


@pytest.fixture(scope="session")
def quat():
    return build_scenario("FlatQuaternionicProjection", n=2, k=1)


def plan_for(sc, n_points=16, n_vectors=6, seed=7):
    return SamplePlan.make(sc.submersion.total, n_points, n_vectors, seed, radius=sc.sample_radius)


@pytest.fixture(scope="session")
def hopf_plan(hopf):
    return plan_for(hopf)


@pytest.fixture(scope="session")
def flat_plan(flat):
    return plan_for(flat)


@pytest.fixture(scope="session")
def suite_reports():
    """Default-configuration reports for every scenario, keyed by name."""
    out = {}
    for name, params in (("FlatHyperplane", {"m": 1}), ("HopfSphere", {"m": 1}),
                         ("FlatQuaternionicProjection", {"n": 2, "k": 1})):
        _, rows = run_suite(RunConfig(name, params))
        out[name] = {r.check_name: r for r in rows}
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(2024)
