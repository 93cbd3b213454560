import numpy as np
import pytest

from qkgeom.errors import InvalidHypersurface, SamplingError
from qkgeom.hypersurface import (
    OrientedHypersurface,
    SamplePlan,
    ac3_residuals,
    build_3_structure,
    check_ac3_axioms,
    check_cosymplectic,
    check_decomposition,
    check_mixed_geodesic,
    check_vertical_integrability,
    induce_3_structure,
    tangent_samples,
)
from qkgeom.quaternion import make_structure_triple
from qkgeom.report import CheckReport
from qkgeom.scenarios import bump_height, graph_chart, identity_chart, random_graph_height

E8 = np.eye(8)


def graph_hypersurface(height, convention="left"):
    return OrientedHypersurface(graph_chart(height, 7), make_structure_triple(2, convention))


def test_hyperplane_xi_fields(flat):
    st = induce_3_structure(flat.hypersurface, np.zeros(7))
    np.testing.assert_array_equal(st.normal, E8[7])
    # -J_1 e_8 = -(i k) = j
    np.testing.assert_allclose(st.xi[0], E8[6], atol=1e-15)
    st2 = induce_3_structure(flat.hypersurface, np.full(7, 0.3))
    np.testing.assert_allclose(st2.xi, st.xi, atol=1e-15)


def test_sphere_xi_fields_left_triple():
    T = make_structure_triple(2, "left")
    P = np.eye(8) - np.outer(E8[0], E8[0])
    st = build_3_structure(E8[0], E8[0], P, T)
    np.testing.assert_array_equal(st.xi, -E8[1:4])


def test_phi_on_xi(hopf, hopf_plan):
    for u in hopf_plan.points[:6]:
        st = induce_3_structure(hopf.hypersurface, u)
        np.testing.assert_allclose(st.phi[0] @ st.xi[1], st.xi[2], atol=1e-12)
        np.testing.assert_allclose(st.phi[0] @ st.xi[2], -st.xi[1], atol=1e-12)


def test_ac3_on_scenarios(flat, flat_plan, hopf, hopf_plan):
    assert check_ac3_axioms(flat.hypersurface, flat_plan).max_residual < 1e-10
    assert check_ac3_axioms(hopf.hypersurface, hopf_plan).max_residual < 1e-8


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_ac3_on_random_graph(seed):
    M = graph_hypersurface(random_graph_height(7, seed))
    plan = SamplePlan.make(M.chart, 12, 6, seed)
    assert check_ac3_axioms(M, plan).max_residual < 1e-8
    assert check_decomposition(M, plan).max_residual < 1e-10


def test_corrupted_xi2_fails():
    M = graph_hypersurface(random_graph_height(7, 4))
    st = induce_3_structure(M, np.zeros(7))
    st.xi[1] *= 1.1
    X = tangent_samples(st, np.random.default_rng(0).standard_normal((4, 8)))
    rep = CheckReport("corrupted", "", 1e-8)
    ac3_residuals(st, X, X[::-1], rep)
    assert abs(rep.components["eta(xi)=1"] - 0.21) < 1e-12
    assert not rep.passed


def test_decomposition(hopf, hopf_plan):
    rep = check_decomposition(hopf.hypersurface, hopf_plan)
    assert rep.max_residual < 1e-10


def test_cosymplectic_verdicts(flat, flat_plan, hopf, hopf_plan):
    small = SamplePlan(flat_plan.points[:4], flat_plan.vectors[:4])
    rep = check_cosymplectic(flat.hypersurface, small)
    assert rep.max_residual < 1e-6 and rep.passed
    small = SamplePlan(hopf_plan.points[:4], hopf_plan.vectors[:4])
    rep = check_cosymplectic(hopf.hypersurface, small)
    assert rep.max_residual >= 0.5 and not rep.passed
    # nabla eta_a (Y) equals g(Y, nabla xi_a) by metricity
    assert rep.info["metricity_residual"] < 1e-4


def test_mixed_geodesic_verdicts(flat, flat_plan, hopf, hopf_plan):
    rep = check_mixed_geodesic(flat.hypersurface, flat_plan)
    assert rep.max_residual < 1e-10 and rep.info["bracket_residual"] < 1e-10
    rep = check_mixed_geodesic(hopf.hypersurface, hopf_plan)
    assert rep.max_residual < 1e-6 and rep.info["bracket_residual"] < 1e-4
    vi = check_vertical_integrability(hopf.hypersurface, SamplePlan(hopf_plan.points[:3], hopf_plan.vectors[:3]))
    assert vi.passed


def test_bump_breaks_mixed_geodesic():
    eps = 0.1
    M = graph_hypersurface(bump_height(eps, 1))
    plan = SamplePlan.make(M.chart, 8, 4, 3)
    rep = check_mixed_geodesic(M, plan)
    assert rep.max_residual > eps / 2 and not rep.passed


def test_invalid_hypersurfaces():
    with pytest.raises(InvalidHypersurface):
        OrientedHypersurface(identity_chart(8), make_structure_triple(2))
    with pytest.raises(InvalidHypersurface):
        OrientedHypersurface(graph_chart(lambda u: 0.0, 7), make_structure_triple(1))
    bad = OrientedHypersurface(graph_chart(lambda u: 0.0, 7), make_structure_triple(2),
                               normal_field=lambda u: 2 * E8[7])
    with pytest.raises(InvalidHypersurface):
        induce_3_structure(bad, np.zeros(7))


def test_sample_plan_is_deterministic(hopf):
    a = SamplePlan.make(hopf.submersion.total, 8, 3, 42, radius=0.6)
    b = SamplePlan.make(hopf.submersion.total, 8, 3, 42, radius=0.6)
    np.testing.assert_array_equal(a.points, b.points)
    np.testing.assert_array_equal(a.vectors, b.vectors)
    assert np.all(np.linalg.norm(a.points, axis=1) < 0.6)
    with pytest.raises(SamplingError):
        SamplePlan.make(hopf.submersion.total, 0, 3, 1)
