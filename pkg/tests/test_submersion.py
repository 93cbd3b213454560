from dataclasses import replace

import numpy as np
import pytest

from qkgeom.errors import InvalidArgument, StructureError
from qkgeom.geometry import Chart, second_fundamental_block
from qkgeom.hypersurface import SamplePlan, induce_3_structure
from qkgeom.quaternion import check_structure_axioms, make_structure_triple, random_rotation
from qkgeom.scenarios import build_scenario, fubini_study_metric, hopf_section, right_multiply, unit_quaternion
from qkgeom.submersion import (
    base_metric,
    check_basic_fields,
    check_oneill,
    check_qr3_submersion,
    check_quaternionic_submersion,
    differential,
    fiber_compatibility,
    horizontal_lift,
    oneill_A,
    oneill_T,
    prop43_residuals,
    push_structure,
    split,
    vertical_horizontal_split,
)

from oracles import fibre_rotation_oracle

U0 = np.array([0.1, -0.2, 0.05, 0.1, 0.0, 0.15, -0.1])


def small(plan, n=4):
    return SamplePlan(plan.points[:n], plan.vectors[:n])


def test_differential(flat, hopf, rng):
    s = flat.submersion
    np.testing.assert_allclose(differential(s, np.zeros(7), np.eye(8)[0]), np.eye(4)[0], atol=1e-10)
    st = induce_3_structure(hopf.hypersurface, U0)
    assert np.linalg.norm(differential(hopf.submersion, U0, st.xi[0])) < 1e-6
    P = split(hopf.submersion, U0).frame.P
    X, Y = P @ rng.standard_normal(8), P @ rng.standard_normal(8)
    lin = differential(hopf.submersion, U0, 2 * X - 3 * Y) - 2 * differential(hopf.submersion, U0, X) \
        + 3 * differential(hopf.submersion, U0, Y)
    assert np.max(np.abs(lin)) < 1e-6


def test_vertical_horizontal_split(flat, hopf, hopf_plan):
    st = induce_3_structure(hopf.hypersurface, np.zeros(7))
    v, h = vertical_horizontal_split(hopf.submersion, np.zeros(7))
    assert np.max(np.abs(v - st.xi.T @ st.xi)) < 1e-6
    v, h = vertical_horizontal_split(flat.submersion, np.zeros(7))
    expected = np.zeros((8, 8))
    expected[4:7, 4:7] = np.eye(3)
    np.testing.assert_allclose(v, expected, atol=1e-12)
    for u in hopf_plan.points:
        sp = split(hopf.submersion, u)
        assert np.max(np.abs(sp.v @ sp.h)) < 1e-9
        assert np.max(np.abs(sp.v + sp.h - sp.frame.P)) < 1e-9


def test_split_rejects_wrong_fiber_dim(hopf):
    bad = replace(hopf.submersion, fiber_dim=2)
    with pytest.raises(StructureError):
        split(bad, U0)


def test_horizontal_lift(quat, hopf, rng):
    e1 = np.eye(4)[0]
    np.testing.assert_allclose(horizontal_lift(quat.submersion, e1, e1, np.concatenate([e1, np.zeros(4)])),
                               np.eye(8)[0], atol=1e-10)
    s = hopf.submersion
    q = s.pi(U0)
    st = induce_3_structure(hopf.hypersurface, U0)
    for _ in range(32):
        Xp = rng.standard_normal(4)
        L = horizontal_lift(s, q, Xp, U0)
        assert np.max(np.abs(st.xi @ L)) < 1e-8
        assert np.max(np.abs(differential(s, U0, L) - Xp)) < 1e-6
    with pytest.raises(InvalidArgument):
        horizontal_lift(s, q + 0.1, e1, U0)


def test_oneill_on_hyperplane(flat, flat_plan):
    reps = check_oneill(flat.submersion, small(flat_plan))
    assert reps["oneill_T_vanishes"].max_residual < 1e-6
    assert reps["oneill_A_vanishes"].max_residual < 1e-6


def test_oneill_T_matches_fibre_second_fundamental_form(hopf):
    """T_U V is the second fundamental form of the fibre inside M: the fibre
    chart t -> p exp(t) gives it through the projection onto T_p S^7."""
    s = hopf.submersion
    p = s.total(U0)
    fibre = Chart(lambda t: right_multiply(p, unit_quaternion(t)), -0.5 * np.ones(3), 0.5 * np.ones(3), 8)
    Ev = np.array([right_multiply(p, u) for u in np.eye(4)[1:]])
    B_R8 = second_fundamental_block(fibre, np.zeros(3), Ev, Ev)
    sp = split(s, U0)
    B_fibre = np.einsum("ij,abj->abi", sp.frame.P, B_R8)
    assert np.max(np.abs(B_fibre)) < 1e-5
    for a in range(3):
        for b in range(3):
            T = oneill_T(s, U0, Ev[a], Ev[b], sp)
            assert np.linalg.norm(T - B_fibre[a, b]) < 1e-4


def test_oneill_A_on_hopf(hopf, rng):
    s = hopf.submersion
    sp = split(s, U0)
    st = induce_3_structure(hopf.hypersurface, U0)
    X = sp.h @ rng.standard_normal(8)
    X /= np.linalg.norm(X)
    Z = sp.h @ rng.standard_normal(8)
    Y = Z - (Z @ X) * X
    Y /= np.linalg.norm(Y)
    A = oneill_A(s, U0, X, Y, sp)
    for a in range(3):
        assert abs(A @ st.xi[a] - (st.triple.J[a] @ X) @ Y) < 1e-3
    for a in range(3):
        assert np.linalg.norm(oneill_A(s, U0, X, st.triple.J[a] @ X, sp)) > 0.5


def test_push_structure(flat, hopf, hopf_plan):
    pt = push_structure(flat.submersion, np.full(7, 0.2))
    np.testing.assert_allclose(pt.J_prime.J, make_structure_triple(1, "left").J, atol=1e-10)
    s = hopf.submersion
    q0 = np.zeros(4)
    pt = push_structure(s, s.section(q0))
    assert check_structure_axioms(pt.J_prime, base_metric(s, q0)).max_residual < 1e-4
    for sc, plan in ((hopf, hopf_plan), (flat, None)):
        pts = plan.points[:6] if plan is not None else [np.zeros(7), np.full(7, -0.3)]
        for u in pts:
            vh, hv = prop43_residuals(split(sc.submersion, u), induce_3_structure(sc.hypersurface, u))
            assert vh < 1e-6 and hv < 1e-6


def test_pushed_metric_is_fubini_study(hopf, rng):
    for _ in range(6):
        q = rng.uniform(-0.5, 0.5, 4)
        np.testing.assert_allclose(base_metric(hopf.submersion, q), fubini_study_metric(q), atol=1e-8)
        np.testing.assert_allclose(hopf.submersion.pi(hopf.submersion.section(q)), q, atol=1e-12)
        np.testing.assert_allclose(np.linalg.norm(hopf_section(q)), 1.0)


def test_fiber_compatibility_examples(flat, hopf):
    s = hopf.submersion
    fc = fiber_compatibility(s, U0, U0)
    np.testing.assert_allclose(fc.C, np.eye(3), atol=1e-12)
    assert fc.residual < 1e-12
    lam = np.array([1.0, 0, 0, 1]) / np.sqrt(2)
    u2 = s.total.inverse(right_multiply(s.total(U0), lam))
    fc = fiber_compatibility(s, U0, u2)
    np.testing.assert_allclose(fc.C, fibre_rotation_oracle(lam), atol=1e-3)
    assert abs(fc.det - 1) < 1e-4
    f = flat.submersion
    fc = fiber_compatibility(f, np.zeros(7), f.fiber_shift(np.zeros(7), np.array([0.3, -0.2, 0.5])))
    np.testing.assert_allclose(fc.C, np.eye(3), atol=1e-8)
    with pytest.raises(InvalidArgument):
        fiber_compatibility(s, U0, np.zeros(7))


def test_qr3_submersion(flat, flat_plan, hopf, hopf_plan):
    rep = check_qr3_submersion(flat.submersion, small(flat_plan, 8))
    assert rep.max_residual < 1e-6
    rep = check_qr3_submersion(hopf.submersion, small(hopf_plan, 8))
    assert rep.max_residual < 1e-3 and rep.passed


def test_skewed_projection_is_not_isometric(hopf, hopf_plan):
    s = hopf.submersion
    D = np.diag([1.5, 1.0, 1.0, 1.0])
    Dinv = np.linalg.inv(D)
    skew = replace(s, projection=lambda u: D @ s.projection(u), section=lambda q: s.section(Dinv @ q),
                   base_metric_mode="explicit", explicit_metric=fubini_study_metric)
    rep = check_qr3_submersion(skew, small(hopf_plan, 6))
    assert rep.components["isometry"] > 0.1
    assert not rep.passed
    assert rep.components["pi_* phi_a = J'_a pi_*"] < 1e-6


def test_basic_fields(hopf, rng):
    pts = [rng.uniform(-0.3, 0.3, 4) for _ in range(4)]
    assert check_basic_fields(hopf.submersion, pts, rng).max_residual < 1e-4


def test_quaternionic_submersion_variants(quat):
    plan = SamplePlan.make(quat.submersion.total, 8, 2, 5)
    rep = check_quaternionic_submersion(quat.submersion, plan)
    assert rep.passed
    assert rep.info["omega_total"] < 1e-8 and rep.info["omega_base"] < 1e-8
    assert rep.info["total_hyperkaehler"] and rep.info["base_hyperkaehler"]

    C = random_rotation(np.random.default_rng(9))
    rotated = build_scenario("FlatQuaternionicProjection", n=2, k=1, base_rotation=C)
    rep = check_quaternionic_submersion(rotated.submersion, plan)
    assert rep.components["holomorphy"] < 1e-8 and rep.info["omega_base"] < 1e-8

    scaled = build_scenario("FlatQuaternionicProjection", n=2, k=1, base_scale=2.0)
    rep = check_quaternionic_submersion(scaled.submersion, plan)
    assert abs(rep.components["isometry"] - 1.0) < 1e-8
    assert not rep.passed


def test_quaternionic_submersion_needs_triples(hopf, hopf_plan):
    with pytest.raises(InvalidArgument):
        check_quaternionic_submersion(hopf.submersion, hopf_plan)
