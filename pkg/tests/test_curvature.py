import numpy as np
import pytest

from qkgeom.curvature import CurvatureSample, riemann_tensor, space_form_fit, space_form_model
from qkgeom.errors import InvalidArgument, NumericalFailure
from qkgeom.quaternion import make_structure_triple
from qkgeom.scenarios import fubini_study_metric

from oracles import symbolic_sectional_oracle


def sphere2_metric(r):
    return lambda u: np.diag([r ** 2, r ** 2 * np.sin(u[0]) ** 2])


def test_symbolic_oracle_is_constant_four():
    K = symbolic_sectional_oracle()
    for q in ([0, 0, 0, 0], [0.3, -0.2, 0.1, 0.4], [1.0, 0.0, -0.5, 0.2]):
        assert abs(float(K(q)) - 4.0) < 1e-12


def test_constant_metric_is_flat():
    s = riemann_tensor(lambda u: np.diag([1.0, 2.0, 3.0]), np.zeros(3))
    assert np.max(np.abs(s.christoffels)) == 0.0
    assert np.max(np.abs(s.riemann)) == 0.0


@pytest.mark.parametrize("r", [1.0, 2.0, 0.5])
def test_round_sphere_curvature(r):
    s = riemann_tensor(sphere2_metric(r), np.array([np.pi / 3, 0.2]))
    assert abs(s.sectional([1, 0], [0, 1]) - 1 / r ** 2) < 1e-3


def test_sign_convention_operator():
    # unit sphere: R(X, Y)Y = g(Y, Y)X - g(X, Y)Y
    s = riemann_tensor(sphere2_metric(1.0), np.array([1.0, 0.0]))
    X, Y = np.array([1.0, 0.0]), np.array([0.0, 1.0])
    np.testing.assert_allclose(s.operator(X, Y, Y), (Y @ s.metric @ Y) * X, atol=1e-5)


def test_not_positive_definite():
    with pytest.raises(NumericalFailure):
        riemann_tensor(lambda u: np.diag([1.0, -1.0]), np.zeros(2))


def test_hp1_symmetries(rng):
    for _ in range(4):
        q = rng.uniform(-0.5, 0.5, 4)
        s = riemann_tensor(fubini_study_metric, q)
        assert s.antisymmetry_residual < 1e-3
        assert s.bianchi_residual < 1e-3


def test_space_form_model_reproduces_itself():
    T = make_structure_triple(2)
    M = space_form_model(np.eye(8), T)
    fake = CurvatureSample(np.zeros(8), np.zeros((8, 8, 8)), 3.0 * M, np.eye(8))
    fit = space_form_fit([fake], T)
    assert abs(fit.c - 3.0) < 1e-12 and fit.relative_residual < 1e-12


def test_space_form_fit_hp1_against_oracle(rng):
    oracle = symbolic_sectional_oracle()
    # a conformally flat metric is hermitian for any constant orthogonal triple
    T = make_structure_triple(1, "right")
    pts = [rng.uniform(-0.5, 0.5, 4) for _ in range(8)]
    curv = [riemann_tensor(fubini_study_metric, q) for q in pts]
    fit = space_form_fit(curv, T, planes_per_point=2)
    expected = float(oracle(pts[0]))
    assert abs(fit.c - expected) / expected < 0.02
    assert fit.relative_residual < 0.02
    assert len(fit.quaternionic_sectional) >= 16 and fit.spread < 0.02


def test_space_form_fit_flat_and_guards():
    T = make_structure_triple(1)
    flat = riemann_tensor(lambda u: np.eye(4), np.zeros(4))
    fit = space_form_fit([flat], T)
    assert fit.flat and fit.c == 0.0
    s4 = riemann_tensor(lambda u: np.eye(5), np.zeros(5))
    with pytest.raises(InvalidArgument):
        space_form_fit([s4], T)
    with pytest.raises(InvalidArgument):
        space_form_fit([flat, flat], [T])
