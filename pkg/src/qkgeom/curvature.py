"""Christoffel symbols and Riemann tensors of chart metrics, sectional
curvatures and the quaternionic space-form fit.

Sign convention: R(X, Y)Z = nabla_X nabla_Y Z - nabla_Y nabla_X Z - nabla_[X,Y] Z,
so the unit round sphere has sectional curvature +1. Components are stored
as ``riemann[i, j, k, l] = R^i_{jkl}`` with R(e_k, e_l) e_j = R^i_{jkl} e_i.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import InvalidArgument, NumericalFailure
from .quaternion import StructureTriple

CONVENTION = "R(X,Y)Z = nabla_X nabla_Y Z - nabla_Y nabla_X Z - nabla_[X,Y] Z"


def _metric(metric_field, u) -> np.ndarray:
    g = np.asarray(metric_field(u), dtype=float)
    try:
        np.linalg.cholesky(g)
    except np.linalg.LinAlgError:
        raise NumericalFailure(f"metric is not positive definite at {u}") from None
    return g


def metric_derivative(metric_field: Callable, u, h: float) -> np.ndarray:
    """dg[k, i, j] = d_k g_ij by central differences."""
    u = np.asarray(u, dtype=float)
    d = u.shape[0]
    out = []
    for k in range(d):
        e = np.zeros(d)
        e[k] = h
        out.append((_metric(metric_field, u + e) - _metric(metric_field, u - e)) / (2 * h))
    return np.array(out)


def christoffel(metric_field: Callable, u, h: float = 1e-3) -> np.ndarray:
    """Gamma[i, k, l] = Gamma^i_{kl}."""
    g = _metric(metric_field, u)
    dg = metric_derivative(metric_field, u, h)
    # lowered[m, k, l] = 1/2 (d_k g_ml + d_l g_mk - d_m g_kl)
    lowered = 0.5 * (dg.transpose(1, 0, 2) + dg.transpose(1, 2, 0) - dg)
    return np.einsum("im,mkl->ikl", np.linalg.inv(g), lowered)


@dataclass
class CurvatureSample:
    point: np.ndarray
    christoffels: np.ndarray
    riemann: np.ndarray
    metric: np.ndarray
    convention_flag: str = CONVENTION
    antisymmetry_residual: float = 0.0
    bianchi_residual: float = 0.0

    @property
    def riemann_lowered(self) -> np.ndarray:
        """R_{ijkl} = g_im R^m_{jkl}."""
        return np.einsum("im,mjkl->ijkl", self.metric, self.riemann)

    def operator(self, X, Y, Z) -> np.ndarray:
        """Components of R(X, Y)Z."""
        return np.einsum("ijkl,j,k,l->i", self.riemann, Z, X, Y)

    def sectional(self, X, Y) -> float:
        g = self.metric
        X = np.asarray(X, dtype=float)
        Y = np.asarray(Y, dtype=float)
        num = float(X @ g @ self.operator(X, Y, Y))
        den = float((X @ g @ X) * (Y @ g @ Y) - (X @ g @ Y) ** 2)
        return num / den


def riemann_tensor(metric_field: Callable, u, h: float = 1e-3) -> CurvatureSample:
    """Riemann tensor from central differences of Christoffel symbols.

    R^i_{jkl} = d_k G^i_{lj} - d_l G^i_{kj} + G^i_{km} G^m_{lj} - G^i_{lm} G^m_{kj}
    """
    u = np.asarray(u, dtype=float)
    d = u.shape[0]
    G = christoffel(metric_field, u, h)
    dG = np.empty((d,) + G.shape)  # dG[k, i, a, b] = d_k G^i_{ab}
    for k in range(d):
        e = np.zeros(d)
        e[k] = h
        dG[k] = (christoffel(metric_field, u + e, h) - christoffel(metric_field, u - e, h)) / (2 * h)
    R = (np.einsum("kilj->ijkl", dG) - np.einsum("likj->ijkl", dG)
         + np.einsum("ikm,mlj->ijkl", G, G) - np.einsum("ilm,mkj->ijkl", G, G))
    g = _metric(metric_field, u)
    sample = CurvatureSample(u, G, R, g)
    low = sample.riemann_lowered
    scale = max(1.0, float(np.max(np.abs(low))))
    sample.antisymmetry_residual = float(max(np.max(np.abs(low + low.transpose(1, 0, 2, 3))),
                                             np.max(np.abs(low + low.transpose(0, 1, 3, 2))))) / scale
    bianchi = R + R.transpose(0, 2, 3, 1) + R.transpose(0, 3, 1, 2)
    sample.bianchi_residual = float(np.max(np.abs(bianchi))) / scale
    return sample


# --- quaternionic space forms ---------------------------------------------

def space_form_model(metric: np.ndarray, triple: StructureTriple) -> np.ndarray:
    """Tensor M[i, j, k, l] with R = c * M for a quaternionic space form:

    R(X,Y)Z = c/4 { g(Z,Y)X - g(X,Z)Y + sum_a [ g(Z,J_a Y)J_a X
                  - g(Z,J_a X)J_a Y + 2 g(X,J_a Y)J_a Z ] }

    with X = e_k, Y = e_l, Z = e_j, component i.
    """
    g = np.asarray(metric, dtype=float)
    d = g.shape[0]
    eye = np.eye(d)
    M = np.einsum("jl,ik->ijkl", g, eye) - np.einsum("kj,il->ijkl", g, eye)
    for J in triple.J:
        gJ = g @ J  # gJ[a, b] = g(e_a, J e_b)
        M += np.einsum("jl,ik->ijkl", gJ, J)        # g(Z, J Y) J X
        M -= np.einsum("jk,il->ijkl", gJ, J)        # g(Z, J X) J Y
        M += 2 * np.einsum("kl,ij->ijkl", gJ, J)    # 2 g(X, J Y) J Z
    return M / 4.0


@dataclass
class SpaceFormFit:
    c: float
    relative_residual: float
    flat: bool
    quaternionic_sectional: list[float] = field(default_factory=list)
    spread: float = 0.0
    curvature_norm: float = 0.0


def half_quaternionic_planes(triple: StructureTriple, metric, rng: np.random.Generator,
                             count: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """Random planes span{X, Y} with Y in Q(X)."""
    d = triple.dim
    planes = []
    for _ in range(count):
        X = rng.standard_normal(d)
        w = rng.standard_normal(3)
        Y = sum(w[a] * (triple.J[a] @ X) for a in range(3))
        planes.append((X, Y))
    return planes


def space_form_fit(curvature: Sequence[CurvatureSample], triples, *, noise_floor: float = 1e-5,
                   planes_per_point: int = 2, seed: int = 0) -> SpaceFormFit:
    """Least-squares fit of c in R = c * M over all components and samples.

    ``triples`` is either one StructureTriple or one per curvature sample.
    When ||R|| is below 10x ``noise_floor`` the fit is skipped and a flatness
    flag with c = 0 is returned.
    """
    curvature = list(curvature)
    if isinstance(triples, StructureTriple):
        triples = [triples] * len(curvature)
    triples = list(triples)
    if len(triples) != len(curvature):
        raise InvalidArgument("need one structure triple per curvature sample")
    for s, T in zip(curvature, triples):
        d = s.metric.shape[0]
        if d % 4 or T.dim != d:
            raise InvalidArgument(f"dimension {d} is not quaternionic or does not match the triple")
    R = np.concatenate([s.riemann.ravel() for s in curvature])
    Rn = float(np.linalg.norm(R))
    if Rn < 10 * noise_floor * np.sqrt(R.size):
        return SpaceFormFit(0.0, 0.0, True, curvature_norm=Rn)
    M = np.concatenate([space_form_model(s.metric, T).ravel() for s, T in zip(curvature, triples)])
    c = float(R @ M / (M @ M))
    rel = float(np.linalg.norm(R - c * M) / Rn)
    rng = np.random.default_rng(seed)
    ks = []
    for s, T in zip(curvature, triples):
        for X, Y in half_quaternionic_planes(T, s.metric, rng, planes_per_point):
            ks.append(s.sectional(X, Y))
    mean = float(np.mean(ks)) if ks else 0.0
    spread = float((max(ks) - min(ks)) / abs(mean)) if ks and mean else 0.0
    return SpaceFormFit(c, rel, False, ks, spread, Rn)
