"""Finite-difference geometry of chart-parametrized submanifolds of flat R^N.

Tangent vectors are handled as embedded ambient vectors throughout; chart
coordinates only appear when a field has to be differentiated along a
direction.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import DegenerateChart, InvalidArgument, SamplingError
from .report import max_abs

FD_STEP1 = 1e-5
FD_STEP2 = 1e-3
RANK_FLOOR = 1e-8
TANGENCY_REL = 1e-7


@dataclass(frozen=True)
class Chart:
    """Parametrization of an open box (optionally intersected with a ball)
    in R^d into R^N."""

    embedding: Callable[[np.ndarray], np.ndarray]
    lower: np.ndarray
    upper: np.ndarray
    ambient_dim: int
    fd_step1: float = FD_STEP1
    fd_step2: float = FD_STEP2
    radius: Optional[float] = None
    center: Optional[np.ndarray] = None
    inverse: Optional[Callable[[np.ndarray], np.ndarray]] = None
    name: str = "chart"

    def __post_init__(self):
        object.__setattr__(self, "lower", np.asarray(self.lower, dtype=float))
        object.__setattr__(self, "upper", np.asarray(self.upper, dtype=float))
        if self.center is None:
            object.__setattr__(self, "center", (self.lower + self.upper) / 2)
        else:
            object.__setattr__(self, "center", np.asarray(self.center, dtype=float))
        if self.lower.shape != self.upper.shape or np.any(self.lower >= self.upper):
            raise InvalidArgument("chart box corners are inconsistent")

    @property
    def domain_dim(self) -> int:
        return self.lower.shape[0]

    def __call__(self, u) -> np.ndarray:
        return np.asarray(self.embedding(np.asarray(u, dtype=float)), dtype=float)

    def contains(self, u, margin: float = 0.0) -> bool:
        u = np.asarray(u, dtype=float)
        if np.any(u <= self.lower + margin) or np.any(u >= self.upper - margin):
            return False
        if self.radius is not None and np.linalg.norm(u - self.center) >= self.radius - margin:
            return False
        return True

    def require_interior(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        if not self.contains(u, 2 * self.fd_step2):
            raise SamplingError(f"{self.name}: point {u} is not interior by 2*fd_step2")
        return u

    def jacobian(self, u) -> np.ndarray:
        """N x d Jacobian by central differences with ``fd_step1``."""
        u = np.asarray(u, dtype=float)
        h = self.fd_step1
        cols = []
        for i in range(self.domain_dim):
            e = np.zeros_like(u)
            e[i] = h
            cols.append((self(u + e) - self(u - e)) / (2 * h))
        return np.column_stack(cols)

    def with_steps(self, fd_step1: float, fd_step2: float) -> "Chart":
        from dataclasses import replace
        return replace(self, fd_step1=fd_step1, fd_step2=fd_step2)


def identity_chart(dim: int, half_width: float = 1.0, **kw) -> Chart:
    return Chart(lambda u: u, -half_width * np.ones(dim), half_width * np.ones(dim), dim,
                 inverse=lambda x: np.asarray(x, dtype=float), name=kw.pop("name", f"R^{dim}"), **kw)


def directional_derivative(f: Callable, u, a, h: float):
    """Central difference of ``f`` at ``u`` along the chart direction ``a``.

    The stencil is taken along the unit direction so that its extent never
    exceeds ``h`` regardless of |a|.
    """
    u = np.asarray(u, dtype=float)
    a = np.asarray(a, dtype=float)
    n = np.linalg.norm(a)
    if n == 0.0:
        return 0.0 * np.asarray(f(u))
    d = a / n
    return n * (np.asarray(f(u + h * d)) - np.asarray(f(u - h * d))) / (2 * h)


@dataclass
class Frame:
    """Pointwise first-order data of a chart: Jacobian, its SVD and the
    tangent projector."""

    u: np.ndarray
    J: np.ndarray
    basis: np.ndarray          # N x d orthonormal tangent basis
    normal_basis: np.ndarray   # N x (N - d) orthonormal normal basis
    P: np.ndarray
    pinv: np.ndarray

    def coords(self, X) -> np.ndarray:
        """Chart components of an embedded tangent vector."""
        return self.pinv @ np.asarray(X, dtype=float)


def frame(c: Chart, u) -> Frame:
    u = np.asarray(u, dtype=float)
    J = c.jacobian(u)
    U, s, Vt = np.linalg.svd(J, full_matrices=True)
    d = c.domain_dim
    if s[-1] < RANK_FLOOR * max(1.0, s[0]):
        raise DegenerateChart(f"{c.name}: Jacobian rank deficient at {u} (sigma_min={s[-1]:.2e})")
    basis = U[:, :d]
    pinv = Vt.T @ np.diag(1.0 / s) @ U[:, :d].T
    return Frame(u, J, basis, U[:, d:], basis @ basis.T, pinv)


def induced_metric(c: Chart, u) -> np.ndarray:
    J = frame(c, u).J
    return J.T @ J


def tangent_projector(c: Chart, u) -> np.ndarray:
    return frame(c, u).P


def as_tangent(P: np.ndarray, X, what: str = "vector") -> np.ndarray:
    """Re-project a nearly tangent vector; reject clearly non-tangent ones."""
    X = np.asarray(X, dtype=float)
    nX = np.linalg.norm(X)
    off = np.linalg.norm(X - P @ X)
    if off > 10 * TANGENCY_REL * max(nX, 1e-300) and off > 1e-12:
        raise InvalidArgument(f"{what} is not tangent (normal component {off:.2e})")
    return P @ X


def _value_at(field_or_vec, u):
    return np.asarray(field_or_vec(u) if callable(field_or_vec) else field_or_vec, dtype=float)


def ambient_derivative(c: Chart, u, X, Y_field: Callable, fr: Frame | None = None) -> np.ndarray:
    """Flat derivative D_X Y of an R^N-valued field given on the chart."""
    fr = fr or frame(c, u)
    return directional_derivative(Y_field, u, fr.coords(X), c.fd_step2)


def levi_civita(c: Chart, u, X_field, Y_field: Callable) -> np.ndarray:
    """nabla_X Y = P D_X Y, the tangential part of the flat derivative."""
    u = c.require_interior(u)
    fr = frame(c, u)
    X = as_tangent(fr.P, _value_at(X_field, u), "X")
    as_tangent(fr.P, Y_field(u), "Y")
    return fr.P @ ambient_derivative(c, u, X, Y_field, fr)


def lie_bracket(c: Chart, u, X_field: Callable, Y_field: Callable) -> np.ndarray:
    """[X, Y] = D_X Y - D_Y X in ambient coordinates."""
    fr = frame(c, u)
    X, Y = X_field(u), Y_field(u)
    return ambient_derivative(c, u, X, Y_field, fr) - ambient_derivative(c, u, Y, X_field, fr)


def projector_derivative(c: Chart, u, X, fr: Frame | None = None) -> np.ndarray:
    fr = fr or frame(c, u)
    return directional_derivative(lambda w: frame(c, w).P, u, fr.coords(X), c.fd_step2)


def second_fundamental_form(c: Chart, u, X, Y) -> np.ndarray:
    """B(X, Y) = (Id - P) D_X (P Y), using the projected constant extension
    of Y."""
    u = c.require_interior(u)
    fr = frame(c, u)
    X = as_tangent(fr.P, X, "X")
    Y = as_tangent(fr.P, Y, "Y")
    dP = projector_derivative(c, u, X, fr)
    return (np.eye(c.ambient_dim) - fr.P) @ dP @ Y


def second_fundamental_block(c: Chart, u, Xs: np.ndarray, Ys: np.ndarray,
                             fr: Frame | None = None) -> np.ndarray:
    """B(X_i, Y_j) for rows of Xs and Ys; shape (len(Xs), len(Ys), N)."""
    fr = fr or frame(c, u)
    Q = np.eye(c.ambient_dim) - fr.P
    out = np.empty((len(Xs), len(Ys), c.ambient_dim))
    for i, X in enumerate(Xs):
        dP = projector_derivative(c, u, X, fr)
        out[i] = (Q @ dP @ np.asarray(Ys).T).T
    return out


# --- umbilicity ----------------------------------------------------------

@dataclass
class ShapeData:
    point: np.ndarray
    B_samples: np.ndarray          # B(e_i, e_j) on an orthonormal tangent basis
    mean_curvature: np.ndarray
    umbilical_residual: float
    normal_parallel_residual: float
    symmetry_residual: float = 0.0


@dataclass
class UmbilicalClassification:
    shapes: list[ShapeData]
    totally_geodesic: bool
    totally_umbilical: bool
    extrinsic_sphere: bool
    max_B: float
    umbilical_residual: float
    normal_parallel_residual: float
    min_mean_curvature: float
    max_mean_curvature: float
    tolerance: float = 1e-4
    extra: dict = field(default_factory=dict)


def mean_curvature(c: Chart, u) -> np.ndarray:
    fr = frame(c, u)
    E = fr.basis.T
    d = c.domain_dim
    H = np.zeros(c.ambient_dim)
    Q = np.eye(c.ambient_dim) - fr.P
    for e in E:
        H += Q @ projector_derivative(c, u, e, fr) @ e
    return H / d


def shape_data(c: Chart, u) -> ShapeData:
    u = c.require_interior(u)
    fr = frame(c, u)
    E = fr.basis.T
    B = second_fundamental_block(c, u, E, E, fr)
    d = c.domain_dim
    H = np.einsum("iin->n", B) / d
    umb = max_abs(B - np.eye(d)[:, :, None] * H[None, None, :])
    sym = max_abs(B - B.transpose(1, 0, 2))
    Q = np.eye(c.ambient_dim) - fr.P
    npar = 0.0
    for e in E:
        dH = directional_derivative(lambda w: mean_curvature(c, w), u, fr.coords(e), c.fd_step2)
        npar = max(npar, float(np.linalg.norm(Q @ dH)))
    return ShapeData(u, B, H, umb, npar, sym)


def classify_umbilical(c: Chart, samples: Sequence, *, tol: float = 1e-4,
                       min_points: int = 8) -> UmbilicalClassification:
    """Totally geodesic / totally umbilical / extrinsic sphere verdicts from
    sampled shape data. The extrinsic-sphere verdict requires |H| above
    10 * tol everywhere."""
    samples = [np.asarray(u, dtype=float) for u in samples]
    if len(samples) < min_points:
        raise InvalidArgument(f"need at least {min_points} sample points, got {len(samples)}")
    shapes = [shape_data(c, u) for u in samples]
    max_B = max(max_abs(s.B_samples) for s in shapes)
    umb = max(s.umbilical_residual for s in shapes)
    npar = max(s.normal_parallel_residual for s in shapes)
    Hn = [float(np.linalg.norm(s.mean_curvature)) for s in shapes]
    geodesic = max_B < tol
    umbilical = umb < tol
    sphere = umbilical and min(Hn) > 10 * tol and npar < tol
    return UmbilicalClassification(shapes, geodesic, umbilical, sphere, max_B, umb, npar,
                                   min(Hn), max(Hn), tol)
