"""Natural almost contact metric 3-structure on an orientable hypersurface of
flat H^{m+1}, and the checks that go with it."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import InvalidArgument, InvalidHypersurface, SamplingError
from .geometry import Chart, Frame, directional_derivative, frame, second_fundamental_block
from .quaternion import EVEN_PERMUTATIONS, StructureTriple
from .report import CheckReport, max_abs

TOL_ALG = 1e-8
TOL_D1 = 1e-4


def oriented_normal(c: Chart, u, fr: Frame | None = None) -> np.ndarray:
    """Unit normal of a hypersurface chart with det[J | xi] > 0."""
    fr = fr or frame(c, u)
    xi = fr.normal_basis[:, 0]
    if np.linalg.det(np.column_stack([fr.J, xi])) < 0:
        xi = -xi
    return xi


@dataclass(frozen=True)
class OrientedHypersurface:
    chart: Chart
    triple: StructureTriple
    normal_field: Optional[Callable[[np.ndarray], np.ndarray]] = None
    name: str = "hypersurface"

    def __post_init__(self):
        N, d = self.chart.ambient_dim, self.chart.domain_dim
        if d != N - 1:
            raise InvalidHypersurface(f"domain dimension {d} is not ambient dimension {N} minus one")
        if self.triple.dim != N:
            raise InvalidHypersurface("ambient triple dimension does not match the chart")
        if N % 4:
            raise InvalidHypersurface(f"ambient dimension {N} is not quaternionic")

    @property
    def m(self) -> int:
        return self.chart.ambient_dim // 4 - 1

    def normal(self, u, fr: Frame | None = None) -> np.ndarray:
        if self.normal_field is not None:
            return np.asarray(self.normal_field(np.asarray(u, dtype=float)), dtype=float)
        return oriented_normal(self.chart, u, fr)


@dataclass
class Induced3Structure:
    """Point sample of (phi_a, xi_a, eta_a, F_a). Every linear map is an
    ambient N x N matrix acting on embedded vectors and killing the normal."""

    point: np.ndarray
    normal: np.ndarray
    P: np.ndarray           # tangent projector
    S: np.ndarray           # projector onto the horizontal distribution
    xi: np.ndarray          # (3, N)
    phi: np.ndarray         # (3, N, N)
    F: np.ndarray           # (3, N, N)
    triple: StructureTriple

    def eta(self, X) -> np.ndarray:
        """(eta_1(X), eta_2(X), eta_3(X)) with eta_a(X) = g(X, xi_a)."""
        return self.xi @ np.asarray(X, dtype=float)

    @property
    def V(self) -> np.ndarray:
        """Orthogonal projector onto span{xi_a} (exact only for an
        orthonormal xi, which the construction guarantees)."""
        return self.xi.T @ self.xi


def build_3_structure(point, normal, P, triple: StructureTriple) -> Induced3Structure:
    normal = np.asarray(normal, dtype=float)
    xi = np.stack([-J @ normal for J in triple.J])
    S = P - xi.T @ xi
    phi = np.empty((3,) + P.shape)
    for a, b, g in EVEN_PERMUTATIONS:
        # phi_a X = J_a S X + eta_b(X) xi_g - eta_g(X) xi_b
        phi[a] = triple.J[a] @ S + np.outer(xi[g], xi[b]) - np.outer(xi[b], xi[g])
    F = np.stack([np.outer(normal, xi[a]) for a in range(3)])
    return Induced3Structure(np.asarray(point, dtype=float), normal, P, S, xi, phi, F, triple)


def induce_3_structure(M: OrientedHypersurface, u, *, tol: float = 1e-10) -> Induced3Structure:
    u = np.asarray(u, dtype=float)
    fr = frame(M.chart, u)
    xi = M.normal(u, fr)
    if abs(np.linalg.norm(xi) - 1) > tol or max_abs(fr.P @ xi) > 1e-7:
        raise InvalidHypersurface(f"normal at {u} is not a unit normal vector")
    P = np.eye(M.chart.ambient_dim) - np.outer(xi, xi)
    return build_3_structure(u, xi, P, M.triple)


def xi_field(M: OrientedHypersurface, alpha: int) -> Callable:
    return lambda w: -M.triple.J[alpha] @ M.normal(w)


# --- sampling ----------------------------------------------------------

@dataclass
class SamplePlan:
    """Deterministic sample points and unit tangent-ish ambient vectors.

    Points are drawn uniformly from the ball of radius ``radius`` around the
    chart center (or from the box when ``radius`` is None); vectors are
    standard normal ambient draws, projected later. Generator: numpy
    ``default_rng(seed)``.
    """

    points: np.ndarray
    vectors: np.ndarray    # (n_points, n_vectors, N)

    @classmethod
    def make(cls, chart: Chart, n_points: int, n_vectors: int, seed: int,
             radius: float | None = None) -> "SamplePlan":
        if n_points < 1 or n_vectors < 1:
            raise SamplingError("sample plan needs at least one point and one vector")
        rng = np.random.default_rng(seed)
        d, N = chart.domain_dim, chart.ambient_dim
        pts = []
        margin = 4 * chart.fd_step2
        for _ in range(100 * n_points):
            if len(pts) == n_points:
                break
            if radius is None:
                u = rng.uniform(chart.lower, chart.upper)
                u = chart.center + 0.8 * (u - chart.center)
            else:
                v = rng.standard_normal(d)
                u = chart.center + radius * rng.uniform() ** (1.0 / d) * v / np.linalg.norm(v)
            if chart.contains(u, margin):
                pts.append(u)
        if len(pts) < n_points:
            raise SamplingError(f"{chart.name}: could not place {n_points} interior sample points")
        vecs = rng.standard_normal((n_points, n_vectors, N))
        return cls(np.array(pts), vecs)

    def __len__(self) -> int:
        return len(self.points)


def _unit_rows(V: np.ndarray) -> np.ndarray:
    return V / np.linalg.norm(V, axis=-1, keepdims=True)


def tangent_samples(st: Induced3Structure, raw: np.ndarray) -> np.ndarray:
    return _unit_rows(raw @ st.P.T)


def horizontal_basis(st: Induced3Structure) -> np.ndarray:
    """Orthonormal basis (rows) of the horizontal distribution."""
    w, U = np.linalg.eigh(st.S)
    return U[:, w > 0.5].T


# --- checks --------------------------------------------------------------

def ac3_residuals(st: Induced3Structure, X: np.ndarray, Y: np.ndarray, report: CheckReport,
                  sample: int | None = None) -> None:
    """Add every almost contact metric 3-structure axiom residual for the
    tangent rows X and Y to ``report``."""
    xi, phi = st.xi, st.phi
    eta = lambda v: v @ xi.T  # rows -> (n, 3)
    eX, eY = eta(X), eta(Y)
    for a in range(3):
        pa = X @ phi[a].T
        ppa = pa @ phi[a].T
        report.add("phi^2=-I+eta(x)xi", max_abs(ppa - (-X + np.outer(eX[:, a], xi[a]))), sample)
        report.add("eta(xi)=1", abs(xi[a] @ xi[a] - 1), sample)
        for b in range(3):
            if a != b:
                report.add("eta_a(xi_b)=0", abs(xi[a] @ xi[b]), sample)
        report.add("eta=g(.,xi)", max_abs(eX[:, a] - X @ xi[a]), sample)
        metric = np.einsum("ni,ni->n", pa, Y @ phi[a].T)
        report.add("g(phiX,phiY)", max_abs(metric - (np.einsum("ni,ni->n", X, Y) - eX[:, a] * eY[:, a])), sample)
        report.add("phi_tangent", max_abs(pa @ st.normal), sample)
    for a, b, g in EVEN_PERMUTATIONS:
        report.add("phi_a(xi_b)=xi_g", max_abs(phi[a] @ xi[b] - xi[g]), sample)
        report.add("phi_b(xi_a)=-xi_g", max_abs(phi[b] @ xi[a] + xi[g]), sample)
        report.add("eta_a.phi_b=eta_g", max_abs(eta(X @ phi[b].T)[:, a] - eX[:, g]), sample)
        report.add("eta_b.phi_a=-eta_g", max_abs(eta(X @ phi[a].T)[:, b] + eX[:, g]), sample)
        lhs1 = X @ (phi[a] @ phi[b]).T - np.outer(eX[:, b], xi[a])
        lhs2 = -X @ (phi[b] @ phi[a]).T + np.outer(eX[:, a], xi[b])
        target = X @ phi[g].T
        report.add("phi_a.phi_b-eta_b(x)xi_a=phi_g", max_abs(lhs1 - target), sample)
        report.add("-phi_b.phi_a+eta_a(x)xi_b=phi_g", max_abs(lhs2 - target), sample)


def check_ac3_axioms(M: OrientedHypersurface, samples: SamplePlan, *, tol: float = TOL_ALG,
                     min_points: int = 1) -> CheckReport:
    if len(samples) < min_points:
        raise InvalidArgument("not enough sample points")
    report = CheckReport("ac3_axioms", "almost contact metric 3-structure axioms", tol)
    for i, (u, raw) in enumerate(zip(samples.points, samples.vectors)):
        st = induce_3_structure(M, u)
        X = tangent_samples(st, raw)
        Y = np.roll(X, 1, axis=0)
        ac3_residuals(st, X, Y, report, i)
    return report


def check_decomposition(M: OrientedHypersurface, samples: SamplePlan, *, tol: float = TOL_ALG) -> CheckReport:
    """J_a X = phi_a X + F_a X, phi_a X tangent, F_a X normal, and
    phi_a = J_a on the horizontal distribution."""
    report = CheckReport("tangent_normal_decomposition", "J_a X = phi_a X + F_a X, with F_a X normal", tol)
    for i, (u, raw) in enumerate(zip(samples.points, samples.vectors)):
        st = induce_3_structure(M, u)
        X = tangent_samples(st, raw)
        Xh = _unit_rows(raw @ st.S.T)
        for a in range(3):
            JX = X @ st.triple.J[a].T
            report.add("J=phi+F", max_abs(JX - X @ st.phi[a].T - X @ st.F[a].T), i)
            report.add("F_normal", max_abs((X @ st.F[a].T) @ st.P.T), i)
            report.add("phi_on_H=J", max_abs(Xh @ st.phi[a].T - Xh @ st.triple.J[a].T), i)
        report.add("xi_tangent", max_abs(st.xi @ st.normal), i)
        report.add("xi_orthonormal", max_abs(st.xi @ st.xi.T - np.eye(3)), i)
    return report


def _structure_field(M: OrientedHypersurface):
    return lambda w: induce_3_structure(M, w)


def cosymplectic_residuals(M: OrientedHypersurface, u, X: np.ndarray, Y: np.ndarray) -> dict:
    """Max over rows X, Y of |(nabla_X phi_a)Y|, |(nabla_X eta_a)(Y)|,
    |nabla_X xi_a| and the metricity mismatch
    |(nabla_X eta_a)(Y) - g(Y, nabla_X xi_a)|."""
    c = M.chart
    fr = frame(c, u)
    st = induce_3_structure(M, u)
    h = c.fd_step2
    out = {"nabla_phi": 0.0, "nabla_eta": 0.0, "nabla_xi": 0.0, "metricity": 0.0}
    for x in X:
        a_dir = fr.coords(x)
        plus = induce_3_structure(M, u + h * a_dir / np.linalg.norm(a_dir))
        minus = induce_3_structure(M, u - h * a_dir / np.linalg.norm(a_dir))
        scale = np.linalg.norm(a_dir) / (2 * h)
        dphi = (plus.phi - minus.phi) * scale
        dxi = (plus.xi - minus.xi) * scale
        dP = (plus.P - minus.P) * scale
        for y in Y:
            # extension Y~(w) = P(w) y, so D_X Y~ = dP y and nabla_X Y~ = P dP y
            nabla_y = st.P @ dP @ y
            for a in range(3):
                # nabla_X (phi_a Y~) - phi_a nabla_X Y~
                d_phiY = dphi[a] @ (st.P @ y) + st.phi[a] @ (dP @ y)
                out["nabla_phi"] = max(out["nabla_phi"], float(np.linalg.norm(st.P @ d_phiY - st.phi[a] @ nabla_y)))
                # X(eta_a(Y~)) - eta_a(nabla_X Y~)
                d_eta = dxi[a] @ (st.P @ y) + st.xi[a] @ (dP @ y)
                nabla_eta = d_eta - st.xi[a] @ nabla_y
                out["nabla_eta"] = max(out["nabla_eta"], abs(float(nabla_eta)))
                nabla_xi = st.P @ dxi[a]
                out["metricity"] = max(out["metricity"], abs(float(nabla_eta - y @ nabla_xi)))
        for a in range(3):
            out["nabla_xi"] = max(out["nabla_xi"], float(np.linalg.norm(st.P @ dxi[a])))
    return out


def check_cosymplectic(M: OrientedHypersurface, samples: SamplePlan, *, tol: float = TOL_D1,
                       n_vectors: int | None = None) -> CheckReport:
    """nabla phi_a = 0 and nabla eta_a = 0 with the induced Levi-Civita
    connection; parallelism of xi_a is reported alongside."""
    report = CheckReport("cosymplectic", "3-cosymplectic: nabla phi_a = 0 and nabla eta_a = 0", tol)
    metricity = 0.0
    for i, (u, raw) in enumerate(zip(samples.points, samples.vectors)):
        M.chart.require_interior(u)
        st = induce_3_structure(M, u)
        V = tangent_samples(st, raw if n_vectors is None else raw[:n_vectors])
        r = cosymplectic_residuals(M, u, V, np.roll(V, 1, axis=0))
        report.add("nabla_phi", r["nabla_phi"], i)
        report.add("nabla_eta", r["nabla_eta"], i)
        report.add("nabla_xi", r["nabla_xi"], i)
        metricity = max(metricity, r["metricity"])
    report.info["metricity_residual"] = metricity
    return report


def check_mixed_geodesic(M: OrientedHypersurface, samples: SamplePlan, *, tol: float = TOL_D1) -> CheckReport:
    """max |B(xi_a, X)| over an orthonormal horizontal basis, next to the
    non-vertical part of the brackets [xi_a, xi_b]."""
    report = CheckReport("mixed_geodesic", "mixed geodesic: B(U, X) = 0 for U vertical, X horizontal", tol)
    bracket = 0.0
    c = M.chart
    fields = [xi_field(M, a) for a in range(3)]
    for i, u in enumerate(samples.points):
        c.require_interior(u)
        fr = frame(c, u)
        st = induce_3_structure(M, u)
        H = horizontal_basis(st)
        B = second_fundamental_block(c, u, st.xi, H, fr)
        report.add("B(U,X)", float(np.max(np.linalg.norm(B, axis=-1))), i)
        Q = np.eye(c.ambient_dim) - st.V
        h = c.fd_step2
        dxi = [[directional_derivative(fields[b], u, fr.coords(st.xi[a]), h) for b in range(3)] for a in range(3)]
        for a in range(3):
            for b in range(a + 1, 3):
                br = dxi[a][b] - dxi[b][a]
                bracket = max(bracket, float(np.linalg.norm(Q @ br)))
    report.info["bracket_residual"] = bracket
    return report


def check_vertical_integrability(M: OrientedHypersurface, samples: SamplePlan, *, tol: float = TOL_D1) -> CheckReport:
    rep = check_mixed_geodesic(M, samples, tol=tol)
    report = CheckReport("vertical_integrability", "V = span{xi_a} integrable: [xi_a, xi_b] in V", tol)
    report.add("[xi_a,xi_b] not in V", rep.info["bracket_residual"])
    report.info["mixed_geodesic_residual"] = rep.max_residual
    return report
