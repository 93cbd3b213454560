"""Riemannian submersions between chart-parametrized manifolds: differential,
vertical/horizontal splitting, lifts, O'Neill tensors, structure pushdown and
the QR 3-submersion / quaternionic submersion checks."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .curvature import christoffel
from .errors import InvalidArgument, NumericalFailure, StructureError
from .geometry import Chart, Frame, directional_derivative, frame, lie_bracket
from .hypersurface import (
    Induced3Structure,
    OrientedHypersurface,
    SamplePlan,
    check_mixed_geodesic,
    induce_3_structure,
    tangent_samples,
)
from .quaternion import (
    StructureTriple,
    check_structure_axioms,
    fit_connection_forms,
    flat_connection,
    qk_connection_forms,
    qk_rhs,
)
from .report import CheckReport, max_abs

TOL_D1 = 1e-4


@dataclass(frozen=True)
class SubmersionDescriptor:
    """pi: M -> M' given by charts of both sides plus parameter-level maps.

    ``projection`` sends a total chart parameter to a base chart parameter;
    ``section`` goes back with projection(section(q)) = q. ``fiber_shift(u, t)``
    moves u along its fiber by the fiber parameter t. In ``pushed`` mode the
    base metric is g'(X', Y') = g(lift X', lift Y') at the section point.
    """

    total: Chart
    base: Chart
    projection: Callable[[np.ndarray], np.ndarray]
    section: Callable[[np.ndarray], np.ndarray]
    fiber_dim: int
    hypersurface: Optional[OrientedHypersurface] = None
    base_metric_mode: str = "pushed"
    explicit_metric: Optional[Callable[[np.ndarray], np.ndarray]] = None
    fiber_shift: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = None
    total_triple: Optional[StructureTriple] = None
    base_triple: Optional[Callable[[np.ndarray], StructureTriple]] = None
    name: str = "submersion"

    def __post_init__(self):
        if self.base_metric_mode not in ("pushed", "explicit"):
            raise InvalidArgument(f"unknown base metric mode {self.base_metric_mode!r}")
        if self.base_metric_mode == "explicit" and self.explicit_metric is None:
            raise InvalidArgument("explicit mode needs an explicit base metric")

    def pi(self, u) -> np.ndarray:
        return np.asarray(self.projection(np.asarray(u, dtype=float)), dtype=float)


def projection_jacobian(s: SubmersionDescriptor, u) -> np.ndarray:
    """k x d matrix of the projection in chart coordinates."""
    u = np.asarray(u, dtype=float)
    h = s.total.fd_step1
    cols = []
    for i in range(u.shape[0]):
        e = np.zeros_like(u)
        e[i] = h
        cols.append((s.pi(u + e) - s.pi(u - e)) / (2 * h))
    return np.column_stack(cols)


@dataclass
class Split:
    """Pointwise splitting T_pM = V + H and the differential as a k x N map
    on embedded tangent vectors."""

    u: np.ndarray
    frame: Frame
    K: np.ndarray     # k x N, pi_* on embedded tangent vectors
    Ev: np.ndarray    # N x (d - k) orthonormal vertical basis
    Eh: np.ndarray    # N x k orthonormal horizontal basis
    v: np.ndarray
    h: np.ndarray

    @property
    def lift_matrix(self) -> np.ndarray:
        """N x k matrix sending a base vector to its horizontal lift."""
        return self.Eh @ np.linalg.inv(self.K @ self.Eh)


def split(s: SubmersionDescriptor, u) -> Split:
    u = np.asarray(u, dtype=float)
    fr = frame(s.total, u)
    K = projection_jacobian(s, u) @ fr.pinv
    KT = K @ fr.basis
    _, sv, Wt = np.linalg.svd(KT, full_matrices=True)
    k = KT.shape[0]
    kernel_dim = KT.shape[1] - int(np.sum(sv > 1e-8 * max(sv[0], 1.0)))
    if kernel_dim != s.fiber_dim:
        raise StructureError(f"kernel of pi_* has dimension {kernel_dim}, expected {s.fiber_dim}")
    W = Wt.T
    Eh = fr.basis @ W[:, :k]
    Ev = fr.basis @ W[:, k:]
    return Split(u, fr, K, Ev, Eh, Ev @ Ev.T, Eh @ Eh.T)


def differential(s: SubmersionDescriptor, u, X) -> np.ndarray:
    fr = frame(s.total, u)
    return projection_jacobian(s, u) @ fr.coords(X)


def vertical_horizontal_split(s: SubmersionDescriptor, u) -> tuple[np.ndarray, np.ndarray]:
    sp = split(s, u)
    return sp.v, sp.h


def horizontal_lift(s: SubmersionDescriptor, q, X_prime, u, *, tol: float = 1e-6) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    if max_abs(s.pi(u) - q) > tol:
        raise InvalidArgument("lift point does not lie over the base point")
    sp = split(s, u)
    M = sp.K @ sp.Eh
    if np.linalg.cond(M) > 1e10:
        raise NumericalFailure("restricted differential is singular")
    return sp.Eh @ np.linalg.solve(M, np.asarray(X_prime, dtype=float))


def base_metric(s: SubmersionDescriptor, q) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    if s.base_metric_mode == "explicit":
        return np.asarray(s.explicit_metric(q), dtype=float)
    L = split(s, s.section(q)).lift_matrix
    return L.T @ L


def base_metric_field(s: SubmersionDescriptor) -> Callable:
    return lambda q: base_metric(s, q)


# --- O'Neill tensors -------------------------------------------------------

def _split_derivative(s: SubmersionDescriptor, sp: Split, E) -> tuple[np.ndarray, np.ndarray]:
    """(D_E v, D_E h) along the embedded tangent vector E."""
    a = sp.frame.coords(E)
    h = s.total.fd_step2
    n = np.linalg.norm(a)
    if n == 0.0:
        Z = np.zeros_like(sp.v)
        return Z, Z
    d = a / n
    plus, minus = split(s, sp.u + h * d), split(s, sp.u - h * d)
    scale = n / (2 * h)
    return (plus.v - minus.v) * scale, (plus.h - minus.h) * scale


def oneill_T(s: SubmersionDescriptor, u, E, F, sp: Split | None = None) -> np.ndarray:
    """T_E F = h nabla_{vE} vF + v nabla_{vE} hF with vF, hF extended by
    projecting the constant ambient field F pointwise."""
    sp = sp or split(s, u)
    vE = sp.v @ E
    dv, dh = _split_derivative(s, sp, vE)
    return sp.h @ dv @ F + sp.v @ dh @ F


def oneill_A(s: SubmersionDescriptor, u, E, F, sp: Split | None = None) -> np.ndarray:
    """A_E F = v nabla_{hE} hF + h nabla_{hE} vF."""
    sp = sp or split(s, u)
    hE = sp.h @ E
    dv, dh = _split_derivative(s, sp, hE)
    return sp.v @ dh @ F + sp.h @ dv @ F


def horizontal_bracket(s: SubmersionDescriptor, u, X, Y) -> np.ndarray:
    """[hX, hY] at u for the extensions w -> h(w) X, w -> h(w) Y."""
    Xf = lambda w: split(s, w).h @ X
    Yf = lambda w: split(s, w).h @ Y
    return lie_bracket(s.total, u, Xf, Yf)


def check_oneill(s: SubmersionDescriptor, samples: SamplePlan, *, tol: float = TOL_D1,
                 n_pairs: int = 4) -> dict[str, CheckReport]:
    """Sampled O'Neill tensors.

    Returns reports ``oneill_T_vanishes`` (max |T_U V|, U, V vertical and
    |T_U X|), ``oneill_A_vanishes`` (max |A_X Y| over horizontal pairs),
    ``A_bracket_identity`` (|A_X Y - v[X, Y]/2|) and ``T_phi_identity``
    (|T_U V + T_{phi U} phi V| on hypersurface-backed submersions).
    """
    T_rep = CheckReport("oneill_T_vanishes", "O'Neill T_E F = h nabla_vE vF + v nabla_vE hF vanishes (totally geodesic fibres)", tol)
    A_rep = CheckReport("oneill_A_vanishes", "O'Neill A_E F = v nabla_hE hF + h nabla_hE vF vanishes (integrable horizontal distribution)", tol)
    br_rep = CheckReport("A_bracket_identity", "A_X Y = 1/2 v[X, Y] for horizontal X, Y", tol)
    phi_rep = CheckReport("T_phi_identity", "T_U V = -T_{phi_a U} phi_a V for vertical U, V", tol)
    for i, (u, raw) in enumerate(zip(samples.points, samples.vectors)):
        s.total.require_interior(u)
        sp = split(s, u)
        n = min(n_pairs, len(raw))
        Us = [sp.v @ r for r in raw[:n]]
        Xs = [sp.h @ r for r in raw[:n]]
        Us = [x / np.linalg.norm(x) for x in Us]
        Xs = [x / np.linalg.norm(x) for x in Xs]
        # vertical directions: derivative of the split computed once per U
        for j, U in enumerate(Us):
            dv, dh = _split_derivative(s, sp, U)
            for V in Us:
                T_rep.add("|T_U V|", np.linalg.norm(sp.h @ dv @ V), i)
            for X in Xs:
                T_rep.add("|T_U X|", np.linalg.norm(sp.v @ dh @ X), i)
        dA = {}
        for j, X in enumerate(Xs):
            dv, dh = _split_derivative(s, sp, X)
            dA[j] = dh
            for V in Us:
                A_rep.add("|A_X U|", np.linalg.norm(sp.h @ dv @ V), i)
        for j, X in enumerate(Xs):
            for l, Y in enumerate(Xs):
                if l == j:
                    continue
                A_XY = sp.v @ dA[j] @ Y
                A_rep.add("|A_X Y|", np.linalg.norm(A_XY), i)
                if l > j:
                    br = horizontal_bracket(s, u, X, Y)
                    br_rep.add("A-v[X,Y]/2", np.linalg.norm(A_XY - 0.5 * sp.v @ br), i)
        if s.hypersurface is not None:
            st = induce_3_structure(s.hypersurface, u)
            U, V = Us[0], Us[-1] if len(Us) > 1 else Us[0]
            T_UV = oneill_T(s, u, U, V, sp)
            for a in range(3):
                T_rot = oneill_T(s, u, st.phi[a] @ U, st.phi[a] @ V, sp)
                phi_rep.add("T_UV+T_phiU_phiV", np.linalg.norm(T_UV + T_rot), i)
    return {r.check_name: r for r in (T_rep, A_rep, br_rep, phi_rep)}


# --- structure pushdown ----------------------------------------------------

@dataclass
class PushedTriple:
    base_point: np.ndarray
    J_prime: StructureTriple
    source_point: np.ndarray
    prop43_residual: float = 0.0


def prop43_residuals(sp: Split, st: Induced3Structure) -> tuple[float, float]:
    """(max |v phi_a X|, max |h phi_a U|) over horizontal X and vertical U
    basis vectors."""
    vh = max(max_abs(sp.v @ st.phi[a] @ sp.Eh) for a in range(3))
    hv = max(max_abs(sp.h @ st.phi[a] @ sp.Ev) for a in range(3))
    return vh, hv


def push_structure(s: SubmersionDescriptor, u, st: Induced3Structure | None = None, *,
                   tol: float = 1e-6, sp: Split | None = None) -> PushedTriple:
    """J'_a(X') = pi_*(phi_a(lift X')) at the total point u.

    Without a hypersurface the ambient ``total_triple`` plays the role of
    phi_a (quaternionic submersions).
    """
    u = np.asarray(u, dtype=float)
    sp = sp or split(s, u)
    if s.hypersurface is not None:
        st = st or induce_3_structure(s.hypersurface, u)
        mats = st.phi
        vh, hv = prop43_residuals(sp, st)
        res = max(vh, hv)
        if res > tol:
            raise StructureError(f"phi_a does not preserve V and H (residual {res:.2e})")
    elif s.total_triple is not None:
        mats = s.total_triple.J
        res = 0.0
    else:
        raise InvalidArgument("submersion carries no structure to push")
    L = sp.lift_matrix
    Jp = np.stack([sp.K @ mats[a] @ L for a in range(3)])
    return PushedTriple(s.pi(u), StructureTriple(Jp, "pushed"), u, res)


def fit_rotation(J_ref: np.ndarray, J_new: np.ndarray) -> tuple[np.ndarray, float]:
    """Least squares C with J_new[a] = sum_b C[a, b] J_ref[b]."""
    A = np.column_stack([J.ravel() for J in J_ref])
    C = np.empty((3, 3))
    for a in range(3):
        C[a], *_ = np.linalg.lstsq(A, J_new[a].ravel(), rcond=None)
    residual = max_abs(np.stack([J_new[a] - np.tensordot(C[a], J_ref, 1) for a in range(3)]))
    return C, residual


@dataclass
class FiberCompatibility:
    C: np.ndarray
    residual: float
    orthogonality: float
    det: float

    def ok(self, tol: float) -> bool:
        return self.residual < tol and self.orthogonality < tol and abs(self.det - 1) < tol


def fiber_compatibility(s: SubmersionDescriptor, u1, u2, *, base_point=None, tol: float = 1e-6) -> FiberCompatibility:
    """Rotation relating the pushed triples of two points of one fibre."""
    q1, q2 = s.pi(u1), s.pi(u2)
    if max_abs(q1 - q2) > tol or (base_point is not None and max_abs(q1 - np.asarray(base_point)) > tol):
        raise InvalidArgument("fiber points do not project to the same base point")
    J1 = push_structure(s, u1).J_prime.J
    J2 = push_structure(s, u2).J_prime.J
    C, res = fit_rotation(J1, J2)
    return FiberCompatibility(C, res, max_abs(C.T @ C - np.eye(3)), float(np.linalg.det(C)))


# --- aggregate checks ---------------------------------------------------------

def check_qr3_submersion(s: SubmersionDescriptor, samples: SamplePlan, *, tol: float = TOL_D1,
                         mixed: CheckReport | None = None) -> CheckReport:
    """At each sample: Ker pi_* = V, pi_* phi_a = J'_a pi_* for a
    local basis of the span of the reference pushed triple, Riemannian
    submersion isometry, phi_a preserving V and H, and the mixed-geodesic hypothesis."""
    M = s.hypersurface
    if M is None:
        raise InvalidArgument("QR 3-submersions need a hypersurface total space")
    report = CheckReport("qr3_submersion", "Riemannian submersion with Ker pi_* = V and pi_* phi_a = J'_a pi_*", tol)
    for i, u in enumerate(samples.points):
        s.total.require_interior(u)
        sp = split(s, u)
        st = induce_3_structure(M, u)
        report.add("Ker pi_* = V", max_abs(sp.v - st.V), i)
        q = s.pi(u)
        ref = push_structure(s, s.section(q)).J_prime.J
        KT = sp.K @ sp.frame.basis
        lhs = np.stack([sp.K @ st.phi[a] @ sp.frame.basis for a in range(3)])
        design = np.stack([ref[b] @ KT for b in range(3)])
        C, res = fit_rotation(design, lhs)
        report.add("pi_* phi_a = J'_a pi_*", res, i)
        report.add("C in SO(3)", max(max_abs(C.T @ C - np.eye(3)), abs(np.linalg.det(C) - 1)), i)
        gp = base_metric(s, q)
        KH = sp.K @ sp.Eh
        report.add("isometry", max_abs(KH.T @ gp @ KH - np.eye(KH.shape[1])), i)
        vh, hv = prop43_residuals(sp, st)
        report.add("|v phi_a H|", vh, i)
        report.add("|h phi_a V|", hv, i)
    mixed = mixed or check_mixed_geodesic(M, samples, tol=tol)
    report.add("mixed geodesic", mixed.max_residual)
    return report


def check_pushed_axioms(s: SubmersionDescriptor, base_points, *, tol: float = TOL_D1) -> CheckReport:
    report = CheckReport("pushed_structure_axioms", "pushed J'_a form an almost quaternionic hermitian structure for g'", tol)
    for i, q in enumerate(base_points):
        pt = push_structure(s, s.section(q))
        r = check_structure_axioms(pt.J_prime, base_metric(s, q), tol=tol)
        for name, val in r.components.items():
            report.add(name, val, i)
    return report


def check_fiber_compatibility(s: SubmersionDescriptor, base_points, rng: np.random.Generator, *,
                              tol: float = TOL_D1, shift_scale: float = 0.5) -> CheckReport:
    report = CheckReport("fiber_compatibility", "pushed triples on one fibre differ by an SO(3) change of basis", tol)
    if s.fiber_shift is None:
        raise InvalidArgument("submersion has no fiber action")
    for i, q in enumerate(base_points):
        u1 = s.section(q)
        u2 = s.fiber_shift(u1, shift_scale * rng.standard_normal(s.fiber_dim))
        fc = fiber_compatibility(s, u1, u2, tol=1e-6)
        report.add("fit residual", fc.residual, i)
        report.add("|C^T C - I|", fc.orthogonality, i)
        report.add("|det C - 1|", abs(fc.det - 1), i)
    return report


def check_basic_fields(s: SubmersionDescriptor, base_points, rng: np.random.Generator, *,
                       tol: float = TOL_D1, shift_scale: float = 0.5) -> CheckReport:
    """pi_*(h nabla_X Y) for basic X, Y is the same at two points of a fibre."""
    report = CheckReport("basic_fields", "h(nabla_X Y) is basic for basic X, Y", tol)
    k = s.base.domain_dim

    def pushed_h_nabla(u, Xp, Yp):
        sp = split(s, u)
        X = sp.lift_matrix @ Xp
        Yf = lambda w: split(s, w).lift_matrix @ Yp
        D = directional_derivative(Yf, u, sp.frame.coords(X), s.total.fd_step2)
        return sp.K @ (sp.h @ D)

    for i, q in enumerate(base_points):
        Xp, Yp = rng.standard_normal(k), rng.standard_normal(k)
        u1 = s.section(q)
        u2 = s.fiber_shift(u1, shift_scale * rng.standard_normal(s.fiber_dim))
        report.add("fiber dependence", max_abs(pushed_h_nabla(u1, Xp, Yp) - pushed_h_nabla(u2, Xp, Yp)), i)
    return report


def metric_connection(metric_field: Callable, h: float = 1e-3) -> Callable:
    """nabla_X J = D_X J + [Gamma_X, J] for the Levi-Civita connection of a
    chart metric, with (Gamma_X)^i_j = Gamma^i_{kj} X^k."""

    def nabla(J_field, q, X):
        q = np.asarray(q, dtype=float)
        X = np.asarray(X, dtype=float)
        dJ = directional_derivative(lambda w: J_field(w).J, q, X, h)
        G = christoffel(metric_field, q, h)
        GX = np.einsum("ikj,k->ij", G, X)
        J = J_field(q).J
        return dJ + np.stack([GX @ J[a] - J[a] @ GX for a in range(3)])

    return nabla


def pushed_triple_field(s: SubmersionDescriptor) -> Callable:
    return lambda q: push_structure(s, s.section(q)).J_prime


def check_base_connection_forms(s: SubmersionDescriptor, base_points, rng: np.random.Generator, *,
                                tol: float = TOL_D1) -> tuple[CheckReport, CheckReport]:
    """Fit omega'_a on the base for the pushed triple field.

    Returns (quaternionic Kaehler report: post-fit residual of the nabla J'
    equations; hyper-Kaehler report: max |omega'| together with that
    residual).
    """
    gfield = base_metric_field(s)
    conn = metric_connection(gfield, s.base.fd_step2)
    k = s.base.domain_dim
    samples = [(q, rng.standard_normal(k)) for q in base_points]
    samples = [(q, X / np.linalg.norm(X)) for q, X in samples]
    fit = qk_connection_forms(pushed_triple_field(s), conn, samples, tol=tol)
    qk = CheckReport("base_quaternionic_kaehler", "base is quaternionic Kaehler: nabla' J'_a = sum of omega'_b J'_c terms", tol)
    hk = CheckReport("base_hyperkaehler", "base locally hyper-Kaehler: omega'_a = 0", tol)
    for i, r in enumerate(fit.per_sample):
        qk.add("fit residual", r, i)
        hk.add("|omega'|", max_abs(fit.omega[i]), i)
        hk.add("fit residual", r, i)
    hk.info["omega"] = fit.omega.tolist()
    return qk, hk


def check_quaternionic_submersion(s: SubmersionDescriptor, samples: SamplePlan, *,
                                  triple_total: StructureTriple | None = None,
                                  tol: float = TOL_D1, hk_tol: float = 1e-8) -> CheckReport:
    """Quaternionic submersion between flat almost quaternionic hermitian
    models: holomorphy, isometry, transfer of the connection forms to the
    base and the base quaternionic Kaehler defect with the transferred forms.
    Locally hyper-Kaehler verdicts for both sides are stored in ``info``."""
    T = triple_total or s.total_triple
    if T is None or s.base_triple is None:
        raise InvalidArgument("quaternionic submersion check needs triples on both sides")
    if T.dim != s.total.ambient_dim or s.total.ambient_dim != s.total.domain_dim:
        raise InvalidArgument("total space must be a full-dimensional chart of the triple's R^N")
    report = CheckReport("quaternionic_submersion", "(sigma, sigma')-holomorphic Riemannian submersion", tol)
    total_samples, omega_map = [], {}
    for i, (u, raw) in enumerate(zip(samples.points, samples.vectors)):
        s.total.require_interior(u)
        sp = split(s, u)
        q = s.pi(u)
        Jb = s.base_triple(q).J
        lhs = np.stack([sp.K @ T.J[a] for a in range(3)])
        design = np.stack([Jb[b] @ sp.K for b in range(3)])
        _, res = fit_rotation(design, lhs)
        report.add("holomorphy", res, i)
        gp = base_metric(s, q)
        KH = sp.K @ sp.Eh
        report.add("isometry", max_abs(KH.T @ gp @ KH - np.eye(KH.shape[1])), i)
        X = raw[0] / np.linalg.norm(raw[0])
        total_samples.append((u, X))
    J_total = lambda p: T
    fit_total = qk_connection_forms(J_total, flat_connection(s.total.fd_step1), total_samples, tol=hk_tol)

    # base side: J'_a from the holomorphy relation at section points, omega'
    # transferred through basic lifts.
    gfield = base_metric_field(s)
    conn_base = metric_connection(gfield, s.base.fd_step2)
    Jp_field = pushed_triple_field(s)
    base_omegas, transfer, defect22 = [], 0.0, 0.0
    for i, (u, _) in enumerate(total_samples):
        q = s.pi(u)
        sec = s.section(q)
        sp = split(s, sec)
        Xs = sp.K @ sp.h @ samples.vectors[i][0]
        Xs = Xs / np.linalg.norm(Xs)
        X_lift = sp.lift_matrix @ Xs
        w_total, _ = fit_connection_forms(T, flat_connection(s.total.fd_step1)(J_total, sec, X_lift))
        nablaJp = conn_base(Jp_field, q, Xs)
        Jp = Jp_field(q)
        w_base, r_base = fit_connection_forms(Jp, nablaJp)
        base_omegas.append(w_base)
        transfer = max(transfer, max_abs(w_base - w_total))
        defect22 = max(defect22, max_abs(nablaJp - qk_rhs(Jp, w_total)))
    report.add("omega' transfer", transfer)
    report.add("nabla'J' defect", defect22)
    base_omegas = np.array(base_omegas)
    report.info.update(
        omega_total=float(max_abs(fit_total.omega)),
        omega_base=float(max_abs(base_omegas)),
        total_residual=float(fit_total.residual),
        total_hyperkaehler=bool(fit_total.hyperkaehler_flag),
        base_hyperkaehler=bool(max_abs(base_omegas) < hk_tol and defect22 < hk_tol),
    )
    return report
