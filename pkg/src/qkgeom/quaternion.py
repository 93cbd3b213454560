"""Quaternionic structures on R^{4m}: triples, axiom checks, SO(3) rotation,
quaternionic 4-planes and the connection-form fit of a quaternionic Kaehler
structure.

Quaternions are stored as length-4 arrays ``(a, b, c, d)`` for
``a + b i + c j + d k`` and H^m is identified with R^{4m} block by block.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import InvalidArgument, NumericalFailure
from .report import CheckReport, max_abs

TOL_ALG = 1e-10
TOL_D1 = 1e-4

# (alpha, beta, gamma) over the even permutations of (1, 2, 3), zero-based.
EVEN_PERMUTATIONS = ((0, 1, 2), (1, 2, 0), (2, 0, 1))

UNITS = {
    "1": np.array([1.0, 0.0, 0.0, 0.0]),
    "i": np.array([0.0, 1.0, 0.0, 0.0]),
    "j": np.array([0.0, 0.0, 1.0, 0.0]),
    "k": np.array([0.0, 0.0, 0.0, 1.0]),
}


def qmul(p, q) -> np.ndarray:
    a1, b1, c1, d1 = p
    a2, b2, c2, d2 = q
    return np.array([
        a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
        a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
        a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
        a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2,
    ])


def qconj(q) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    return np.array([q[0], -q[1], -q[2], -q[3]])


def qinv(q) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    return qconj(q) / float(q @ q)


def left_matrix(q) -> np.ndarray:
    """4x4 matrix of x -> q x."""
    return np.column_stack([qmul(q, e) for e in np.eye(4)])


def right_matrix(q) -> np.ndarray:
    """4x4 matrix of x -> x q."""
    return np.column_stack([qmul(e, q) for e in np.eye(4)])


def conjugation_rotation(lam, basis: Sequence[str] = ("i", "j", "k")) -> np.ndarray:
    """3x3 matrix C with lam u_a lam^-1 = sum_b C[a, b] u_b for the given
    imaginary units u."""
    units = [UNITS[name] for name in basis]
    lam = np.asarray(lam, dtype=float)
    C = np.empty((3, 3))
    for a, u in enumerate(units):
        w = qmul(qmul(lam, u), qinv(lam))
        C[a] = [w @ v for v in units]
    return C


@dataclass(frozen=True)
class StructureTriple:
    """Three N x N matrices (J_1, J_2, J_3) spanning an almost quaternionic
    structure at a point. No axioms are enforced on construction; use
    :func:`check_structure_axioms`."""

    J: np.ndarray
    convention: str = "custom"

    def __post_init__(self):
        J = np.asarray(self.J, dtype=float)
        if J.ndim != 3 or J.shape[0] != 3 or J.shape[1] != J.shape[2]:
            raise InvalidArgument(f"expected an array of shape (3, N, N), got {J.shape}")
        object.__setattr__(self, "J", J)

    @property
    def dim(self) -> int:
        return self.J.shape[1]

    def __getitem__(self, alpha: int) -> np.ndarray:
        return self.J[alpha]


def make_structure_triple(m: int, convention: str = "left") -> StructureTriple:
    """Standard triple on H^m = R^{4m}.

    ``left`` multiplies each quaternionic coordinate on the left by (i, j, k).
    ``right`` multiplies on the right by (i, k, j); right multiplication
    reverses composition order, so this ordering is the one with J_1 J_2 = J_3.
    ``right-naive`` is right multiplication by (i, j, k), kept as a negative
    example: it violates J_1 J_2 = J_3.
    """
    if not isinstance(m, (int, np.integer)) or m < 1:
        raise InvalidArgument(f"quaternionic dimension must be a positive integer, got {m!r}")
    if convention == "left":
        blocks = [left_matrix(UNITS[u]) for u in "ijk"]
    elif convention == "right":
        blocks = [right_matrix(UNITS[u]) for u in "ikj"]
    elif convention == "right-naive":
        blocks = [right_matrix(UNITS[u]) for u in "ijk"]
    else:
        raise InvalidArgument(f"unknown convention {convention!r}")
    eye = np.eye(int(m))
    return StructureTriple(np.stack([np.kron(eye, b) for b in blocks]), convention)


def check_structure_axioms(T: StructureTriple, metric=None, *, tol: float = TOL_ALG) -> CheckReport:
    """Residuals of J_a^2 = -Id, J_1 J_2 = -J_2 J_1 = J_3 and of
    g(J_a X, J_a Y) = g(X, Y), all as matrix identities (so every basis pair
    is covered and integer triples give exact zeros)."""
    N = T.dim
    g = np.eye(N) if metric is None else np.asarray(metric, dtype=float)
    if g.shape != (N, N):
        raise InvalidArgument(f"metric shape {g.shape} does not match triple dimension {N}")
    if N % 4:
        raise InvalidArgument(f"dimension {N} is not a multiple of 4")
    J1, J2, J3 = T.J
    report = CheckReport("structure_axioms", "almost quaternionic hermitian structure: J_a^2 = -Id, J_1 J_2 = J_3, g-orthogonal", tol)
    eye = np.eye(N)
    for a in range(3):
        report.add(f"J{a + 1}^2+Id", max_abs(T.J[a] @ T.J[a] + eye))
    report.add("J1J2-J3", max_abs(J1 @ J2 - J3))
    report.add("J2J1+J3", max_abs(J2 @ J1 + J3))
    for a in range(3):
        report.add("metric_adapted", max_abs(T.J[a].T @ g @ T.J[a] - g))
    return report


def is_special_orthogonal(C, tol: float = TOL_ALG) -> bool:
    C = np.asarray(C, dtype=float)
    return C.shape == (3, 3) and max_abs(C.T @ C - np.eye(3)) < tol and abs(np.linalg.det(C) - 1) < tol


def so3_rotate(T: StructureTriple, C, *, tol: float = TOL_ALG) -> StructureTriple:
    """New local basis J'_a = sum_b C[a, b] J_b."""
    C = np.asarray(C, dtype=float)
    if not is_special_orthogonal(C, tol):
        raise InvalidArgument("rotation matrix is not in SO(3)")
    return StructureTriple(np.einsum("ab,bij->aij", C, T.J), T.convention)


def random_rotation(rng: np.random.Generator) -> np.ndarray:
    """SO(3) element from conjugation by a normalized Gaussian quaternion."""
    q = rng.standard_normal(4)
    return conjugation_rotation(q / np.linalg.norm(q))


def _span_projector(vectors: np.ndarray, tol: float) -> np.ndarray:
    U, s, _ = np.linalg.svd(vectors.T, full_matrices=False)
    rank = int(np.sum(s > tol * max(s[0], 1.0)))
    U = U[:, :rank]
    return U @ U.T


def quaternionic_plane(T: StructureTriple, X, *, tol: float = TOL_ALG) -> np.ndarray:
    """Orthonormal basis (rows) of Q(X) = span{X, J_1 X, J_2 X, J_3 X}."""
    X = np.asarray(X, dtype=float)
    if np.linalg.norm(X) <= tol:
        raise InvalidArgument("quaternionic plane of the zero vector")
    Q, R = np.linalg.qr(np.column_stack([X, *(J @ X for J in T.J)]))
    keep = np.abs(np.diag(R)) > tol * np.linalg.norm(X)
    return Q[:, keep].T


def half_quaternionic(T: StructureTriple, X, Y, *, tol: float = 1e-9) -> bool:
    """True iff Q(X) = Q(Y), compared through orthogonal projectors."""
    PX = _span_projector(quaternionic_plane(T, X), tol)
    PY = _span_projector(quaternionic_plane(T, Y), tol)
    return max_abs(PX - PY) < tol


# --- connection forms -------------------------------------------------------

@dataclass
class QKFormFit:
    """Least-squares fit of nabla_X J_a against the right side of the
    quaternionic Kaehler condition, one row of ``omega`` per sample."""

    omega: np.ndarray
    residual: float
    hyperkaehler_flag: bool
    per_sample: list[float] = field(default_factory=list)


def qk_design(T: StructureTriple) -> np.ndarray:
    """Columns: coefficients of (omega_1, omega_2, omega_3) in the stacked
    right-hand sides

        nabla J_1 =  w3 J_2 - w2 J_3
        nabla J_2 = -w3 J_1 + w1 J_3
        nabla J_3 =  w2 J_1 - w1 J_2
    """
    J1, J2, J3 = T.J
    Z = np.zeros_like(J1)
    cols = [
        np.concatenate([Z.ravel(), J3.ravel(), (-J2).ravel()]),
        np.concatenate([(-J3).ravel(), Z.ravel(), J1.ravel()]),
        np.concatenate([J2.ravel(), (-J1).ravel(), Z.ravel()]),
    ]
    return np.column_stack(cols)


def qk_rhs(T: StructureTriple, omega) -> np.ndarray:
    """Stacked (3, N, N) right-hand side of the quaternionic Kaehler condition."""
    N = T.dim
    return (qk_design(T) @ np.asarray(omega, dtype=float)).reshape(3, N, N)


def fit_connection_forms(T: StructureTriple, nablaJ) -> tuple[np.ndarray, float]:
    """Fit (w1, w2, w3) for one sample; returns omega and max-norm residual."""
    A = qk_design(T)
    b = np.asarray(nablaJ, dtype=float).ravel()
    omega, *_ = np.linalg.lstsq(A, b, rcond=None)
    if np.linalg.matrix_rank(A) < 3:
        raise NumericalFailure("connection-form design matrix is rank deficient")
    return omega, max_abs(b - A @ omega)


def flat_connection(h: float = 1e-5) -> Callable:
    """nabla_X J for the flat connection on R^N: central differences."""

    def nabla(J_field, p, X):
        p = np.asarray(p, dtype=float)
        X = np.asarray(X, dtype=float)
        return (J_field(p + h * X).J - J_field(p - h * X).J) / (2 * h)

    return nabla


def qk_connection_forms(J_field: Callable, connection: Callable, samples, *,
                        tol: float = TOL_D1) -> QKFormFit:
    """Fit the local 1-forms omega_a(X) for each ``(point, direction)``.

    ``connection(J_field, p, X)`` must return the (3, N, N) array of
    nabla_X J_a at p. The hyper-Kaehler flag requires every omega and every
    post-fit residual below ``tol``.
    """
    omegas, residuals = [], []
    for p, X in samples:
        T = J_field(p)
        w, r = fit_connection_forms(T, connection(J_field, p, X))
        omegas.append(w)
        residuals.append(r)
    omega = np.array(omegas).reshape(-1, 3)
    residual = max(residuals, default=0.0)
    flag = bool(max_abs(omega) < tol and residual < tol)
    return QKFormFit(omega, residual, flag, residuals)
