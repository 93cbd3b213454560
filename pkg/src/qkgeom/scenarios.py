"""Catalog of desk-scale instances: FlatHyperplane(m), HopfSphere(m) and
FlatQuaternionicProjection(n, k)."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .errors import InvalidArgument
from .geometry import Chart, identity_chart
from .hypersurface import OrientedHypersurface
from .quaternion import StructureTriple, make_structure_triple, qinv, qmul, so3_rotate
from .submersion import SubmersionDescriptor

SCENARIOS = ("FlatHyperplane", "HopfSphere", "FlatQuaternionicProjection")


@dataclass(frozen=True)
class Expectation:
    check: str
    expected: str          # "pass" or "fail"
    tolerance: str         # "alg", "d1" or "d2"
    target: float | None = None

    def as_dict(self) -> dict[str, Any]:
        d = {"check": self.check, "expected": self.expected, "tolerance": self.tolerance}
        if self.target is not None:
            d["target"] = self.target
        return d


@dataclass
class Scenario:
    name: str
    params: dict[str, Any]
    objects: dict[str, Any]
    expected: list[Expectation]
    sample_radius: float | None = None
    base_sample_radius: float | None = None
    notes: dict[str, str] = field(default_factory=dict)

    @property
    def submersion(self) -> SubmersionDescriptor:
        return self.objects["submersion"]

    @property
    def hypersurface(self) -> OrientedHypersurface | None:
        return self.objects.get("hypersurface")


# --- quaternionic helpers ----------------------------------------------------

def blocks(x) -> np.ndarray:
    return np.asarray(x, dtype=float).reshape(-1, 4)


def right_multiply(x, lam) -> np.ndarray:
    return np.concatenate([qmul(b, lam) for b in blocks(x)])


def unit_quaternion(t) -> np.ndarray:
    """exp of the imaginary quaternion t."""
    t = np.asarray(t, dtype=float)
    n = np.linalg.norm(t)
    if n == 0.0:
        return np.array([1.0, 0.0, 0.0, 0.0])
    return np.concatenate([[np.cos(n)], np.sin(n) * t / n])


def hopf_projection(x) -> np.ndarray:
    """Affine coordinate (p_2 p_1^-1, ..., p_{m+1} p_1^-1); constant on the
    orbits p -> p lambda."""
    b = blocks(x)
    inv = qinv(b[0])
    return np.concatenate([qmul(p, inv) for p in b[1:]])


def hopf_section(q) -> np.ndarray:
    x = np.concatenate([[1.0, 0.0, 0.0, 0.0], np.asarray(q, dtype=float)])
    return x / np.linalg.norm(x)


def fubini_study_metric(q) -> np.ndarray:
    """Closed form of the base metric of the unit-sphere Hopf map in the
    affine chart (quaternionic dimension 1 only): |dq|^2 / (1 + |q|^2)^2."""
    q = np.asarray(q, dtype=float)
    if q.shape != (4,):
        raise InvalidArgument("closed-form metric is implemented for HP^1 only")
    return np.eye(4) / (1.0 + q @ q) ** 2


def orthographic_sphere_chart(p0, radius: float = 0.8, name: str = "sphere") -> Chart:
    """u -> sqrt(1 - |u|^2) p0 + E u with E an orthonormal basis of p0^perp
    ordered so that det[E | p0] > 0 (outward normal is then positive)."""
    p0 = np.asarray(p0, dtype=float)
    p0 = p0 / np.linalg.norm(p0)
    N = p0.shape[0]
    Q, _ = np.linalg.qr(np.column_stack([p0, np.eye(N)]))
    E = Q[:, 1:N]
    if np.linalg.det(np.column_stack([E, p0])) < 0:
        E[:, -1] *= -1

    def embed(u):
        return np.sqrt(1.0 - u @ u) * p0 + E @ u

    def inverse(x):
        x = np.asarray(x, dtype=float)
        x = x / np.linalg.norm(x)
        if x @ p0 <= 0:
            raise InvalidArgument("point is outside the orthographic hemisphere")
        return E.T @ x

    d = N - 1
    return Chart(embed, -radius * np.ones(d), radius * np.ones(d), N, radius=radius,
                 center=np.zeros(d), inverse=inverse, name=name)


def ellipsoid_chart(axes, p0_index: int = 0, radius: float = 0.6) -> Chart:
    """Ellipsoid sum (x_i / a_i)^2 = 1 as the image of an orthographic unit
    sphere chart under diag(a)."""
    axes = np.asarray(axes, dtype=float)
    p0 = np.zeros(axes.shape[0])
    p0[p0_index] = 1.0
    sph = orthographic_sphere_chart(p0, radius)
    return Chart(lambda u: axes * sph.embedding(u), sph.lower, sph.upper, axes.shape[0],
                 radius=radius, center=sph.center, name=f"ellipsoid{tuple(axes)}")


def graph_chart(height, dim: int, half_width: float = 1.0, name: str = "graph") -> Chart:
    """u -> (u, height(u)) in R^{dim + 1}."""
    return Chart(lambda u: np.concatenate([u, [height(u)]]), -half_width * np.ones(dim),
                 half_width * np.ones(dim), dim + 1, name=name)


def random_graph_height(dim: int, seed: int, amplitude: float = 0.15, terms: int = 4):
    """Seeded smooth perturbation sum_j a_j sin(w_j . u + c_j)."""
    rng = np.random.default_rng(seed)
    W = rng.standard_normal((terms, dim))
    c = rng.uniform(0, 2 * np.pi, terms)
    a = amplitude * rng.uniform(0.5, 1.0, terms) / terms
    return lambda u: float(a @ np.sin(W @ u + c))


def bump_height(eps: float, m: int = 1):
    """eps * x_1 * x_{4m+1}: couples the first horizontal and the first
    vertical coordinate of a hyperplane in H^{m+1} so B(xi_a, X) != 0."""
    return lambda u: eps * u[0] * u[4 * m]


# --- builders ----------------------------------------------------------------

def _flat_hyperplane(m: int) -> Scenario:
    N = 4 * (m + 1)
    d = N - 1
    chart = graph_chart(lambda u: 0.0, d, name=f"R^{d}")
    triple = make_structure_triple(m + 1, "left")
    M = OrientedHypersurface(chart, triple, name=f"hyperplane R^{d} in H^{m + 1}")
    base = identity_chart(4 * m, name=f"H^{m}")

    def shift(u, t):
        u = np.array(u, dtype=float)
        u[4 * m:4 * m + 3] += t
        return u

    sub = SubmersionDescriptor(
        total=chart, base=base,
        projection=lambda u: u[:4 * m],
        section=lambda q: np.concatenate([q, np.zeros(3)]),
        fiber_dim=3, hypersurface=M, fiber_shift=shift, name="hyperplane projection")
    expected = [
        Expectation("structure_axioms", "pass", "alg"),
        Expectation("ac3_axioms", "pass", "alg"),
        Expectation("tangent_normal_decomposition", "pass", "alg"),
        Expectation("mixed_geodesic", "pass", "d1"),
        Expectation("vertical_integrability", "pass", "d1"),
        Expectation("totally_geodesic", "pass", "d1"),
        Expectation("extrinsic_sphere", "fail", "d1"),
        Expectation("cosymplectic", "pass", "d1"),
        Expectation("qr3_submersion", "pass", "d1"),
        Expectation("pushed_structure_axioms", "pass", "d1"),
        Expectation("fiber_compatibility", "pass", "d1"),
        Expectation("basic_fields", "pass", "d1"),
        Expectation("oneill_T_vanishes", "pass", "d1"),
        Expectation("oneill_A_vanishes", "pass", "d1"),
        Expectation("A_bracket_identity", "pass", "d1"),
        Expectation("T_phi_identity", "pass", "d1"),
        Expectation("base_quaternionic_kaehler", "pass", "d1"),
        Expectation("base_hyperkaehler", "pass", "d1"),
        Expectation("space_form", "pass", "d2", target=0.0),
    ]
    return Scenario("FlatHyperplane", {"m": m}, {"hypersurface": M, "submersion": sub, "triple": triple},
                    expected, sample_radius=None, base_sample_radius=0.5)


HOPF_PATCHES = {
    # name: (total chart center direction, sample radius, base half width)
    "north": (None, 0.6, 1.0),
    "tilted": ("tilted", 0.3, 1.5),
}


def _hopf_sphere(m: int, patch: str = "north") -> Scenario:
    if patch not in HOPF_PATCHES:
        raise InvalidArgument(f"unknown Hopf patch {patch!r}")
    N = 4 * (m + 1)
    p0 = np.zeros(N)
    p0[0] = 1.0
    _, sample_radius, base_half = HOPF_PATCHES[patch]
    if patch == "tilted":
        p0[4] = 1.0
        p0 /= np.linalg.norm(p0)
    chart = orthographic_sphere_chart(p0, 0.8, name=f"S^{N - 1}")
    triple = make_structure_triple(m + 1, "right")
    M = OrientedHypersurface(chart, triple, name=f"unit S^{N - 1} in H^{m + 1}")
    q0 = hopf_projection(p0)
    base = Chart(lambda q: q, q0 - base_half, q0 + base_half, 4 * m, radius=base_half,
                 center=q0, inverse=lambda q: np.asarray(q, dtype=float), name=f"HP^{m}")

    def shift(u, t):
        return chart.inverse(right_multiply(chart(u), unit_quaternion(t)))

    sub = SubmersionDescriptor(
        total=chart, base=base,
        projection=lambda u: hopf_projection(chart(u)),
        section=lambda q: chart.inverse(hopf_section(q)),
        fiber_dim=3, hypersurface=M, fiber_shift=shift, name="Hopf map")
    expected = [
        Expectation("structure_axioms", "pass", "alg"),
        Expectation("ac3_axioms", "pass", "alg"),
        Expectation("tangent_normal_decomposition", "pass", "alg"),
        Expectation("mixed_geodesic", "pass", "d1"),
        Expectation("vertical_integrability", "pass", "d1"),
        Expectation("extrinsic_sphere", "pass", "d1"),
        Expectation("cosymplectic", "fail", "d1"),
        Expectation("qr3_submersion", "pass", "d1"),
        Expectation("pushed_structure_axioms", "pass", "d1"),
        Expectation("fiber_compatibility", "pass", "d1"),
        Expectation("basic_fields", "pass", "d1"),
        Expectation("oneill_T_vanishes", "pass", "d1"),
        Expectation("oneill_A_vanishes", "fail", "d1"),
        Expectation("A_bracket_identity", "pass", "d1"),
        Expectation("T_phi_identity", "pass", "d1"),
        Expectation("base_quaternionic_kaehler", "pass", "d1"),
        Expectation("base_hyperkaehler", "fail", "d1"),
        Expectation("space_form", "pass", "d2", target=4.0),
    ]
    return Scenario("HopfSphere", {"m": m, "patch": patch},
                    {"hypersurface": M, "submersion": sub, "triple": triple}, expected,
                    sample_radius=sample_radius, base_sample_radius=0.5,
                    notes={"convention": "right multiplication triple (i, k, j); fibres p -> p lambda"})


def _flat_quaternionic(n: int, k: int, base_rotation=None, base_scale: float = 1.0,
                       name: str = "FlatQuaternionicProjection") -> Scenario:
    total = identity_chart(4 * n, name=f"H^{n}")
    base = identity_chart(4 * k, name=f"H^{k}")
    T = make_structure_triple(n, "left")
    Tb = make_structure_triple(k, "left")
    if base_rotation is not None:
        Tb = so3_rotate(Tb, base_rotation)

    def shift(u, t):
        u = np.array(u, dtype=float)
        u[4 * k:] += t
        return u

    sub = SubmersionDescriptor(
        total=total, base=base,
        projection=lambda u: u[:4 * k],
        section=lambda q: np.concatenate([q, np.zeros(4 * (n - k))]),
        fiber_dim=4 * (n - k),
        base_metric_mode="explicit",
        explicit_metric=lambda q: base_scale * np.eye(4 * k),
        fiber_shift=shift, total_triple=T, base_triple=lambda q: Tb,
        name="coordinate projection")
    expected = [
        Expectation("structure_axioms", "pass", "alg"),
        Expectation("quaternionic_submersion", "pass", "d1"),
        Expectation("total_hyperkaehler", "pass", "alg"),
        Expectation("base_hyperkaehler", "pass", "alg"),
        Expectation("quaternionic_submersion_scaled_base", "fail", "d1"),
    ]
    return Scenario(name, {"n": n, "k": k}, {"submersion": sub, "triple": T, "base_triple": Tb},
                    expected, sample_radius=None, base_sample_radius=0.5)


def build_scenario(name: str, **params) -> Scenario:
    key = name.lower()
    if key == "flathyperplane":
        m = int(params.get("m", 1))
        if m not in (1, 2):
            raise InvalidArgument("FlatHyperplane supports m in {1, 2}")
        return _flat_hyperplane(m)
    if key == "hopfsphere":
        m = int(params.get("m", 1))
        if m not in (1, 2):
            raise InvalidArgument("HopfSphere supports m in {1, 2}")
        return _hopf_sphere(m, params.get("patch", "north"))
    if key == "flatquaternionicprojection":
        n, k = int(params.get("n", 2)), int(params.get("k", 1))
        if not (n > k >= 1 and n <= 3):
            raise InvalidArgument("FlatQuaternionicProjection needs n > k >= 1 and n <= 3")
        return _flat_quaternionic(n, k, params.get("base_rotation"), float(params.get("base_scale", 1.0)))
    raise InvalidArgument(f"unknown scenario {name!r}; choose from {', '.join(SCENARIOS)}")


def expected_table(s: Scenario) -> list[dict[str, Any]]:
    return [e.as_dict() for e in s.expected]
