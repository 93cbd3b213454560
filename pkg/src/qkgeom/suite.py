"""Runs a scenario's expected table and collects one CheckReport per row."""
from __future__ import annotations

from dataclasses import asdict, dataclass, field, replace
from typing import Any, Callable

import numpy as np

from .curvature import riemann_tensor, space_form_fit
from .errors import InvalidArgument
from .geometry import classify_umbilical
from .hypersurface import (
    SamplePlan,
    check_ac3_axioms,
    check_cosymplectic,
    check_decomposition,
    check_mixed_geodesic,
)
from .quaternion import check_structure_axioms
from .report import CheckReport
from .scenarios import Scenario, build_scenario
from .submersion import (
    base_metric_field,
    check_base_connection_forms,
    check_basic_fields,
    check_fiber_compatibility,
    check_oneill,
    check_pushed_axioms,
    check_qr3_submersion,
    check_quaternionic_submersion,
    push_structure,
)

# Expensive checks (nested finite differences) run on the first few points.
HEAVY_POINTS = 8
PLANES_PER_POINT = 2


@dataclass
class RunConfig:
    scenario: str
    params: dict[str, Any] = field(default_factory=dict)
    samples: int = 32
    vectors_per_point: int = 8
    seed: int = 42
    tol_alg: float = 1e-8
    tol_d1: float = 1e-4
    tol_d2: float = 2e-2
    fd_step1: float = 1e-5
    fd_step2: float = 1e-3
    format: str = "text"
    out: str | None = None

    def validate(self) -> None:
        if self.samples < 4:
            raise InvalidArgument("samples must be at least 4")
        if self.vectors_per_point < 1:
            raise InvalidArgument("vectors per point must be positive")
        if min(self.tol_alg, self.tol_d1, self.tol_d2) <= 0:
            raise InvalidArgument("tolerances must be positive")
        if min(self.fd_step1, self.fd_step2) <= 0:
            raise InvalidArgument("finite-difference steps must be positive")
        if self.format not in ("text", "json"):
            raise InvalidArgument(f"unknown format {self.format!r}")

    def tolerance(self, key: str) -> float:
        return {"alg": self.tol_alg, "d1": self.tol_d1, "d2": self.tol_d2}[key]

    def public(self) -> dict[str, Any]:
        d = asdict(self)
        d.pop("out")
        d.pop("params")
        d.pop("scenario")
        return d


def with_steps(sc: Scenario, fd1: float, fd2: float) -> Scenario:
    """Copy of the scenario whose charts use the given finite-difference steps."""
    sub = sc.submersion
    M = sc.hypersurface
    total = sub.total.with_steps(fd1, fd2)
    base = sub.base.with_steps(fd1, fd2)
    objects = dict(sc.objects)
    if M is not None:
        M = replace(M, chart=total)
        objects["hypersurface"] = M
    objects["submersion"] = replace(sub, total=total, base=base, hypersurface=M)
    return replace(sc, objects=objects)


class Runner:
    """Evaluates check rows for one scenario, sharing intermediate results."""

    def __init__(self, sc: Scenario, cfg: RunConfig):
        self.sc = with_steps(sc, cfg.fd_step1, cfg.fd_step2)
        self.cfg = cfg
        self.sub = self.sc.submersion
        self.M = self.sc.hypersurface
        self.plan = SamplePlan.make(self.sub.total, cfg.samples, cfg.vectors_per_point, cfg.seed,
                                    radius=self.sc.sample_radius)
        n = min(HEAVY_POINTS, cfg.samples)
        self.heavy = SamplePlan(self.plan.points[:n], self.plan.vectors[:n])
        base_plan = SamplePlan.make(self.sub.base, n, 1, cfg.seed + 1, radius=self.sc.base_sample_radius)
        self.base_points = list(base_plan.points)
        self._cache: dict[str, Any] = {}

    def rng(self, offset: int) -> np.random.Generator:
        return np.random.default_rng(self.cfg.seed + offset)

    def _once(self, key: str, fn: Callable[[], Any]) -> Any:
        if key not in self._cache:
            self._cache[key] = fn()
        return self._cache[key]

    # row implementations -------------------------------------------------

    def structure_axioms(self, tol):
        T = self.sc.objects["triple"]
        return check_structure_axioms(T, tol=tol)

    def ac3_axioms(self, tol):
        return check_ac3_axioms(self.M, self.plan, tol=tol)

    def tangent_normal_decomposition(self, tol):
        return check_decomposition(self.M, self.plan, tol=tol)

    def _mixed(self):
        return self._once("mixed", lambda: check_mixed_geodesic(self.M, self.plan, tol=self.cfg.tol_d1))

    def mixed_geodesic(self, tol):
        rep = self._mixed()
        out = CheckReport(rep.check_name, rep.paper_ref, tol)
        out.merge(rep)
        return out

    def vertical_integrability(self, tol):
        rep = CheckReport("vertical_integrability",
                          "V = span{xi_a} is integrable iff the hypersurface is mixed geodesic: [xi_a, xi_b] in V", tol)
        rep.add("[xi_a,xi_b] off V", self._mixed().info["bracket_residual"])
        return rep

    def _umbilical(self):
        return self._once("umb", lambda: classify_umbilical(self.sub.total, self.heavy.points,
                                                            tol=self.cfg.tol_d1, min_points=4))

    def totally_geodesic(self, tol):
        cl = self._umbilical()
        rep = CheckReport("totally_geodesic", "second fundamental form B vanishes identically", tol)
        rep.add("max |B|", cl.max_B)
        return rep

    def extrinsic_sphere(self, tol):
        cl = self._umbilical()
        rep = CheckReport("extrinsic_sphere",
                          "extrinsic sphere: B(E, F) = g(E, F) H with H nonzero and normal-parallel", tol)
        rep.add("umbilical", cl.umbilical_residual)
        rep.add("normal parallel", cl.normal_parallel_residual)
        rep.add("|H| deficit", max(0.0, 10 * tol - cl.min_mean_curvature))
        rep.info["mean_curvature"] = [cl.min_mean_curvature, cl.max_mean_curvature]
        return rep

    def cosymplectic(self, tol):
        return check_cosymplectic(self.M, self.plan, tol=tol)

    def qr3_submersion(self, tol):
        return check_qr3_submersion(self.sub, self.plan, tol=tol, mixed=self._mixed())

    def pushed_structure_axioms(self, tol):
        return check_pushed_axioms(self.sub, self.base_points, tol=tol)

    def fiber_compatibility(self, tol):
        return check_fiber_compatibility(self.sub, self.base_points, self.rng(2), tol=tol)

    def basic_fields(self, tol):
        return check_basic_fields(self.sub, self.base_points, self.rng(3), tol=tol)

    def _oneill(self):
        return self._once("oneill", lambda: check_oneill(self.sub, self.heavy, tol=self.cfg.tol_d1))

    def _oneill_row(self, name, tol):
        rep = self._oneill()[name]
        out = CheckReport(rep.check_name, rep.paper_ref, tol)
        out.merge(rep)
        return out

    def oneill_T_vanishes(self, tol):
        return self._oneill_row("oneill_T_vanishes", tol)

    def oneill_A_vanishes(self, tol):
        return self._oneill_row("oneill_A_vanishes", tol)

    def A_bracket_identity(self, tol):
        return self._oneill_row("A_bracket_identity", tol)

    def T_phi_identity(self, tol):
        return self._oneill_row("T_phi_identity", tol)

    def _base_forms(self):
        return self._once("forms", lambda: check_base_connection_forms(self.sub, self.base_points, self.rng(4),
                                                                       tol=self.cfg.tol_d1))

    def base_quaternionic_kaehler(self, tol):
        rep = self._base_forms()[0]
        out = CheckReport(rep.check_name, rep.paper_ref, tol)
        out.merge(rep)
        return out

    def space_form(self, tol, target=None):
        g = base_metric_field(self.sub)
        h = self.sub.base.fd_step2
        curv = [riemann_tensor(g, q, h) for q in self.base_points]
        triples = [push_structure(self.sub, self.sub.section(q)).J_prime for q in self.base_points]
        fit = space_form_fit(curv, triples, planes_per_point=PLANES_PER_POINT, seed=self.cfg.seed)
        rep = CheckReport("space_form", "quaternionic space form: R = c/4 {g(Z,Y)X - g(X,Z)Y + sum_a [...]}", tol)
        rep.add("relative residual", fit.relative_residual)
        rep.add("quaternionic sectional spread", fit.spread)
        if target is not None:
            rep.add("|c - target|/max(1,|target|)", abs(fit.c - target) / max(1.0, abs(target)))
        rep.info.update(c=fit.c, flat=fit.flat, planes=len(fit.quaternionic_sectional))
        return rep

    def _quaternionic(self):
        return self._once("quat", lambda: check_quaternionic_submersion(self.sub, self.plan, tol=self.cfg.tol_d1,
                                                                        hk_tol=self.cfg.tol_alg))

    def quaternionic_submersion(self, tol):
        rep = self._quaternionic()
        out = CheckReport(rep.check_name, rep.paper_ref, tol)
        out.merge(rep)
        out.info.update(rep.info)
        return out

    def total_hyperkaehler(self, tol):
        info = self._quaternionic().info
        rep = CheckReport("total_hyperkaehler", "locally hyper-Kaehler total space: omega_a = 0", tol)
        rep.add("|omega|", info["omega_total"])
        rep.add("fit residual", info["total_residual"])
        return rep

    def base_hyperkaehler(self, tol):
        if self.M is None:
            info = self._quaternionic().info
            rep = CheckReport("base_hyperkaehler", "locally hyper-Kaehler base: omega'_a = 0 (both sides of a quaternionic submersion)", tol)
            rep.add("|omega'|", info["omega_base"])
            rep.add("nabla'J' defect", self._quaternionic().components["nabla'J' defect"])
            return rep
        src = self._base_forms()[1]
        rep = CheckReport(src.check_name, src.paper_ref, tol)
        rep.merge(src)
        return rep

    def quaternionic_submersion_scaled_base(self, tol):
        p = self.sc.params
        scaled = build_scenario("FlatQuaternionicProjection", n=p["n"], k=p["k"], base_scale=2.0)
        scaled = with_steps(scaled, self.cfg.fd_step1, self.cfg.fd_step2)
        rep = check_quaternionic_submersion(scaled.submersion, self.plan, tol=tol, hk_tol=self.cfg.tol_alg)
        out = CheckReport("quaternionic_submersion_scaled_base",
                          "Riemannian submersion isometry fails for base metric g' = 2 g", tol)
        out.merge(rep)
        return out

    def run_row(self, exp) -> CheckReport:
        fn = getattr(self, exp.check, None)
        if fn is None:
            raise InvalidArgument(f"expected-table row {exp.check!r} has no implementation")
        tol = self.cfg.tolerance(exp.tolerance)
        rep = fn(tol, target=exp.target) if exp.target is not None else fn(tol)
        rep.expected = exp.expected
        return rep


def run_suite(cfg: RunConfig, scenario: Scenario | None = None) -> tuple[Scenario, list[CheckReport]]:
    cfg.validate()
    sc = scenario or build_scenario(cfg.scenario, **cfg.params)
    runner = Runner(sc, cfg)
    return runner.sc, [runner.run_row(e) for e in sc.expected]
