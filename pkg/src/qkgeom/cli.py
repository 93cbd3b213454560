"""``verify`` command: run a scenario's check table and write a report.

Exit codes: 0 when every row matches its expected verdict, 1 on any
mismatch, 2 on usage or configuration errors.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from typing import Any, Sequence

from .errors import GeometryError, InvalidArgument
from .report import CheckReport
from .scenarios import SCENARIOS, Scenario
from .suite import RunConfig, run_suite


def _canonical_scenario(name: str) -> str:
    for s in SCENARIOS:
        if s.lower() == name.lower():
            return s
    raise InvalidArgument(f"unknown scenario {name!r}; choose from {', '.join(SCENARIOS)}")


def _num(x: float) -> str:
    x = float(x)
    if math.isnan(x) or math.isinf(x):
        return json.dumps(str(x))
    return format(x, ".17g")


def dumps(obj: Any, indent: int = 2, level: int = 0) -> str:
    """JSON with insertion-ordered keys and floats at 17 significant digits."""
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        return "[\n" + ",\n".join(pad + dumps(v, indent, level + 1) for v in obj) + "\n" + end + "]"
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, int):
        return str(obj)
    return _num(obj)


def report_dict(sc: Scenario, cfg: RunConfig, rows: Sequence[CheckReport]) -> dict[str, Any]:
    return {
        "scenario": sc.name,
        "params": dict(sc.params),
        "config": cfg.public(),
        "rows": [
            {
                "check_name": r.check_name,
                "paper_ref": r.paper_ref,
                "expected": r.expected,
                "passed": r.passed,
                "max_residual": r.max_residual,
                "tolerance": r.tolerance,
            }
            for r in rows
        ],
        "overall": "PASS" if all(r.matches_expectation for r in rows) else "FAIL",
    }


def format_text(sc: Scenario, cfg: RunConfig, rows: Sequence[CheckReport]) -> str:
    params = " ".join(f"{k}={v}" for k, v in sc.params.items())
    lines = [f"scenario {sc.name} ({params}) seed={cfg.seed} samples={cfg.samples} vectors={cfg.vectors_per_point}"]
    width = max(len(r.check_name) for r in rows)
    lines.append(f"{'check':<{width}}  {'expected':<8}  {'verdict':<7}  {'match':<8}  {'max_residual':>24}  {'tolerance':>9}  reference")
    for r in rows:
        verdict = "pass" if r.passed else "fail"
        match = "ok" if r.matches_expectation else "MISMATCH"
        lines.append(f"{r.check_name:<{width}}  {r.expected:<8}  {verdict:<7}  {match:<8}  "
                     f"{_num(r.max_residual):>24}  {r.tolerance:>9.1e}  {r.paper_ref}")
    overall = "PASS" if all(r.matches_expectation for r in rows) else "FAIL"
    lines.append(f"OVERALL {overall}")
    return "\n".join(lines) + "\n"


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="verify", description="Run the check table of a geometry scenario.")
    p.add_argument("scenario", help=f"one of {', '.join(SCENARIOS)}")
    p.add_argument("--m", type=int, help="quaternionic dimension of the base (FlatHyperplane, HopfSphere)")
    p.add_argument("--n", type=int, help="total quaternionic dimension (FlatQuaternionicProjection)")
    p.add_argument("--k", type=int, help="base quaternionic dimension (FlatQuaternionicProjection)")
    p.add_argument("--samples", type=int, default=32)
    p.add_argument("--vectors", type=int, default=8)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--tol-alg", type=float, default=1e-8)
    p.add_argument("--tol-d1", type=float, default=1e-4)
    p.add_argument("--tol-d2", type=float, default=2e-2)
    p.add_argument("--fd1", type=float, default=1e-5)
    p.add_argument("--fd2", type=float, default=1e-3)
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--out", help="output path (default: standard output)")
    return p


def config_from_args(args: argparse.Namespace) -> RunConfig:
    name = _canonical_scenario(args.scenario)
    params: dict[str, Any] = {}
    if name == "FlatQuaternionicProjection":
        if args.m is not None:
            raise InvalidArgument("--m does not apply to FlatQuaternionicProjection")
        params = {"n": 2 if args.n is None else args.n, "k": 1 if args.k is None else args.k}
    else:
        if args.n is not None or args.k is not None:
            raise InvalidArgument(f"--n/--k do not apply to {name}")
        params = {"m": 1 if args.m is None else args.m}
    cfg = RunConfig(name, params, args.samples, args.vectors, args.seed, args.tol_alg, args.tol_d1,
                    args.tol_d2, args.fd1, args.fd2, args.format, args.out)
    cfg.validate()
    return cfg


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    try:
        cfg = config_from_args(args)
        sc, rows = run_suite(cfg)
    except InvalidArgument as exc:
        print(f"verify: error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return 2
    except GeometryError as exc:
        print(f"verify: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    if cfg.format == "json":
        text = dumps(report_dict(sc, cfg, rows)) + "\n"
    else:
        text = format_text(sc, cfg, rows)
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0 if all(r.matches_expectation for r in rows) else 1


if __name__ == "__main__":
    sys.exit(main())
