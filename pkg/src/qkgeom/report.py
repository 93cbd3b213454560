"""CheckReport: the common output of every verification routine."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable


@dataclass
class CheckReport:
    """Named residuals with a tolerance and a pass/fail verdict.

    ``components`` keeps the maximum of each sub-residual so callers can
    inspect one axiom at a time; ``max_residual`` is the maximum over all of
    them. ``per_sample`` holds ``(sample_index, residual)`` pairs sorted by
    index.
    """

    check_name: str
    paper_ref: str
    tolerance: float
    components: dict[str, float] = field(default_factory=dict)
    per_sample: list[tuple[int, float]] = field(default_factory=list)
    expected: str = "pass"
    info: dict[str, object] = field(default_factory=dict)

    @property
    def max_residual(self) -> float:
        if not self.components:
            return 0.0
        return max(self.components.values())

    @property
    def passed(self) -> bool:
        return self.max_residual < self.tolerance

    @property
    def matches_expectation(self) -> bool:
        return self.passed == (self.expected == "pass")

    def add(self, name: str, value: float, sample: int | None = None) -> None:
        value = float(value)
        self.components[name] = max(self.components.get(name, 0.0), value)
        if sample is not None:
            self._record(sample, value)

    def _record(self, sample: int, value: float) -> None:
        for i, (idx, old) in enumerate(self.per_sample):
            if idx == sample:
                self.per_sample[i] = (idx, max(old, value))
                return
        self.per_sample.append((sample, value))
        self.per_sample.sort()

    def merge(self, other: "CheckReport", prefix: str = "") -> None:
        for name, value in other.components.items():
            self.add(prefix + name, value)
        for idx, value in other.per_sample:
            self._record(idx, value)

    def summary(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        return f"{self.check_name}: {verdict} (max residual {self.max_residual:.3e} < {self.tolerance:.1e}?)"


def max_abs(values: Iterable[float] | object) -> float:
    import numpy as np

    arr = np.asarray(values, dtype=float)
    if arr.size == 0:
        return 0.0
    return float(np.max(np.abs(arr)))
