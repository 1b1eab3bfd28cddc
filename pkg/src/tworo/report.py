"""Plain-data run report shared by every algorithm.

Values and bounds are stated in the problem's own sense: for a maximization
problem ``root_bound`` and ``best_bound`` are upper bounds.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field, fields
from typing import Optional

import numpy as np

from .counters import CounterSnapshot

TIMING_FIELDS = ("time_s",)


@dataclass
class RunReport:
    algorithm: str
    problem: str
    sense: str
    status: str
    value: Optional[float] = None
    incumbent_x: Optional[list] = None
    policy: list = field(default_factory=list)
    n_solutions: int = 0
    nodes: int = 0
    ccg_iterations: int = 0
    oracle_calls: int = 0
    master_solves: int = 0
    i_lb: Optional[float] = None
    i_ub: Optional[float] = None
    root_bound: Optional[float] = None
    root_gap: Optional[float] = None
    best_bound: Optional[float] = None
    gap: Optional[float] = None
    lb_history: list = field(default_factory=list)
    ub_history: list = field(default_factory=list)
    scenarios: list = field(default_factory=list)
    c_star: Optional[list] = None
    branching: Optional[str] = None
    adaptivity_gap: Optional[float] = None
    policy_gap: Optional[float] = None
    metrics_seed: Optional[int] = None
    time_s: float = 0.0

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "RunReport":
        names = {f.name for f in fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise ValueError(f"unknown report fields {sorted(unknown)}")
        return cls(**data)

    def comparable(self) -> dict:
        """Report content without wall-clock fields."""
        d = self.to_dict()
        for key in TIMING_FIELDS:
            d.pop(key)
        return d

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"


def _f(v) -> Optional[float]:
    if v is None:
        return None
    v = float(v)
    return v if np.isfinite(v) else None


def fill_counters(report: RunReport, snap: CounterSnapshot) -> None:
    report.nodes = snap.nodes
    report.ccg_iterations = snap.ccg_iterations
    report.oracle_calls = snap.oracle_calls
    report.master_solves = snap.master_solves
    report.i_lb = snap.i_lb
    report.i_ub = snap.i_ub


def policy_entries(pool) -> list:
    return [[list(z.x), list(z.y)] for z in pool]


def relative_gap(value: float, bound: float) -> Optional[float]:
    """Percent gap ``(value - bound) / |value|`` in the canonical sense."""
    if value is None or bound is None or not np.isfinite(value) or not np.isfinite(bound):
        return None
    if value == 0.0:
        return 0.0 if abs(value - bound) <= 1e-9 else None
    return 100.0 * (value - bound) / abs(value)


def to_sense(sign: float, v) -> Optional[float]:
    v = _f(v)
    return None if v is None else sign * v
