"""Run counters shared by the column generation, branch & bound and CCG loops.

Every oracle call belongs to exactly one column-generation loop, which is
either a lower-bound loop (a branch & bound node, ``"lb"``) or the evaluation
of a fixed first stage (``"ub"``).  Loops report their iteration and call
counts on exit, so ``oracle_calls == sum(lb_calls) + sum(ub_calls)``.
"""
from __future__ import annotations

import threading
from dataclasses import dataclass, field
from statistics import fmean
from typing import Optional


@dataclass(frozen=True)
class CounterSnapshot:
    oracle_calls: int = 0
    master_solves: int = 0
    lb_iterations: tuple = ()
    ub_iterations: tuple = ()
    lb_calls: tuple = ()
    ub_calls: tuple = ()
    nodes: int = 0
    ccg_iterations: int = 0

    @property
    def i_lb(self) -> Optional[float]:
        return fmean(self.lb_iterations) if self.lb_iterations else None

    @property
    def i_ub(self) -> Optional[float]:
        return fmean(self.ub_iterations) if self.ub_iterations else None

    def consistent(self) -> bool:
        return self.oracle_calls == sum(self.lb_calls) + sum(self.ub_calls)


@dataclass
class Counters:
    oracle_calls: int = 0
    master_solves: int = 0
    lb_iterations: list = field(default_factory=list)
    ub_iterations: list = field(default_factory=list)
    lb_calls: list = field(default_factory=list)
    ub_calls: list = field(default_factory=list)
    nodes: int = 0
    ccg_iterations: int = 0
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False, compare=False)

    def oracle_call(self) -> None:
        with self._lock:
            self.oracle_calls += 1

    def master_solve(self) -> None:
        with self._lock:
            self.master_solves += 1

    def loop_done(self, role: str, iterations: int, calls: int) -> None:
        if role not in ("lb", "ub"):
            raise ValueError(f"unknown loop role {role!r}")
        with self._lock:
            getattr(self, f"{role}_iterations").append(iterations)
            getattr(self, f"{role}_calls").append(calls)

    def node(self) -> None:
        with self._lock:
            self.nodes += 1

    def ccg_iteration(self) -> None:
        with self._lock:
            self.ccg_iterations += 1

    def snapshot(self) -> CounterSnapshot:
        with self._lock:
            return CounterSnapshot(self.oracle_calls, self.master_solves,
                                   tuple(self.lb_iterations), tuple(self.ub_iterations),
                                   tuple(self.lb_calls), tuple(self.ub_calls),
                                   self.nodes, self.ccg_iterations)
