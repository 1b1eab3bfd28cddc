"""Problem representation shared by every algorithm.

A two-stage problem has binary first-stage variables ``x`` (length ``n1``),
binary second-stage variables ``y`` (length ``n2``) and scenarios ``c`` of
length ``m``.  Objectives are bilinear::

    f((x, y), c) = g(x, y) + c @ h(x, y)

Scenarios are plain float arrays.  Uncertainty sets are affine images of a
bounded polyhedron in deviation space, ``c = c_bar + P @ delta``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import Callable, Iterator, Optional, Protocol

import numpy as np

from .lp import LE, LpProblem, solve_lp

EPS_ORACLE = 1e-6
MEMBERSHIP_TOL = 1e-9


class Sense(enum.Enum):
    MINIMIZE = "minimize"
    MAXIMIZE = "maximize"


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class FixationSet:
    """First-stage indices fixed to 0 (``I0``) and to 1 (``I1``)."""

    I0: frozenset = frozenset()
    I1: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "I0", frozenset(int(i) for i in self.I0))
        object.__setattr__(self, "I1", frozenset(int(i) for i in self.I1))
        if self.I0 & self.I1:
            raise ValueError(f"indices fixed to both 0 and 1: {sorted(self.I0 & self.I1)}")

    @classmethod
    def full(cls, x) -> "FixationSet":
        x = np.asarray(x).round().astype(int)
        return cls(frozenset(np.flatnonzero(x == 0)), frozenset(np.flatnonzero(x == 1)))

    def fix(self, i: int, value: int) -> "FixationSet":
        if value:
            return FixationSet(self.I0, self.I1 | {i})
        return FixationSet(self.I0 | {i}, self.I1)

    def admits(self, x) -> bool:
        return all(x[i] == 0 for i in self.I0) and all(x[i] == 1 for i in self.I1)

    def free(self, n1: int) -> list[int]:
        return [i for i in range(n1) if i not in self.I0 and i not in self.I1]

    def is_complete(self, n1: int) -> bool:
        return len(self.I0) + len(self.I1) == n1


@dataclass(frozen=True, eq=False)
class Solution:
    """A feasible ``z = (x, y)`` with its cached objective parts ``(g, h)``."""

    x: tuple
    y: tuple
    g: float
    h: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x", tuple(int(v) for v in self.x))
        object.__setattr__(self, "y", tuple(int(v) for v in self.y))
        object.__setattr__(self, "g", float(self.g))
        object.__setattr__(self, "h", _frozen(self.h))

    @property
    def key(self) -> tuple:
        return self.x, self.y

    def __eq__(self, other):
        return isinstance(other, Solution) and self.key == other.key

    def __hash__(self):
        return hash(self.key)

    def __repr__(self):
        return f"Solution(x={self.x}, y={self.y}, g={self.g:g})"


def evaluate(z: Solution, c) -> float:
    """``f(z, c) = g(z) + c @ h(z)``."""
    c = np.asarray(c, dtype=float)
    if c.shape != z.h.shape:
        raise ValueError(f"scenario of shape {c.shape} does not match h of shape {z.h.shape}")
    return z.g + float(c @ z.h)


class Oracle(Protocol):
    """Deterministic solver: a minimizer of ``f(., c)`` over ``Z`` under fixations.

    Returns ``None`` when no feasible solution respects the fixations.
    """

    thread_safe: bool

    def solve(self, c: np.ndarray, fix: FixationSet) -> Optional[Solution]: ...


# One enumeration chunk: a fixed first-stage vector x and every y in Y(x),
# stacked as rows of Y, with objective parts G (k,) and H (k, m).
Chunk = tuple


@dataclass(frozen=True)
class ProblemSpec:
    n1: int
    n2: int
    m: int
    sense: Sense
    objective: Callable
    first_stage_feasible: Callable
    full_feasible: Callable
    binary_first_stage: bool = False
    encoding: object = None
    enumerate: Optional[Callable[[], Iterator[Chunk]]] = None
    name: str = ""
    negated: bool = False

    def solution(self, x, y) -> Solution:
        x = np.asarray(x).round().astype(int)
        y = np.asarray(y).round().astype(int)
        if not self.full_feasible(x, y):
            raise ValueError(f"infeasible solution x={x.tolist()} y={y.tolist()}")
        g, h = self.objective(x, y)
        return Solution(x, y, g, h)

    @property
    def sign(self) -> float:
        """Factor mapping canonical (minimize) values back to the stated sense."""
        return -1.0 if self.negated else 1.0


def canonicalize(spec: ProblemSpec) -> ProblemSpec:
    """Minimization form of ``spec``: a maximization problem gets ``g`` and ``h`` negated."""
    if spec.sense is Sense.MINIMIZE:
        return spec
    objective = spec.objective

    def neg_objective(x, y):
        g, h = objective(x, y)
        return -g, -np.asarray(h, dtype=float)

    inner = spec.enumerate

    def neg_enumerate():
        for x, Y, G, H in inner():
            yield x, Y, -G, -H

    encoding = spec.encoding.negated() if spec.encoding is not None else None
    return replace(spec, sense=Sense.MINIMIZE, objective=neg_objective,
                   enumerate=neg_enumerate if inner is not None else None, encoding=encoding, negated=not spec.negated)


@dataclass(frozen=True, eq=False)
class UncertaintySet:
    """``U = {c_bar + P delta : delta_lower <= delta <= delta_upper, A delta <= b}``."""

    c_bar: np.ndarray
    P: np.ndarray
    delta_lower: np.ndarray
    delta_upper: np.ndarray
    A: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))
    b: np.ndarray = field(default_factory=lambda: np.zeros(0))
    kind: str = "polyhedral"
    gamma: Optional[float] = None

    def __post_init__(self):
        c_bar = _frozen(self.c_bar).ravel()
        P = _frozen(self.P).reshape(c_bar.size, -1)
        p = P.shape[1]
        lo = _frozen(self.delta_lower).ravel()
        hi = _frozen(self.delta_upper).ravel()
        A = _frozen(self.A).reshape(-1, p)
        b = _frozen(self.b).ravel()
        for name, val in (("c_bar", c_bar), ("P", P), ("delta_lower", lo),
                          ("delta_upper", hi), ("A", A), ("b", b)):
            object.__setattr__(self, name, val)
        if lo.size != p or hi.size != p or b.size != A.shape[0]:
            raise ValueError("inconsistent uncertainty set dimensions")
        if not (np.isfinite(lo).all() and np.isfinite(hi).all()):
            raise ValueError("deviation bounds must be finite")
        if (lo > hi).any():
            raise ValueError("empty deviation box")
        if A.shape[0] and not solve_lp(self._delta_lp(np.zeros(p))).optimal:
            raise ValueError("uncertainty set is empty")

    @property
    def m(self) -> int:
        return self.c_bar.size

    @property
    def p(self) -> int:
        return self.P.shape[1]

    @classmethod
    def budgeted(cls, c_bar, deviation, gamma: float) -> "UncertaintySet":
        """``c_i = c_bar_i + delta_i * deviation_i`` with ``delta in [0,1]``, ``sum(delta) <= gamma``."""
        if gamma < 0:
            raise ValueError("budget must be non-negative")
        deviation = np.asarray(deviation, dtype=float).ravel()
        p = deviation.size
        return cls(c_bar, np.diag(deviation), np.zeros(p), np.ones(p),
                   np.ones((1, p)), [float(gamma)], kind="budgeted", gamma=float(gamma))

    @classmethod
    def box(cls, lower, upper) -> "UncertaintySet":
        lower = np.asarray(lower, dtype=float).ravel()
        upper = np.asarray(upper, dtype=float).ravel()
        m = lower.size
        return cls(np.zeros(m), np.eye(m), lower, upper, kind="box")

    def scenario(self, delta) -> np.ndarray:
        return self.c_bar + self.P @ np.asarray(delta, dtype=float)

    def _delta_lp(self, objective) -> LpProblem:
        return LpProblem(objective, self.A, [LE] * self.A.shape[0], self.b,
                         self.delta_lower, self.delta_upper)

    def contains_delta(self, delta, tol: float = MEMBERSHIP_TOL) -> bool:
        delta = np.asarray(delta, dtype=float)
        return bool((delta >= self.delta_lower - tol).all()
                    and (delta <= self.delta_upper + tol).all()
                    and (self.A @ delta <= self.b + tol).all())

    def contains(self, c, tol: float = MEMBERSHIP_TOL) -> bool:
        c = np.asarray(c, dtype=float).ravel()
        if c.size != self.m:
            return False
        diag = self.P.shape[0] == self.P.shape[1] and not (self.P - np.diag(np.diag(self.P))).any()
        if diag and (self.A >= 0).all():
            d = np.diag(self.P)
            active = d != 0
            if np.abs(c[~active] - self.c_bar[~active]).max(initial=0.0) > tol:
                return False
            delta = self.delta_lower.copy()
            delta[active] = (c[active] - self.c_bar[active]) / d[active]
            return self.contains_delta(delta, tol)
        # general case: feasibility LP with |P delta - (c - c_bar)| <= tol
        rows = np.vstack([self.A, self.P, -self.P])
        rhs = np.concatenate([self.b + tol, c - self.c_bar + tol, -(c - self.c_bar) + tol])
        res = solve_lp(LpProblem(np.zeros(self.p), rows, [LE] * rows.shape[0], rhs,
                                 self.delta_lower, self.delta_upper))
        return res.optimal


def nominal_scenario(U: UncertaintySet) -> np.ndarray:
    """Scenario at the box midpoint of ``delta``, scaled toward zero until the rows hold."""
    delta = 0.5 * (U.delta_lower + U.delta_upper)
    if U.A.shape[0]:
        lhs = U.A @ delta
        over = lhs > U.b
        if over.any():
            with np.errstate(divide="ignore", invalid="ignore"):
                t = np.min(np.where(over, U.b / lhs, 1.0))
            delta = max(t, 0.0) * delta
    if not U.contains_delta(delta):
        # scaling toward the origin left the set; fall back to any feasible point
        res = solve_lp(U._delta_lp(np.zeros(U.p)))
        delta = res.x
    return U.scenario(delta)
