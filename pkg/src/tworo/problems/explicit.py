"""Problems given by an explicit list of feasible solutions.

Used as test fixtures: every quantity can be checked by hand.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..lp import EQ
from ..model import ProblemSpec, Sense, UncertaintySet
from .encoding import Block, LinearEncoding


@dataclass(frozen=True, eq=False)
class ExplicitInstance:
    n1: int
    n2: int
    m: int
    solutions: tuple  # of (x, y, g, h)
    uncertainty: UncertaintySet
    sense: Sense = Sense.MINIMIZE
    name: str = "explicit"

    def __post_init__(self):
        sols = []
        seen = set()
        for x, y, g, h in self.solutions:
            x, y = tuple(int(v) for v in x), tuple(int(v) for v in y)
            h = tuple(float(v) for v in np.atleast_1d(h))
            if len(x) != self.n1 or len(y) != self.n2 or len(h) != self.m:
                raise ValueError(f"solution {x, y} has inconsistent dimensions")
            if (x, y) in seen:
                raise ValueError(f"solution {x, y} listed twice")
            seen.add((x, y))
            sols.append((x, y, float(g), h))
        if not sols:
            raise ValueError("an explicit instance needs at least one solution")
        if self.uncertainty.m != self.m:
            raise ValueError("uncertainty set dimension does not match m")
        object.__setattr__(self, "solutions", tuple(sols))


def _encoding(inst: ExplicitInstance) -> LinearEncoding:
    X = np.array([s[0] for s in inst.solutions], dtype=float).reshape(-1, inst.n1)
    Y = np.array([s[1] for s in inst.solutions], dtype=float).reshape(-1, inst.n2)
    G = np.array([s[2] for s in inst.solutions])
    H = np.array([s[3] for s in inst.solutions]).reshape(-1, inst.m)
    k = G.size

    def make_block(c):
        # one selector per listed solution; x must match the selected row
        A_x = np.vstack([np.zeros((1, inst.n1)), -np.eye(inst.n1)])
        A_v = np.vstack([np.ones((1, k)), X.T])
        return Block(lb=np.zeros(k), ub=np.ones(k), binary=np.ones(k, dtype=bool),
                     A_x=A_x, A_v=A_v, senses=[EQ] * (1 + inst.n1),
                     rhs=np.concatenate([[1.0], np.zeros(inst.n1)]),
                     cost_x=np.zeros(inst.n1), cost_v=G + H @ c, const=0.0,
                     extract_y=lambda v: np.round(np.round(v) @ Y))

    return LinearEncoding(inst.n1, (np.zeros((0, inst.n1)), [], np.zeros(0)), make_block)


def explicit_problem(inst: ExplicitInstance) -> ProblemSpec:
    table = {(x, y): (g, np.array(h)) for x, y, g, h in inst.solutions}
    xs = {x for x, _, _, _ in inst.solutions}

    def objective(x, y):
        key = (tuple(int(v) for v in x), tuple(int(v) for v in y))
        if key not in table:
            raise ValueError(f"{key} is not a listed solution")
        return table[key]

    def enumerate_chunks():
        order = list(dict.fromkeys(x for x, _, _, _ in inst.solutions))
        for x in order:
            rows = [s for s in inst.solutions if s[0] == x]
            yield (np.array(x, dtype=int), np.array([s[1] for s in rows], dtype=int).reshape(-1, inst.n2),
                   np.array([s[2] for s in rows]), np.array([s[3] for s in rows]).reshape(-1, inst.m))

    return ProblemSpec(
        n1=inst.n1, n2=inst.n2, m=inst.m, sense=inst.sense,
        objective=objective,
        first_stage_feasible=lambda x: tuple(int(v) for v in x) in xs,
        full_feasible=lambda x, y: (tuple(int(v) for v in x), tuple(int(v) for v in y)) in table,
        binary_first_stage=len(xs) == 2 ** inst.n1,
        encoding=_encoding(inst),
        enumerate=enumerate_chunks,
        name=inst.name,
    )


def toy_t1() -> ExplicitInstance:
    """One first-stage and one second-stage bit, scenario ``c in [0, 1]``.

    ======  =====  ===  ===
    z       (x,y)  g    h
    ======  =====  ===  ===
    z1      (0,0)  2    0
    z2      (0,1)  0    3
    z3      (1,0)  1.5  0
    z4      (1,1)  0.5  1
    ======  =====  ===  ===

    The two-stage optimum is 1.5 at ``x = 1``; the root bound is already exact.
    """
    sols = (((0,), (0,), 2.0, (0.0,)),
            ((0,), (1,), 0.0, (3.0,)),
            ((1,), (0,), 1.5, (0.0,)),
            ((1,), (1,), 0.5, (1.0,)))
    return ExplicitInstance(1, 1, 1, sols, UncertaintySet.box([0.0], [1.0]), name="t1")


def toy_t2() -> ExplicitInstance:
    """Instance whose root bound is strictly below the optimum.

    ``f(x=0) = c`` and ``f(x=1) = 1 - c`` on ``c in [0, 1]``: both first-stage
    choices cost 1 in the worst case while the bound is ``max_c min(c, 1-c) = 0.5``.
    """
    sols = (((0,), (0,), 0.0, (1.0,)),
            ((1,), (0,), 1.0, (-1.0,)))
    return ExplicitInstance(1, 1, 1, sols, UncertaintySet.box([0.0], [1.0]), name="t2")


BUILTIN = {"t1": toy_t1, "t2": toy_t2}


def random_explicit(rng: np.random.Generator, n1: int = 2, n2: int = 2, m: int = 2,
                    n_solutions: int | None = None, name: str = "explicit") -> ExplicitInstance:
    """Random listed-solution instance under a random budgeted set."""
    total = 2 ** (n1 + n2)
    k = n_solutions or int(rng.integers(2, min(total, 24) + 1))
    k = min(k, total)
    codes = rng.choice(total, size=k, replace=False)
    sols = []
    for code in codes:
        bits = [(int(code) >> j) & 1 for j in range(n1 + n2)]
        g = float(np.round(rng.uniform(0.0, 5.0), 3))
        h = np.round(rng.uniform(-1.0, 3.0, size=m), 3)
        sols.append((bits[:n1], bits[n1:], g, h))
    c_bar = np.round(rng.uniform(0.0, 2.0, size=m), 3)
    dev = np.round(rng.uniform(0.0, 2.0, size=m), 3)
    gamma = float(np.round(rng.uniform(0.0, m), 2))
    return ExplicitInstance(n1, n2, m, tuple(sols), UncertaintySet.budgeted(c_bar, dev, gamma), name=name)
