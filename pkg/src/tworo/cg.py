"""Oracle-based column generation for the lower bound

    max_{c in U} min_{z in conv(Z)} f(z, c)

restricted by first-stage fixations.  A master LP picks the adversary's best
scenario against the current pool of solutions; the oracle answers with a
best response, which joins the pool until it no longer cuts the master.
All values are in the canonical (minimization) sense.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from .counters import Counters
from .lp import EQ, LE, LpProblem, solve_lp
from .model import (FixationSet, Oracle, ProblemSpec, Solution, UncertaintySet, evaluate,
                    nominal_scenario)
from .problems.encoding import OracleError

EPS_CG = 1e-6
EPS_SLACK = 1e-6
MAX_ITER = 10_000


class MasterError(RuntimeError):
    """The master LP did not reach an optimal solution."""


class SolutionPool:
    """Ordered set of distinct solutions."""

    def __init__(self, members: Iterable[Solution] = ()):
        self._members: list[Solution] = []
        self._keys: set = set()
        for z in members:
            self.add(z)

    def add(self, z: Solution) -> bool:
        if z.key in self._keys:
            return False
        self._members.append(z)
        self._keys.add(z.key)
        return True

    def __contains__(self, z: Solution) -> bool:
        return z.key in self._keys

    def __iter__(self):
        return iter(self._members)

    def __len__(self) -> int:
        return len(self._members)

    def __getitem__(self, i) -> Solution:
        return self._members[i]

    def __repr__(self):
        return f"SolutionPool({self._members!r})"

    @property
    def members(self) -> tuple:
        return tuple(self._members)

    def filter(self, fix: FixationSet) -> "SolutionPool":
        return SolutionPool(z for z in self._members if fix.admits(z.x))

    def G(self) -> np.ndarray:
        return np.array([z.g for z in self._members])

    def H(self) -> np.ndarray:
        return np.array([z.h for z in self._members])

    def X(self) -> np.ndarray:
        return np.array([z.x for z in self._members], dtype=float)

    def values(self, c) -> np.ndarray:
        return self.G() + self.H() @ np.asarray(c, dtype=float)


@dataclass
class LowerBoundResult:
    mu_star: float
    c_star: Optional[np.ndarray]
    pool: SolutionPool
    iterations: int
    oracle_calls: int
    feasible: bool = True
    mu_history: list = field(default_factory=list)


def solve_master(pool: SolutionPool, U: UncertaintySet):
    """``(mu*, c*, slacks)`` for ``max_{c in U} min_{z in pool} f(z, c)``."""
    if not len(pool):
        raise ValueError("master needs a nonempty pool")
    G, H = pool.G(), pool.H()
    k, p = G.size, U.p
    # variables (mu, delta); rows mu - (P^T h_z) . delta <= g_z + c_bar . h_z
    A = np.vstack([np.hstack([np.ones((k, 1)), -(H @ U.P)]),
                   np.hstack([np.zeros((U.A.shape[0], 1)), U.A])])
    b = np.concatenate([G + H @ U.c_bar, U.b])
    c = np.zeros(p + 1)
    c[0] = 1.0
    lb = np.concatenate([[-np.inf], U.delta_lower])
    ub = np.concatenate([[np.inf], U.delta_upper])
    res = solve_lp(LpProblem(c, A, [LE] * A.shape[0], b, lb, ub))
    if not res.optimal:
        raise MasterError(f"master LP ended with status {res.status.value}")
    c_star = U.scenario(res.x[1:])
    values = G + H @ c_star
    mu = float(values.min())
    # report the exact inner minimum at c*, which agrees with the LP value up to tolerance
    if abs(mu - res.objective) > 1e-6 * (1.0 + abs(mu)):
        raise MasterError(f"master value {res.objective:g} disagrees with pool minimum {mu:g}")
    return mu, c_star, values - mu


def purge_nonbinding(pool: SolutionPool, c_star, mu_star: float, eps: float = EPS_SLACK) -> SolutionPool:
    kept = SolutionPool(z for z in pool if evaluate(z, c_star) <= mu_star + eps)
    assert len(kept), "master optimum must bind at least one pool member"
    return kept


def lower_bound(spec: ProblemSpec, U: UncertaintySet, oracle: Oracle,
                fix: FixationSet = FixationSet(), warm: Optional[Iterable[Solution]] = None,
                counters: Optional[Counters] = None, role: str = "lb",
                max_iter: int = MAX_ITER) -> LowerBoundResult:
    """Column generation bound under ``fix``, warm-started from ``warm``."""
    counters = counters if counters is not None else Counters()
    pool = SolutionPool()
    for z in warm or ():
        if not fix.admits(z.x):
            raise ValueError(f"warm-start member {z} violates the fixations")
        pool.add(z)
    calls = iterations = 0

    def ask(c):
        nonlocal calls
        calls += 1
        counters.oracle_call()
        z = oracle.solve(c, fix)
        if z is not None and not fix.admits(z.x):
            raise OracleError(f"oracle returned {z} violating the fixations")
        return z

    if not len(pool):
        z0 = ask(nominal_scenario(U))
        if z0 is None:
            counters.loop_done(role, iterations, calls)
            return LowerBoundResult(np.inf, None, pool, iterations, calls, feasible=False)
        pool.add(z0)

    history = []
    while True:
        if iterations >= max_iter:
            raise RuntimeError(f"column generation exceeded {max_iter} iterations")
        mu, c_star, _ = solve_master(pool, U)
        counters.master_solve()
        iterations += 1
        if history and mu > history[-1] + EPS_CG * (1.0 + abs(mu)):
            raise MasterError(f"master value increased from {history[-1]:g} to {mu:g}")
        history.append(mu)
        z = ask(c_star)
        if z is None:
            raise OracleError("oracle reported infeasibility although the pool is feasible")
        if evaluate(z, c_star) >= mu - EPS_CG:
            pool.add(z)
            break
        if z in pool:
            raise OracleError(f"oracle returned pool member {z} below the master value")
        pool.add(z)

    counters.loop_done(role, iterations, calls)
    return LowerBoundResult(mu, c_star, purge_nonbinding(pool, c_star, mu), iterations, calls,
                            mu_history=history)


def average_first_stage(pool: SolutionPool) -> np.ndarray:
    """Fraction of pool members with ``x_i = 1``."""
    if not len(pool):
        raise ValueError("empty pool")
    return pool.X().mean(axis=0)


def optimal_convex_combination(pool: SolutionPool, U: UncertaintySet):
    """``(lambda, x_bar, value)`` minimizing ``max_{c in U} sum_z lambda_z f(z, c)``.

    The inner maximum is replaced by its LP dual.
    """
    if not len(pool):
        raise ValueError("empty pool")
    G, H = pool.G(), pool.H()
    k, p, r = G.size, U.p, U.A.shape[0]
    # variables (lambda: k, pi: r, rho_plus: p, rho_minus: p), all non-negative
    cost = np.concatenate([G + H @ U.c_bar, U.b, U.delta_upper, -U.delta_lower])
    balance = np.hstack([-(H @ U.P).T, U.A.T, np.eye(p), -np.eye(p)])
    convex = np.concatenate([np.ones(k), np.zeros(r + 2 * p)])[None, :]
    A = np.vstack([balance, convex])
    b = np.concatenate([np.zeros(p), [1.0]])
    res = solve_lp(LpProblem(-cost, A, [EQ] * (p + 1), b))
    if not res.optimal:
        raise MasterError(f"convex-combination LP ended with status {res.status.value}")
    lam = np.clip(res.x[:k], 0.0, None)
    lam /= lam.sum()
    return lam, lam @ pool.X(), -res.objective


def evaluate_first_stage(x, spec: ProblemSpec, U: UncertaintySet, oracle: Oracle,
                         warm: Optional[Iterable[Solution]] = None,
                         counters: Optional[Counters] = None) -> LowerBoundResult:
    """Exact worst-case value of a fixed first stage: the bound under full fixation."""
    x = np.asarray(x).round().astype(int)
    if x.shape != (spec.n1,) or not spec.first_stage_feasible(x):
        raise ValueError(f"first stage {x.tolist()} is not feasible")
    res = lower_bound(spec, U, oracle, FixationSet.full(x), warm, counters, role="ub")
    if not res.feasible:
        raise OracleError(f"no recourse for feasible first stage {x.tolist()}")
    return res
