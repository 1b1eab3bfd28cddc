"""Branch & bound over the first-stage variables.

Every node fixes some first-stage entries and bounds the rest of the tree by
column generation.  Nodes are processed best-first (smallest bound, FIFO on
ties).  Children are bounded as soon as they are created, warm-started from
the parent pool members that satisfy their fixations.
"""
from __future__ import annotations

import heapq
import itertools
import time
from collections import Counter as Multiset
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .cg import (SolutionPool, average_first_stage, evaluate_first_stage,
                 lower_bound, optimal_convex_combination)
from .counters import Counters
from .model import FixationSet, Oracle, ProblemSpec, Sense, UncertaintySet
from .report import RunReport, fill_counters, policy_entries, relative_gap, to_sense

EPS_GAP = 1e-6
BOUND_TOL = 1e-6


@dataclass
class BnbConfig:
    branching: str = "avg"
    eps_gap: float = EPS_GAP
    node_limit: Optional[int] = None
    time_limit: Optional[float] = None
    rounding: bool = True
    incumbent_budget: int = 3
    threads: int = 1

    def __post_init__(self):
        if self.branching not in ("avg", "opt"):
            raise ValueError(f"branching must be 'avg' or 'opt', not {self.branching!r}")
        if not self.eps_gap > 0:
            raise ValueError("eps_gap must be positive")
        if self.threads < 1 or self.incumbent_budget < 1:
            raise ValueError("threads and incumbent budget must be at least 1")


@dataclass
class Node:
    fix: FixationSet
    bound: float
    pool: SolutionPool
    depth: int = 0
    parent_bound: float = -np.inf


def select_branch_var(x_bar, free_indices) -> int:
    """Free index with ``x_bar`` closest to 0.5, lowest index on ties."""
    free_indices = sorted(free_indices)
    if not free_indices:
        raise ValueError("no free first-stage index to branch on")
    x_bar = np.asarray(x_bar, dtype=float)
    dist = np.abs(x_bar[free_indices] - 0.5)
    return free_indices[int(np.argmin(dist))]


def warm_start_filter(parent_pool: SolutionPool, child_fix: FixationSet) -> SolutionPool:
    return parent_pool.filter(child_fix)


@dataclass
class Candidate:
    x: tuple
    value: float
    pool: SolutionPool


def make_incumbent(node: Node, x_bar, spec: ProblemSpec, U: UncertaintySet, oracle: Oracle,
                   config: BnbConfig, phi_cache: Optional[dict] = None,
                   counters: Optional[Counters] = None) -> Optional[Candidate]:
    """Best feasible first stage derivable at ``node``, with its exact value.

    A pool with a single first stage gives that stage at the node bound for
    free.  Otherwise ``x_bar`` is rounded; if the result is not feasible, the
    most frequent first stages of the pool (at most ``incumbent_budget``) are
    evaluated instead.  ``phi_cache`` maps first stages to evaluation results.
    """
    xs = {z.x for z in node.pool}
    if len(xs) == 1:
        return Candidate(next(iter(xs)), node.bound, node.pool)
    cache = phi_cache if phi_cache is not None else {}

    def phi(x):
        if x not in cache:
            warm = [z for z in node.pool if z.x == x]
            cache[x] = evaluate_first_stage(x, spec, U, oracle, warm, counters)
        return Candidate(x, cache[x].mu_star, cache[x].pool)

    if config.rounding:
        xr = tuple(int(v) for v in (np.asarray(x_bar) >= 0.5))
        if node.fix.admits(xr) and spec.first_stage_feasible(np.array(xr)):
            return phi(xr)
    # rounding left X: evaluate the most frequent first stages of the pool
    freq = Multiset(z.x for z in node.pool)
    ranked = sorted(freq, key=lambda x: -freq[x])[: config.incumbent_budget]
    return min((phi(x) for x in ranked), key=lambda cand: cand.value)


def solve_bnb(spec: ProblemSpec, U: UncertaintySet, oracle: Oracle,
              config: Optional[BnbConfig] = None) -> RunReport:
    """Exact two-stage optimum of a canonical (minimization) problem."""
    config = config or BnbConfig()
    if spec.sense is not Sense.MINIMIZE:
        raise ValueError("solve_bnb expects a canonical (minimization) spec")
    start = time.monotonic()
    counters = Counters()
    phi_cache: dict = {}
    best = Candidate(None, np.inf, SolutionPool())
    sign = spec.sign

    def bound_node(fix, warm):
        counters.node()
        return lower_bound(spec, U, oracle, fix, warm, counters, role="lb")

    def x_bar_of(pool):
        if config.branching == "opt":
            return optimal_convex_combination(pool, U)[1]
        return average_first_stage(pool)

    report = RunReport("bnb", spec.name, "maximize" if spec.negated else "minimize", "optimal",
                       branching=config.branching)

    root_res = bound_node(FixationSet(), None)
    if not root_res.feasible:
        report.status = "infeasible"
        fill_counters(report, counters.snapshot())
        report.time_s = time.monotonic() - start
        return report
    root = Node(FixationSet(), root_res.mu_star, root_res.pool)
    seq = itertools.count()
    heap = [(root.bound, next(seq), root)]
    eps = config.eps_gap
    pool_exec = ThreadPoolExecutor(config.threads) \
        if config.threads > 1 and getattr(oracle, "thread_safe", False) else None
    last_popped = -np.inf
    status = "optimal"

    try:
        while heap:
            bound, _, node = heap[0]
            if bound >= best.value - eps:
                break
            if (config.node_limit is not None and counters.nodes >= config.node_limit) or \
                    (config.time_limit is not None and time.monotonic() - start > config.time_limit):
                status = "limit_reached"
                break
            heapq.heappop(heap)
            # best-first: popped bounds never decrease
            assert bound >= last_popped - BOUND_TOL * (1.0 + abs(bound))
            last_popped = max(last_popped, bound)

            x_bar = None if len({z.x for z in node.pool}) == 1 else x_bar_of(node.pool)
            cand = make_incumbent(node, x_bar, spec, U, oracle, config, phi_cache, counters)
            if cand.value < best.value:
                best = cand
            report.lb_history.append(to_sense(sign, min([bound] + [b for b, _, _ in heap])))
            report.ub_history.append(to_sense(sign, best.value))
            if node.bound >= best.value - eps:
                continue
            free = node.fix.free(spec.n1)
            if not free or x_bar is None:
                continue
            j = select_branch_var(x_bar, free)
            fixes = [node.fix.fix(j, 0), node.fix.fix(j, 1)]
            warms = [warm_start_filter(node.pool, f) for f in fixes]
            if pool_exec is not None:
                results = list(pool_exec.map(bound_node, fixes, warms))
            else:
                results = [bound_node(f, w) for f, w in zip(fixes, warms)]
            for f, res in zip(fixes, results):
                if not res.feasible:
                    continue
                if res.mu_star < node.bound - BOUND_TOL * (1.0 + abs(node.bound)):
                    raise AssertionError(f"child bound {res.mu_star:g} below parent {node.bound:g}")
                if res.mu_star < best.value - eps:
                    child = Node(f, res.mu_star, res.pool, node.depth + 1, node.bound)
                    heapq.heappush(heap, (child.bound, next(seq), child))
    finally:
        if pool_exec is not None:
            pool_exec.shutdown()

    open_bound = min([b for b, _, _ in heap], default=np.inf)
    best_bound = min(open_bound, best.value)
    if best.x is None:
        status = "infeasible" if status == "optimal" else status
    report.status = status
    report.value = to_sense(sign, best.value)
    report.incumbent_x = list(best.x) if best.x is not None else None
    report.policy = policy_entries(best.pool)
    report.n_solutions = len(best.pool)
    report.root_bound = to_sense(sign, root.bound)
    report.best_bound = to_sense(sign, best_bound)
    report.root_gap = relative_gap(best.value, root.bound) if best.x is not None else None
    report.gap = relative_gap(best.value, best_bound) if best.x is not None else None
    fill_counters(report, counters.snapshot())
    report.time_s = time.monotonic() - start
    return report
