"""Column-and-constraint generation.

The master keeps one copy of the recourse variables per scenario found so far
and minimizes the worst of the copies over the first stage.  Its value is a
lower bound; the exact value of its first stage, computed by column
generation under full fixation, is an upper bound and also provides the next
scenario.
"""
from __future__ import annotations

import heapq
import itertools
import time
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .cg import SolutionPool, evaluate_first_stage
from .counters import Counters
from .lp import LE, LpProblem, LpStatus, solve_lp
from .mip import INT_TOL, MipProblem, MipStatus, solve_mip
from .model import Oracle, ProblemSpec, Sense, UncertaintySet, nominal_scenario
from .report import RunReport, fill_counters, policy_entries, relative_gap, to_sense

EPS_GAP = 1e-6
SCENARIO_TOL = 1e-9


class UnsupportedProblem(ValueError):
    """The problem has no linear encoding of its feasible set."""


@dataclass
class CcgConfig:
    eps_gap: float = EPS_GAP
    max_iterations: int = 50
    node_limit: Optional[int] = None
    time_limit: Optional[float] = None


def build_master(spec: ProblemSpec, scenarios) -> tuple[MipProblem, list]:
    """Variables ``(x, mu, v^1, ..., v^l)``; maximizes ``-mu``.

    Returns the MIP and the per-scenario blocks with their column offsets.
    """
    enc = spec.encoding
    if enc is None:
        raise UnsupportedProblem(f"problem {spec.name!r} has no linear encoding")
    if not len(scenarios):
        raise ValueError("the master needs at least one scenario")
    n1 = spec.n1
    blocks = [enc.block(c) for c in scenarios]
    offsets = np.cumsum([n1 + 1] + [b.size for b in blocks])
    nv = int(offsets[-1])
    A1, s1, b1 = enc.first_rows
    rows, senses, rhs = [], [], []
    if A1.shape[0]:
        rows.append(np.hstack([A1, np.zeros((A1.shape[0], nv - n1))]))
        senses += list(s1)
        rhs.append(np.asarray(b1, dtype=float))
    lb = np.concatenate([np.zeros(n1), [-np.inf]] + [b.lb for b in blocks])
    ub = np.concatenate([np.ones(n1), [np.inf]] + [b.ub for b in blocks])
    bins = [np.arange(n1)]
    placed = []
    for blk, off in zip(blocks, offsets[:-1]):
        k = blk.A_v.shape[0]
        R = np.zeros((k + 1, nv))
        R[:k, :n1] = blk.A_x
        R[:k, off:off + blk.size] = blk.A_v
        # cost of this copy stays below mu
        R[k, :n1] = blk.cost_x
        R[k, n1] = -1.0
        R[k, off:off + blk.size] = blk.cost_v
        rows.append(R)
        senses += list(blk.senses) + [LE]
        rhs.append(np.concatenate([blk.rhs, [-blk.const]]))
        bins.append(off + np.flatnonzero(blk.binary))
        placed.append((blk, int(off)))
    c = np.zeros(nv)
    c[n1] = -1.0
    lp = LpProblem(c, np.vstack(rows), senses, np.concatenate(rhs), lb, ub)
    return MipProblem(lp, np.concatenate(bins)), placed


@dataclass
class MasterResult:
    status: MipStatus
    mu: float
    x: Optional[tuple]
    ys: list
    nodes: int


def _block_value(blk, x: np.ndarray, node_limit, time_limit):
    """``min cost_v v + cost_x x + const`` over one recourse copy with ``x`` fixed."""
    lp = LpProblem(-blk.cost_v, blk.A_v, list(blk.senses), blk.rhs - blk.A_x @ x, blk.lb, blk.ub)
    res = solve_mip(MipProblem(lp, np.flatnonzero(blk.binary)), node_limit, time_limit)
    if res.status is MipStatus.INFEASIBLE:
        return np.inf, None
    if res.status is not MipStatus.OPTIMAL:
        return None, None
    return float(blk.cost_x @ x) + blk.const - res.objective, res.x


def solve_master(spec: ProblemSpec, scenarios, node_limit: Optional[int] = None,
                 time_limit: Optional[float] = None, eps: float = EPS_GAP) -> MasterResult:
    """Exact master optimum by branching on the first stage only.

    Nodes are bounded by the LP relaxation of :func:`build_master`.  Once the
    first stage is fixed the copies decouple, and each is solved as its own
    small MIP; the master value at that ``x`` is the largest copy value.
    """
    start = time.monotonic()
    mip, placed = build_master(spec, scenarios)
    lp, n1 = mip.lp, spec.n1
    seq = itertools.count()
    nodes = 0
    leaves: dict = {}
    best = MasterResult(MipStatus.INFEASIBLE, np.inf, None, [], 0)

    def out_of_budget():
        return (node_limit is not None and nodes >= node_limit) or \
            (time_limit is not None and time.monotonic() - start > time_limit)

    def relax(lo, hi):
        nonlocal nodes
        nodes += 1
        lb, ub = lp.lb.copy(), lp.ub.copy()
        lb[:n1], ub[:n1] = lo, hi
        res = solve_lp(LpProblem(lp.c, lp.A, lp.senses, lp.b, lb, ub))
        if res.status in (LpStatus.UNBOUNDED, LpStatus.STALLED):
            raise RuntimeError(f"master relaxation ended with status {res.status.value}")
        return res

    def leaf(x: tuple):
        nonlocal best
        if x in leaves:
            return
        xv = np.array(x, dtype=float)
        mu, ys = -np.inf, []
        for blk, _ in placed:
            value, v = _block_value(blk, xv, node_limit, None)
            if value is None:
                raise RuntimeError("recourse MIP hit its node limit")
            if v is None:
                mu = np.inf
                break
            mu = max(mu, value)
            ys.append(blk.extract_y(v))
        leaves[x] = mu
        if mu < best.mu:
            best = MasterResult(MipStatus.OPTIMAL, mu, x, ys, nodes)

    heap = []

    def consider(lo, hi):
        res = relax(lo, hi)
        if not res.optimal:
            return
        bound = -res.objective
        xr = res.x[:n1]
        frac = np.abs(xr - np.round(xr))
        if frac.max(initial=0.0) <= INT_TOL:
            xi = tuple(int(v) for v in np.round(xr))
            if spec.first_stage_feasible(np.array(xi)):
                leaf(xi)
        if bound < best.mu - eps:
            heapq.heappush(heap, (bound, next(seq), lo, hi, xr))

    consider(np.zeros(n1), np.ones(n1))
    status = MipStatus.OPTIMAL
    while heap:
        bound, _, lo, hi, xr = heapq.heappop(heap)
        if bound >= best.mu - eps:
            break
        if out_of_budget():
            status = MipStatus.LIMIT_REACHED
            break
        free = np.flatnonzero(lo != hi)
        if not free.size:
            continue
        dist = np.abs(xr[free] - 0.5)
        j = int(free[np.argmin(dist)])
        for v in (0.0, 1.0):
            clo, chi = lo.copy(), hi.copy()
            clo[j] = chi[j] = v
            consider(clo, chi)
    if best.x is None:
        return MasterResult(status if status is not MipStatus.OPTIMAL else MipStatus.INFEASIBLE,
                            np.inf, None, [], nodes)
    return MasterResult(status, best.mu, best.x, best.ys, nodes)


def solve_ccg(spec: ProblemSpec, U: UncertaintySet, oracle: Oracle,
              config: Optional[CcgConfig] = None) -> RunReport:
    config = config or CcgConfig()
    if spec.sense is not Sense.MINIMIZE:
        raise ValueError("solve_ccg expects a canonical (minimization) spec")
    start = time.monotonic()
    counters = Counters()
    sign = spec.sign
    report = RunReport("ccg", spec.name, "maximize" if spec.negated else "minimize", "optimal")
    scenarios = [nominal_scenario(U)]
    best_x, best_val, best_pool = None, np.inf, SolutionPool()
    phi_cache = {}
    lb_hist = []
    status = "optimal"
    mu = -np.inf

    while True:
        remaining = None
        if config.time_limit is not None:
            remaining = config.time_limit - (time.monotonic() - start)
            if remaining <= 0:
                status = "limit_reached"
                break
        counters.ccg_iteration()
        res = solve_master(spec, scenarios, config.node_limit, remaining, config.eps_gap)
        if res.status is MipStatus.INFEASIBLE:
            status = "infeasible"
            break
        if res.status is not MipStatus.OPTIMAL:
            status = "limit_reached"
            break
        mu = res.mu
        if lb_hist and mu < lb_hist[-1] - 1e-6 * (1.0 + abs(mu)):
            raise AssertionError(f"master value decreased from {lb_hist[-1]:g} to {mu:g}")
        lb_hist.append(mu)
        x = res.x
        if x not in phi_cache:
            phi_cache[x] = evaluate_first_stage(x, spec, U, oracle, counters=counters)
        phi = phi_cache[x]
        if phi.mu_star < best_val:
            best_x, best_val = x, phi.mu_star
        report.lb_history.append(to_sense(sign, mu))
        report.ub_history.append(to_sense(sign, best_val))
        if mu > best_val + 1e-6 * (1.0 + abs(mu)):
            raise AssertionError(f"master value {mu:g} exceeds an upper bound {best_val:g}")
        if mu >= phi.mu_star - config.eps_gap:
            best_x, best_val = x, phi.mu_star
            best_pool = SolutionPool(spec.solution(x, y) for y in res.ys)
            break
        c_new = phi.c_star
        if any(np.abs(c_new - c).max() <= SCENARIO_TOL for c in scenarios):
            raise RuntimeError("worst-case scenario repeated without closing the gap")
        scenarios.append(c_new)
        if len(scenarios) > config.max_iterations:
            status = "limit_reached"
            break

    report.status = status if (best_x is not None or status != "optimal") else "infeasible"
    report.value = to_sense(sign, best_val) if best_x is not None else None
    report.incumbent_x = list(best_x) if best_x is not None else None
    if status == "limit_reached" and best_x is not None:
        best_pool = phi_cache[best_x].pool
    report.policy = policy_entries(best_pool)
    report.n_solutions = len(best_pool)
    report.scenarios = [list(map(float, c)) for c in scenarios]
    if lb_hist:
        report.root_bound = to_sense(sign, lb_hist[0])
        report.best_bound = to_sense(sign, lb_hist[-1])
        if best_x is not None:
            report.root_gap = relative_gap(best_val, lb_hist[0])
            report.gap = relative_gap(best_val, lb_hist[-1])
    fill_counters(report, counters.snapshot())
    report.time_s = time.monotonic() - start
    return report
