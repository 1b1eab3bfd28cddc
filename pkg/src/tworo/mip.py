"""Best-first branch & bound for LPs with binary variables (maximization)."""
from __future__ import annotations

import enum
import heapq
import itertools
import time
from dataclasses import dataclass

import numpy as np

from .lp import LpProblem, LpStatus, solve_lp

EPS_GAP = 1e-6
INT_TOL = 1e-6


class MipStatus(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    LIMIT_REACHED = "limit_reached"


class MipError(RuntimeError):
    """The relaxation is unbounded or the LP solver stalled."""


@dataclass
class MipProblem:
    lp: LpProblem
    binaries: np.ndarray

    def __post_init__(self):
        self.binaries = np.asarray(self.binaries, dtype=int).ravel()
        n = self.lp.c.size
        if self.binaries.size and (self.binaries.min() < 0 or self.binaries.max() >= n):
            raise ValueError("binary index out of range")
        lb, ub = self.lp.lb[self.binaries], self.lp.ub[self.binaries]
        if (lb < 0).any() or (ub > 1).any():
            raise ValueError("binary variables must carry bounds within [0, 1]")


@dataclass
class MipResult:
    status: MipStatus
    x: np.ndarray | None
    objective: float
    nodes: int
    best_bound: float

    @property
    def gap(self) -> float:
        return self.best_bound - self.objective

    @property
    def optimal(self) -> bool:
        return self.status is MipStatus.OPTIMAL


def _branch_index(values: np.ndarray) -> int:
    """Most fractional binary, ties to the lowest index; -1 when all are integral."""
    frac = np.abs(values - np.round(values))
    if frac.max(initial=0.0) <= INT_TOL:
        return -1
    dist = np.abs(values - 0.5)
    dist[frac <= INT_TOL] = np.inf
    return int(np.argmin(dist))


def solve_mip(p: MipProblem, node_limit: int | None = None, time_limit: float | None = None,
              gap: float = EPS_GAP) -> MipResult:
    start = time.monotonic()
    bins = p.binaries
    lb0, ub0 = np.ceil(p.lp.lb[bins] - INT_TOL), np.floor(p.lp.ub[bins] + INT_TOL)
    counter = itertools.count()
    nodes = 0
    incumbent, inc_value = None, -np.inf

    def relax(lb, ub):
        nonlocal nodes
        nodes += 1
        lp_lb, lp_ub = p.lp.lb.copy(), p.lp.ub.copy()
        lp_lb[bins], lp_ub[bins] = lb, ub
        res = solve_lp(LpProblem(p.lp.c, p.lp.A, p.lp.senses, p.lp.b, lp_lb, lp_ub))
        if res.status is LpStatus.UNBOUNDED:
            raise MipError("LP relaxation is unbounded")
        if res.status is LpStatus.STALLED:
            raise MipError("LP solver stalled")
        return res

    heap = []

    def consider(lb, ub, depth):
        nonlocal incumbent, inc_value
        assert depth <= bins.size + 1
        res = relax(lb, ub)
        if not res.optimal:
            return
        j = _branch_index(res.x[bins])
        if j < 0:
            if res.objective > inc_value:
                x = res.x.copy()
                x[bins] = np.round(x[bins])
                incumbent, inc_value = x, res.objective
            return
        if res.objective > inc_value + gap:
            heapq.heappush(heap, (-res.objective, next(counter), lb, ub, depth, res.x[bins][j], j))

    consider(lb0, ub0, 0)
    if incumbent is None and not heap:
        return MipResult(MipStatus.INFEASIBLE, None, -np.inf, nodes, -np.inf)

    best_bound = np.inf
    status = MipStatus.OPTIMAL
    while heap:
        bound = -heap[0][0]
        open_bound = max(bound, inc_value)
        assert open_bound <= best_bound + 1e-9 * (1.0 + abs(best_bound)), "best bound increased"
        best_bound = open_bound
        if bound <= inc_value + gap:
            break
        if (node_limit is not None and nodes >= node_limit) or \
                (time_limit is not None and time.monotonic() - start > time_limit):
            status = MipStatus.LIMIT_REACHED
            break
        _, _, lb, ub, depth, _, j = heapq.heappop(heap)
        for v in (0.0, 1.0):
            clb, cub = lb.copy(), ub.copy()
            clb[j] = cub[j] = v
            consider(clb, cub, depth + 1)

    if status is MipStatus.OPTIMAL:
        best_bound = inc_value
    elif heap:
        best_bound = max(-heap[0][0], inc_value)
    if incumbent is None:
        if status is MipStatus.OPTIMAL:
            return MipResult(MipStatus.INFEASIBLE, None, -np.inf, nodes, -np.inf)
        return MipResult(status, None, -np.inf, nodes, best_bound)
    return MipResult(status, incumbent, float(inc_value), nodes, float(best_bound))
