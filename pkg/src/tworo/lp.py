"""Dense bounded-variable primal simplex.

Small LPs only: the adversarial master problems, the convex-combination LP
and the node relaxations of :mod:`tworo.mip`.  Problems are stated in
maximization form::

    max  c @ x
    s.t. A[i] @ x  (<=, =, >=)  b[i]
         lb <= x <= ub          (infinite bounds allowed)

The solver works on a full tableau with a two-phase start.  Pricing is
Dantzig's rule until 500 degenerate pivots have been seen, then Bland's rule
takes over so the method cannot cycle.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

FEAS_TOL = 1e-7
OPT_TOL = 1e-9
PIVOT_TOL = 1e-9
BLAND_AFTER = 500
REFACTOR_EVERY = 100

LE, EQ, GE = "<=", "=", ">="


class LpStatus(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    STALLED = "stalled"


@dataclass
class LpProblem:
    c: np.ndarray
    A: np.ndarray
    senses: list
    b: np.ndarray
    lb: np.ndarray | None = None
    ub: np.ndarray | None = None

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float).ravel()
        n = self.c.size
        self.A = np.asarray(self.A, dtype=float).reshape(-1, n)
        self.b = np.asarray(self.b, dtype=float).ravel()
        self.senses = list(self.senses)
        m = self.A.shape[0]
        self.lb = np.zeros(n) if self.lb is None else np.asarray(self.lb, dtype=float).ravel().copy()
        self.ub = np.full(n, np.inf) if self.ub is None else np.asarray(self.ub, dtype=float).ravel().copy()
        if self.b.size != m or len(self.senses) != m:
            raise ValueError(f"{m} constraint rows but {self.b.size} rhs values and {len(self.senses)} senses")
        if self.lb.size != n or self.ub.size != n:
            raise ValueError("bound vectors must match the number of variables")
        if any(s not in (LE, EQ, GE) for s in self.senses):
            raise ValueError(f"unknown constraint sense in {set(self.senses)}")
        for name in ("c", "A", "b", "lb", "ub"):
            if np.isnan(getattr(self, name)).any():
                raise ValueError(f"NaN in {name}")
        if np.isinf(self.c).any() or np.isinf(self.A).any() or np.isinf(self.b).any():
            raise ValueError("objective, matrix and rhs must be finite")

    @property
    def shape(self):
        return self.A.shape


@dataclass
class LpResult:
    status: LpStatus
    x: np.ndarray | None = None
    objective: float = float("nan")
    duals: np.ndarray | None = None
    reduced_costs: np.ndarray | None = None
    iterations: int = 0

    @property
    def optimal(self) -> bool:
        return self.status is LpStatus.OPTIMAL


class _Tableau:
    """Working state of the simplex method (minimization form)."""

    def __init__(self, A, b, lo, hi, basis, x):
        self.A = A
        self.b = b
        self.lo = lo
        self.hi = hi
        self.basis = basis
        self.x = x
        self.is_basic = np.zeros(A.shape[1], dtype=bool)
        self.is_basic[basis] = True
        self.iterations = 0
        self.degenerate = 0
        self.refactor()

    def refactor(self):
        B = self.A[:, self.basis]
        nonbasic = ~self.is_basic
        rhs = self.b - self.A[:, nonbasic] @ self.x[nonbasic]
        if self.basis.size:
            self.T = np.linalg.solve(B, self.A)
            self.x[self.basis] = np.linalg.solve(B, rhs)
        else:
            self.T = np.zeros((0, self.A.shape[1]))

    def run(self, cost, max_iter):
        """Primal simplex on ``min cost @ x`` from the current basic feasible point."""
        T = self.T
        d = cost - cost[self.basis] @ T
        fixed = self.lo == self.hi
        since_refactor = 0
        while True:
            if self.iterations >= max_iter:
                return LpStatus.STALLED
            bland = self.degenerate >= BLAND_AFTER
            can_up = (self.x < self.hi) & (d < -OPT_TOL)
            can_down = (self.x > self.lo) & (d > OPT_TOL)
            score = np.where(can_up | can_down, np.abs(d), 0.0)
            score[self.is_basic | fixed] = 0.0
            if not score.any():
                return LpStatus.OPTIMAL
            q = int(np.flatnonzero(score)[0]) if bland else int(np.argmax(score))
            direction = 1.0 if d[q] < 0 else -1.0

            col = direction * T[:, q]
            beta = self.x[self.basis]
            lo_b = self.lo[self.basis]
            hi_b = self.hi[self.basis]
            ratios = np.full(col.size, np.inf)
            dec = col > PIVOT_TOL
            inc = col < -PIVOT_TOL
            with np.errstate(invalid="ignore"):
                ratios[dec] = (beta[dec] - lo_b[dec]) / col[dec]
                ratios[inc] = (hi_b[inc] - beta[inc]) / -col[inc]
            ratios = np.maximum(np.nan_to_num(ratios, nan=np.inf, posinf=np.inf), 0.0)
            theta = ratios.min() if ratios.size else np.inf
            span = self.hi[q] - self.lo[q]
            if not np.isfinite(theta) and not np.isfinite(span):
                return LpStatus.UNBOUNDED
            self.iterations += 1

            if span <= theta:
                # entering variable runs to its opposite bound, basis unchanged
                self.x[q] = self.hi[q] if direction > 0 else self.lo[q]
                self.x[self.basis] = beta - span * col
                continue

            ties = np.flatnonzero(ratios <= theta + 1e-12)
            if bland:
                r = int(ties[np.argmin(self.basis[ties])])
            else:
                r = int(ties[np.argmax(np.abs(col[ties]))])
            if theta < 1e-12:
                self.degenerate += 1
            leaving = self.basis[r]
            self.x[self.basis] = beta - theta * col
            self.x[leaving] = self.lo[leaving] if col[r] > 0 else self.hi[leaving]
            self.x[q] = self.x[q] + direction * theta

            pivot_row = T[r] / T[r, q]
            pivot_col = T[:, q].copy()
            pivot_col[r] = 0.0
            T -= np.outer(pivot_col, pivot_row)
            T[r] = pivot_row
            d = d - d[q] * pivot_row
            self.basis[r] = q
            self.is_basic[leaving] = False
            self.is_basic[q] = True

            since_refactor += 1
            if since_refactor >= REFACTOR_EVERY:
                since_refactor = 0
                self.refactor()
                T = self.T
                d = cost - cost[self.basis] @ T


def solve_lp(p: LpProblem, max_iter: int = 50_000) -> LpResult:
    """Solve ``p`` to optimality, or report infeasibility, unboundedness or a stall."""
    m, n = p.shape
    lb, ub = p.lb, p.ub
    if (lb > ub + FEAS_TOL).any() or (lb == np.inf).any() or (ub == -np.inf).any():
        return LpResult(LpStatus.INFEASIBLE)

    senses = np.array(p.senses, dtype=object)
    ineq = np.flatnonzero(senses != EQ)
    n_slack = ineq.size

    x0 = np.where(np.isfinite(lb), lb, np.where(np.isfinite(ub), ub, 0.0))
    resid = p.b - p.A @ x0

    # columns: structural | slacks (coefficient +1) | artificials
    slack_lo = np.where(senses[ineq] == LE, 0.0, -np.inf)
    slack_hi = np.where(senses[ineq] == LE, np.inf, 0.0)
    slack_of_row = np.full(m, -1)
    slack_of_row[ineq] = n + np.arange(n_slack)

    basis = np.empty(m, dtype=int)
    art_rows, art_signs = [], []
    for i in range(m):
        s = slack_of_row[i]
        if s >= 0 and ((senses[i] == LE and resid[i] >= 0) or (senses[i] == GE and resid[i] <= 0)):
            basis[i] = s
        else:
            art_rows.append(i)
            art_signs.append(1.0 if resid[i] >= 0 else -1.0)
    n_art = len(art_rows)
    N = n + n_slack + n_art

    A = np.zeros((m, N))
    A[:, :n] = p.A
    A[ineq, n + np.arange(n_slack)] = 1.0
    for k, (i, sgn) in enumerate(zip(art_rows, art_signs)):
        A[i, n + n_slack + k] = sgn
        basis[i] = n + n_slack + k
    lo = np.concatenate([lb, slack_lo, np.zeros(n_art)])
    hi = np.concatenate([ub, slack_hi, np.full(n_art, np.inf)])
    x = np.concatenate([x0, np.zeros(n_slack + n_art)])

    tab = _Tableau(A, p.b, lo, hi, basis, x)
    scale = 1.0 + np.abs(p.b).max(initial=0.0)

    if n_art:
        cost1 = np.zeros(N)
        cost1[n + n_slack:] = 1.0
        status = tab.run(cost1, max_iter)
        if status is LpStatus.STALLED:
            return LpResult(status, iterations=tab.iterations)
        if tab.x[n + n_slack:].sum() > FEAS_TOL * scale:
            return LpResult(LpStatus.INFEASIBLE, iterations=tab.iterations)
        tab.hi[n + n_slack:] = 0.0
        tab.x[n + n_slack:] = np.clip(tab.x[n + n_slack:], 0.0, 0.0)
        tab.refactor()

    cost = np.zeros(N)
    cost[:n] = -p.c
    status = tab.run(cost, max_iter)
    if status is not LpStatus.OPTIMAL:
        return LpResult(status, iterations=tab.iterations)

    tab.refactor()
    xs = tab.x[:n].copy()
    viol = np.maximum(lb - xs, xs - ub)
    if viol.max(initial=0.0) > FEAS_TOL * scale:
        return LpResult(LpStatus.STALLED, iterations=tab.iterations)
    xs = np.clip(xs, lb, ub)

    B = A[:, tab.basis]
    y_min = np.linalg.solve(B.T, cost[tab.basis]) if m else np.zeros(0)
    duals = -y_min  # duals of the maximization problem
    reduced = p.c - p.A.T @ duals
    return LpResult(LpStatus.OPTIMAL, xs, float(p.c @ xs), duals, reduced, tab.iterations)


def dual_bound(p: LpProblem, duals: np.ndarray, tol: float = 1e-9) -> float:
    """Objective of the Lagrangian dual at ``duals``; an upper bound when signs are valid.

    Reduced costs below ``tol`` in magnitude are treated as zero.
    """
    reduced = p.c - p.A.T @ duals
    reduced[np.abs(reduced) <= tol * (1.0 + np.abs(p.c))] = 0.0
    with np.errstate(invalid="ignore"):
        up = np.where(reduced > 0, reduced * p.ub, 0.0)
        down = np.where(reduced < 0, reduced * p.lb, 0.0)
    return float(p.b @ duals + np.nansum(up) + np.nansum(down))
