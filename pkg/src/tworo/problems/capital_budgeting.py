"""Two-stage capital budgeting with risk-factor uncertainty (a maximization problem).

Variables are ordered ``x = (x_1..x_n, x0)`` and ``y = (y_1..y_n, y0)`` where
``x0``/``y0`` take the first/second-stage loan.  The scenario ``xi`` lives in
the box ``[-1, 1]^m`` and scales profits as ``p_i(xi) = (1 + Q_i @ xi / 2) p_bar_i``.
The whole profit term, including deferred projects, is part of the recourse.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..lp import LE
from ..model import ProblemSpec, Sense, UncertaintySet, canonicalize
from .encoding import Block, EncodingOracle, EnumerationOracle, LinearEncoding


@dataclass(frozen=True, eq=False)
class CbInstance:
    cost: np.ndarray
    p_bar: np.ndarray
    Q: np.ndarray
    f_defer: float = 0.8
    budget: float = 0.0
    C1: float = 0.0
    C2: float = 0.0
    lambda_loan: float = 0.12
    mu_loan: float = 1.2
    name: str = "cb"

    def __post_init__(self):
        for key in ("cost", "p_bar", "Q"):
            object.__setattr__(self, key, np.array(getattr(self, key), dtype=float))
        n = self.cost.size
        object.__setattr__(self, "Q", self.Q.reshape(n, -1))
        if self.p_bar.shape != (n,):
            raise ValueError("p_bar must have one entry per project")
        if not 0.0 <= self.f_defer < 1.0:
            raise ValueError("deferral factor must lie in [0, 1)")
        if self.mu_loan <= 1.0:
            raise ValueError("second-stage loan premium must exceed 1")
        if (self.cost < 0).any() or min(self.budget, self.C1, self.C2, self.lambda_loan) < 0:
            raise ValueError("costs, budget and loans must be non-negative")

    @property
    def n(self) -> int:
        return self.cost.size

    @property
    def m(self) -> int:
        return self.Q.shape[1]

    @property
    def uncertainty(self) -> UncertaintySet:
        return UncertaintySet.box(-np.ones(self.m), np.ones(self.m))


def _split(v, n):
    v = np.asarray(v, dtype=float)
    return v[:n], float(v[n])


def first_stage_ok(x, inst: CbInstance) -> bool:
    xs, x0 = _split(x, inst.n)
    return bool(inst.cost @ xs <= inst.budget + inst.C1 * x0 + 1e-9)


def recourse_ok(x, y, inst: CbInstance) -> bool:
    xs, x0 = _split(x, inst.n)
    ys, y0 = _split(y, inst.n)
    return bool(first_stage_ok(x, inst) and (xs + ys <= 1).all()
                and inst.cost @ (xs + ys) <= inst.budget + inst.C1 * x0 + inst.C2 * y0 + 1e-9)


def cb_objective(x, y, inst: CbInstance) -> tuple[float, np.ndarray]:
    """Maximize-sense ``(g, h)`` with profit ``g + xi @ h``."""
    if not recourse_ok(x, y, inst):
        raise ValueError("infeasible investment plan")
    xs, x0 = _split(x, inst.n)
    ys, y0 = _split(y, inst.n)
    invest = xs + inst.f_defer * ys
    g = -inst.lambda_loan * x0 - inst.lambda_loan * inst.mu_loan * y0 + float(inst.p_bar @ invest)
    h = 0.5 * inst.Q.T @ (inst.p_bar * invest)
    return g, h


def _encoding(inst: CbInstance) -> LinearEncoding:
    n = inst.n
    first = (np.concatenate([inst.cost, [-inst.C1]])[None, :], [LE], np.array([inst.budget]))
    A_x = np.zeros((1 + n, n + 1))
    A_x[0, :n], A_x[0, n] = inst.cost, -inst.C1
    A_x[1:, :n] = np.eye(n)
    A_v = np.zeros((1 + n, n + 1))
    A_v[0, :n], A_v[0, n] = inst.cost, -inst.C2
    A_v[1:, :n] = np.eye(n)
    rhs = np.concatenate([[inst.budget], np.ones(n)])

    def make_block(xi):
        # profit in the natural (maximize) sense; canonicalize negates it
        p = inst.p_bar * (1.0 + 0.5 * inst.Q @ xi)
        cost_x = np.concatenate([p, [-inst.lambda_loan]])
        cost_v = np.concatenate([inst.f_defer * p, [-inst.lambda_loan * inst.mu_loan]])
        return Block(lb=np.zeros(n + 1), ub=np.ones(n + 1), binary=np.ones(n + 1, dtype=bool),
                     A_x=A_x, A_v=A_v, senses=[LE] * (1 + n), rhs=rhs,
                     cost_x=cost_x, cost_v=cost_v, const=0.0, extract_y=np.round)

    return LinearEncoding(n + 1, first, make_block)


def _plans(inst: CbInstance):
    """Every feasible (x, y), grouped by x."""
    n = inst.n
    bits = ((np.arange(2 ** (n + 1))[:, None] >> np.arange(n + 1)) & 1).astype(np.int8)
    for x in bits:
        if not first_stage_ok(x, inst):
            continue
        xs, x0 = _split(x, n)
        ys, y0 = bits[:, :n].astype(float), bits[:, n].astype(float)
        ok = ((xs + ys) <= 1).all(axis=1) & \
            ((xs + ys) @ inst.cost <= inst.budget + inst.C1 * x0 + inst.C2 * y0 + 1e-9)
        Y = bits[ok]
        invest = xs + inst.f_defer * ys[ok]
        G = -inst.lambda_loan * x0 - inst.lambda_loan * inst.mu_loan * y0[ok] + invest @ inst.p_bar
        H = 0.5 * (invest * inst.p_bar) @ inst.Q
        yield x.astype(int), Y, G, H


def cb_problem(inst: CbInstance) -> ProblemSpec:
    return ProblemSpec(
        n1=inst.n + 1, n2=inst.n + 1, m=inst.m, sense=Sense.MAXIMIZE,
        objective=lambda x, y: cb_objective(x, y, inst),
        first_stage_feasible=lambda x: first_stage_ok(x, inst),
        full_feasible=lambda x, y: recourse_ok(x, y, inst),
        binary_first_stage=False,
        encoding=_encoding(inst),
        enumerate=lambda: _plans(inst),
        name=inst.name,
    )


def cb_oracle(inst: CbInstance, **kw) -> EncodingOracle:
    """MIP oracle on the canonical (minimization) form: it minimizes the negated profit."""
    return EncodingOracle(canonicalize(cb_problem(inst)), **kw)


def cb_enum_oracle(inst: CbInstance) -> EnumerationOracle:
    return EnumerationOracle(canonicalize(cb_problem(inst)))


def generate_cb(n: int, m: int = 4, seed: int = 0, f_defer: float = 0.8,
                lambda_loan: float = 0.12, mu_loan: float = 1.2) -> CbInstance:
    """Random instance: costs in ``[0, 10]``, profits ``cost / 5``.

    Loading rows have unit l1 norm and random signs, so different plans have
    different worst-case scenarios.  The budget is half the total cost and both loans are a fifth of the budget.
    """
    if n < 1 or m < 1:
        raise ValueError("need at least one project and one risk factor")
    rng = np.random.default_rng(seed)
    cost = np.round(rng.uniform(0.0, 10.0, size=n), 3)
    p_bar = cost / 5.0
    Q = rng.dirichlet(np.ones(m), size=n) * rng.choice([-1.0, 1.0], size=(n, m))
    budget = float(cost.sum() / 2.0)
    return CbInstance(cost, p_bar, Q, f_defer, budget, 0.2 * budget, 0.2 * budget,
                      lambda_loan, mu_loan, name=f"cb-n{n}-m{m}-s{seed}")
