"""Uncapacitated single-allocation hub location under flow uncertainty.

First stage: which nodes become hubs (``x_k``).  Second stage: the
allocation ``y[i*n + k] = 1`` of node ``i`` to open hub ``k``.  The scenario
is the flattened flow matrix ``w[i*n + j]``.  Expanding ``O_i`` and ``D_i``
into per-flow terms gives a cost that is linear in ``w``::

    f = sum_k f_k x_k + sum_ij w_ij (chi d[i,a_i] + delta d[j,a_j] + alpha d[a_i,a_j])

where ``a_i`` is the hub of node ``i``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from ..lp import EQ, LE
from ..model import ProblemSpec, Sense, UncertaintySet
from .encoding import Block, EncodingOracle, EnumerationOracle, LinearEncoding

ENUM_CAP = 8


@dataclass(frozen=True, eq=False)
class SahlpInstance:
    d: np.ndarray
    w_bar: np.ndarray
    w_hat: np.ndarray
    setup: np.ndarray
    chi: float = 3.0
    alpha: float = 0.75
    delta_cost: float = 2.0
    gamma: float = 0.0
    name: str = "sahlp"

    def __post_init__(self):
        for key in ("d", "w_bar", "w_hat", "setup"):
            object.__setattr__(self, key, np.array(getattr(self, key), dtype=float))
        n = self.setup.size
        for key in ("d", "w_bar", "w_hat"):
            if getattr(self, key).shape != (n, n):
                raise ValueError(f"{key} must be {n}x{n}")
        if min(self.chi, self.alpha, self.delta_cost) < 0:
            raise ValueError("cost factors must be non-negative")
        if (self.w_bar < 0).any() or (self.w_hat < 0).any():
            raise ValueError("flows and deviations must be non-negative")

    @property
    def n(self) -> int:
        return self.setup.size

    @property
    def uncertainty(self) -> UncertaintySet:
        return UncertaintySet.budgeted(self.w_bar.ravel(), self.w_hat.ravel(), self.gamma)


def hubs_of(y, n: int) -> np.ndarray:
    """Hub index of every node; raises unless each node has exactly one allocation."""
    Y = np.asarray(y).reshape(n, n)
    if not ((Y == 0) | (Y == 1)).all() or not (Y.sum(axis=1) == 1).all():
        raise ValueError("every node must be allocated to exactly one hub")
    return Y.argmax(axis=1)


def sahlp_objective(x, y, inst: SahlpInstance) -> tuple[float, np.ndarray]:
    n = inst.n
    x = np.asarray(x)
    a = hubs_of(y, n)
    if not (x[a] == 1).all():
        raise ValueError("node allocated to a closed hub")
    g = float(inst.setup @ x)
    da = inst.d[np.arange(n), a]
    h = inst.chi * da[:, None] + inst.delta_cost * da[None, :] + inst.alpha * inst.d[np.ix_(a, a)]
    return g, h.ravel()


def direct_cost(x, y, w, inst: SahlpInstance) -> float:
    """Quadratic objective evaluated term by term from ``O``, ``D`` and ``y``."""
    n = inst.n
    w = np.asarray(w, dtype=float).reshape(n, n)
    Y = np.asarray(y, dtype=float).reshape(n, n)
    O, D = w.sum(axis=1), w.sum(axis=0)
    cost = float(inst.setup @ np.asarray(x, dtype=float))
    cost += sum(inst.d[i, k] * (inst.chi * O[i] + inst.delta_cost * D[i]) * Y[i, k]
                for i in range(n) for k in range(n))
    cost += sum(inst.alpha * w[i, j] * inst.d[k, m] * Y[i, k] * Y[j, m]
                for i, k, j, m in itertools.product(range(n), repeat=4))
    return cost


def _flow_encoding(inst: SahlpInstance) -> LinearEncoding:
    n = inst.n
    ny = n * n
    zid = {}
    for i, k, m in itertools.product(range(n), repeat=3):
        if k != m:
            zid[i, k, m] = ny + len(zid)
    nv = ny + len(zid)

    rows_assign = np.zeros((n, nv))
    for i in range(n):
        rows_assign[i, i * n:(i + 1) * n] = 1.0
    link_v = np.zeros((ny, nv))
    link_v[np.arange(ny), np.arange(ny)] = 1.0
    link_x = np.zeros((ny, n))
    for i, k in itertools.product(range(n), repeat=2):
        link_x[i * n + k, k] = -1.0
    # z-part of flow balance and cap rows, scenario independent
    bal_z = np.zeros((ny, nv))
    cap_z = np.zeros((ny, nv))
    for (i, k, m), col in zid.items():
        bal_z[i * n + k, col] += 1.0
        bal_z[i * n + m, col] -= 1.0
        cap_z[i * n + k, col] = 1.0
    cost_z = np.zeros(nv)
    for (i, k, m), col in zid.items():
        cost_z[col] = inst.alpha * inst.d[k, m]
    A_x = np.vstack([np.zeros((n, n)), link_x, np.zeros((2 * ny, n))])
    senses = [EQ] * n + [LE] * ny + [EQ] * ny + [LE] * ny
    rhs = np.concatenate([np.ones(n), np.zeros(3 * ny)])
    lb = np.zeros(nv)
    ub = np.concatenate([np.ones(ny), np.full(nv - ny, np.inf)])
    binary = np.arange(nv) < ny

    def make_block(c):
        w = c.reshape(n, n)
        O, D = w.sum(axis=1), w.sum(axis=0)
        bal = bal_z.copy()
        cap = cap_z.copy()
        for i, k in itertools.product(range(n), repeat=2):
            r = i * n + k
            bal[r, i * n + k] -= O[i]
            # + sum_j w_ij y_jk
            bal[r, np.arange(n) * n + k] += w[i]
            cap[r, i * n + k] -= O[i]
        cost_v = cost_z.copy()
        cost_v[:ny] = (inst.d * (inst.chi * O + inst.delta_cost * D)[:, None]).ravel()
        return Block(lb=lb, ub=ub, binary=binary, A_x=A_x,
                     A_v=np.vstack([rows_assign, link_v, bal, cap]),
                     senses=senses, rhs=rhs, cost_x=inst.setup.copy(), cost_v=cost_v,
                     const=0.0, extract_y=lambda v: np.round(v[:ny]))

    return LinearEncoding(n, (np.zeros((0, n)), [], np.zeros(0)), make_block)


def _allocation_chunks(inst: SahlpInstance):
    """Every hub set with every allocation of nodes to its hubs."""
    n = inst.n
    d = inst.d
    for mask in range(1, 2 ** n):
        hubs = np.array([k for k in range(n) if mask >> k & 1])
        x = np.array([mask >> k & 1 for k in range(n)], dtype=int)
        k = hubs.size
        A = hubs[np.indices((k,) * n).reshape(n, -1).T]
        da = d[np.arange(n), A]
        H = (inst.chi * da[:, :, None] + inst.delta_cost * da[:, None, :]
             + inst.alpha * d[A[:, :, None], A[:, None, :]]).reshape(A.shape[0], n * n)
        Y = np.zeros((A.shape[0], n, n), dtype=np.int8)
        np.put_along_axis(Y, A[:, :, None], 1, axis=2)
        G = np.full(A.shape[0], float(inst.setup @ x))
        yield x, Y.reshape(A.shape[0], n * n), G, H


def sahlp_problem(inst: SahlpInstance) -> ProblemSpec:
    n = inst.n

    def full_feasible(x, y):
        try:
            a = hubs_of(y, n)
        except ValueError:
            return False
        return bool((np.asarray(x)[a] == 1).all())

    return ProblemSpec(
        n1=n, n2=n * n, m=n * n, sense=Sense.MINIMIZE,
        objective=lambda x, y: sahlp_objective(x, y, inst),
        first_stage_feasible=lambda x: bool(np.asarray(x).any()),
        full_feasible=full_feasible,
        # x = 0 has no allocation; every other hub set is feasible
        binary_first_stage=False,
        encoding=_flow_encoding(inst),
        enumerate=lambda: _allocation_chunks(inst),
        name=inst.name,
    )


def sahlp_flow_oracle(inst: SahlpInstance, **kw) -> EncodingOracle:
    return EncodingOracle(sahlp_problem(inst), **kw)


def sahlp_enum_oracle(inst: SahlpInstance, cap: int = ENUM_CAP) -> EnumerationOracle:
    if inst.n > cap:
        raise ValueError(f"enumeration oracle refuses n={inst.n} > {cap}")
    return EnumerationOracle(sahlp_problem(inst))


def generate_sahlp(n: int, gamma_frac: float = 0.1, deviation_mult: float = 1.0,
                   seed: int = 0, style: str = "ap", alpha: float | None = None,
                   gamma: float | None = None) -> SahlpInstance:
    """Random instance: nodes in the unit square, budget ``floor(gamma_frac * n^2)``.

    ``style="ap"`` uses chi=3, alpha=0.75, delta=2; ``style="cab"`` uses chi=delta=1
    and alpha=0.2 unless given.  Setup costs follow ``15 log(O_k)`` on the nominal flows.
    Deviations are uniform in ``[0, deviation_mult * w_bar]``.
    """
    if n < 1:
        raise ValueError("need at least one node")
    if deviation_mult < 0 or gamma_frac < 0:
        raise ValueError("deviation multiplier and budget fraction must be non-negative")
    rng = np.random.default_rng(seed)
    pts = rng.uniform(0.0, 1.0, size=(n, 2))
    d = np.round(np.linalg.norm(pts[:, None] - pts[None, :], axis=2), 4)
    w_bar = np.round(rng.uniform(1.0, 10.0, size=(n, n)), 3)
    np.fill_diagonal(w_bar, 0.0)
    w_hat = np.round(rng.uniform(0.0, 1.0, size=(n, n)) * deviation_mult * w_bar, 3)
    O = w_bar.sum(axis=1)
    setup = np.round(15.0 * np.log(np.maximum(O, 1.0)), 3)
    if style == "ap":
        chi, dc, al = 3.0, 2.0, 0.75 if alpha is None else alpha
    elif style == "cab":
        chi, dc, al = 1.0, 1.0, 0.2 if alpha is None else alpha
    else:
        raise ValueError(f"unknown style {style!r}")
    if gamma is None:
        gamma = float(np.floor(gamma_frac * n * n))
    return SahlpInstance(d, w_bar, w_hat, setup, chi, al, dc, float(gamma),
                         name=f"sahlp-{style}-n{n}-s{seed}")
