import itertools

import numpy as np
from hypothesis import given, strategies as st

from tworo.lp import LE, LpProblem, solve_lp
from tworo.mip import MipProblem, MipStatus, solve_mip
import pytest


def test_knapsack():
    res = solve_mip(MipProblem(LpProblem([3, 2], [[1, 1]], [LE], [1], [0, 0], [1, 1]), [0, 1]))
    assert res.status is MipStatus.OPTIMAL
    assert abs(res.objective - 3) < 1e-9 and res.x[0] == 1 and res.x[1] == 0


def test_zero_objective():
    res = solve_mip(MipProblem(LpProblem([0, 0], np.zeros((0, 2)), [], [], [0, 0], [1, 1]), [0, 1]))
    assert res.optimal and res.objective == 0


def test_infeasible_binary():
    p = LpProblem([1.0], [[1.0], [-1.0]], [LE, LE], [0.4, -0.5], [0.0], [1.0])
    assert solve_mip(MipProblem(p, [0])).status is MipStatus.INFEASIBLE


def test_binary_bounds_checked():
    with pytest.raises(ValueError):
        MipProblem(LpProblem([1.0], np.zeros((0, 1)), [], [], [0.0], [2.0]), [0])
    with pytest.raises(ValueError):
        MipProblem(LpProblem([1.0], np.zeros((0, 1)), [], [], [0.0], [1.0]), [3])


def test_node_limit_reports_limit():
    rng = np.random.default_rng(3)
    n = 12
    w = rng.uniform(1, 10, n)
    p = LpProblem(w + rng.uniform(0, 1, n), [w], [LE], [w.sum() / 2.3], np.zeros(n), np.ones(n))
    res = solve_mip(MipProblem(p, np.arange(n)), node_limit=1)
    assert res.status is MipStatus.LIMIT_REACHED
    assert res.best_bound >= res.objective


@st.composite
def mips(draw):
    nb = draw(st.integers(1, 7))
    nc = draw(st.integers(0, 2))
    m = draw(st.integers(1, 4))
    rng = np.random.default_rng(draw(st.integers(0, 2**32 - 1)))
    n = nb + nc
    A = np.round(rng.uniform(-2, 4, size=(m, n)), 2)
    b = np.round(rng.uniform(0, 6, size=m), 2)
    c = np.round(rng.uniform(-3, 5, size=n), 2)
    ub = np.concatenate([np.ones(nb), np.round(rng.uniform(0.5, 3, size=nc), 2)])
    return MipProblem(LpProblem(c, A, [LE] * m, b, np.zeros(n), ub), np.arange(nb))


def _enumerate(p: MipProblem):
    nb, best = p.binaries.size, -np.inf
    for bits in itertools.product((0.0, 1.0), repeat=nb):
        lb, ub = p.lp.lb.copy(), p.lp.ub.copy()
        lb[p.binaries] = ub[p.binaries] = bits
        res = solve_lp(LpProblem(p.lp.c, p.lp.A, p.lp.senses, p.lp.b, lb, ub))
        if res.optimal:
            best = max(best, res.objective)
    return best


@given(mips())
def test_matches_enumeration(p):
    res, ref = solve_mip(p), _enumerate(p)
    if ref == -np.inf:
        assert res.status is MipStatus.INFEASIBLE
    else:
        assert res.optimal and abs(res.objective - ref) <= 1e-6
        xb = res.x[p.binaries]
        assert np.abs(xb - np.round(xb)).max() <= 1e-6
        assert abs(res.objective - res.best_bound) <= 1e-6
