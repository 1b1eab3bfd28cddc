import numpy as np
import pytest
from hypothesis import given, strategies as st

from tworo.cg import (SolutionPool, average_first_stage, evaluate_first_stage, lower_bound,
                      optimal_convex_combination, purge_nonbinding, solve_master)
from tworo.counters import Counters
from tworo.model import FixationSet, Solution, UncertaintySet, evaluate
from tworo.problems import random_explicit
from tworo.runner import prepare

U01 = UncertaintySet.box([0.0], [1.0])
Z1 = Solution((0,), (0,), 2.0, (0.0,))
Z2 = Solution((0,), (1,), 0.0, (3.0,))
Z3 = Solution((1,), (0,), 1.5, (0.0,))
Z4 = Solution((1,), (1,), 0.5, (1.0,))


def test_master_single_member():
    mu, c, slack = solve_master(SolutionPool([Z4]), U01)
    assert mu == pytest.approx(1.5) and c[0] == pytest.approx(1.0)
    assert slack.min() >= -1e-7


def test_master_constant_member():
    U = UncertaintySet.budgeted([1.0, 2.0], [1.0, 1.0], 1.0)
    mu, _, _ = solve_master(SolutionPool([Solution((0,), (0,), 2.0, (0.0, 0.0))]), U)
    assert mu == pytest.approx(2.0)


def test_master_two_pieces():
    mu, c, _ = solve_master(SolutionPool([Z2, Z3]), U01)
    assert mu == pytest.approx(1.5)
    assert c[0] >= 0.5 - 1e-9


def test_master_needs_members():
    with pytest.raises(ValueError):
        solve_master(SolutionPool(), U01)


def test_pool_is_a_set():
    pool = SolutionPool([Z1, Z2, Z1])
    assert len(pool) == 2 and Z1 in pool and Z3 not in pool
    assert [z.x for z in pool.filter(FixationSet(I1={0}))] == []


def test_t1_trace(t1):
    counters = Counters()
    res = lower_bound(t1.spec, t1.U, t1.oracle, counters=counters)
    assert res.mu_star == pytest.approx(1.5) and res.c_star[0] == pytest.approx(1.0)
    assert res.iterations == 1
    # seed call at the nominal scenario plus the terminating call
    assert res.oracle_calls == 2
    assert {z.key for z in res.pool} == {Z3.key, Z4.key}
    snap = counters.snapshot()
    assert snap.lb_iterations == (1,) and snap.consistent()


def test_t1_warm_start_skips_seed(t1):
    res = lower_bound(t1.spec, t1.U, t1.oracle, warm=[Z4])
    assert res.mu_star == pytest.approx(1.5) and res.oracle_calls == 1


def test_warm_start_must_respect_fixation(t1):
    with pytest.raises(ValueError):
        lower_bound(t1.spec, t1.U, t1.oracle, FixationSet(I1={0}), warm=[Z1])


def test_singleton_uncertainty_is_deterministic():
    prep = prepare(random_explicit(np.random.default_rng(4), 2, 2, 2))
    U = UncertaintySet.budgeted(prep.U.c_bar, np.diag(prep.U.P), 0.0)
    res = lower_bound(prep.spec, U, prep.oracle)
    det = min(evaluate(z, U.c_bar) for z in (prep.spec.solution(x, y)
                                                for x, y, _, _ in prep.instance.solutions))
    assert res.mu_star == pytest.approx(det)
    assert res.iterations == 1 and res.oracle_calls == 2


def test_infeasible_fixation(t1):
    res = lower_bound(t1.spec, t1.U, t1.oracle, FixationSet(I1={0}), warm=None)
    assert res.feasible
    prep = prepare(random_explicit(np.random.default_rng(0), 2, 1, 1, n_solutions=1))
    x = prep.instance.solutions[0][0]
    fix = FixationSet(I0={0}) if x[0] == 1 else FixationSet(I1={0})
    bad = lower_bound(prep.spec, prep.U, prep.oracle, fix)
    assert not bad.feasible and bad.mu_star == np.inf


def test_full_fixation_equals_phi(t1):
    assert lower_bound(t1.spec, t1.U, t1.oracle, FixationSet(I1={0})).mu_star == pytest.approx(1.5)
    assert evaluate_first_stage((1,), t1.spec, t1.U, t1.oracle).mu_star == pytest.approx(1.5)
    assert evaluate_first_stage((0,), t1.spec, t1.U, t1.oracle).mu_star == pytest.approx(2.0)


def test_evaluate_first_stage_rejects_infeasible_x(t1):
    with pytest.raises(ValueError):
        evaluate_first_stage((1, 0), t1.spec, t1.U, t1.oracle)


def test_purge_examples():
    pool = SolutionPool([Z2, Z3, Z4])
    kept = purge_nonbinding(pool, np.array([1.0]), 1.5)
    assert [z.key for z in kept] == [Z3.key, Z4.key]
    binding = SolutionPool([Z3, Z4])
    assert purge_nonbinding(binding, np.array([1.0]), 1.5).members == binding.members


def test_average_first_stage_examples():
    def pool(*xs):
        return SolutionPool(Solution(x, (i,), 0.0, (0.0,)) for i, x in enumerate(xs))
    assert np.allclose(average_first_stage(pool((1, 0))), [1, 0])
    assert np.allclose(average_first_stage(pool((1, 0), (0, 0))), [0.5, 0])
    assert np.allclose(average_first_stage(pool((1, 1), (1, 0), (1, 1))), [1, 2 / 3])


def test_convex_combination_examples():
    lam, xb, val = optimal_convex_combination(SolutionPool([Z4]), U01)
    assert lam.tolist() == [1.0] and xb.tolist() == [1.0] and val == pytest.approx(1.5)
    lam, xb, val = optimal_convex_combination(SolutionPool([Z3, Z4]), U01)
    assert val == pytest.approx(1.5) and xb[0] == pytest.approx(1.0)
    assert lam.sum() == pytest.approx(1.0) and (lam >= 0).all()


@st.composite
def pools(draw):
    rng = np.random.default_rng(draw(st.integers(0, 2**31)))
    k, m = draw(st.integers(1, 6)), draw(st.integers(1, 3))
    members = [Solution(rng.integers(0, 2, 3), (i,), rng.uniform(0, 5), rng.uniform(-1, 3, m))
               for i in range(k)]
    U = UncertaintySet.budgeted(rng.uniform(0, 2, m), rng.uniform(0, 2, m), rng.uniform(0, m))
    return SolutionPool(members), U


@given(pools())
def test_convex_combination_strong_duality(data):
    pool, U = data
    mu, _, _ = solve_master(pool, U)
    lam, xb, val = optimal_convex_combination(pool, U)
    assert abs(val - mu) <= 1e-6 * (1 + abs(mu))
    assert np.allclose(xb, lam @ pool.X())
    common = (pool.X() == pool.X()[0]).all(axis=0)
    assert np.allclose(xb[common], pool.X()[0][common])


@given(pools())
def test_purge_keeps_master_value(data):
    pool, U = data
    mu, c, _ = solve_master(pool, U)
    kept = purge_nonbinding(pool, c, mu)
    assert abs(solve_master(kept, U)[0] - mu) <= 1e-6 * (1 + abs(mu))
    assert {z.key for z in kept} == {z.key for z in pool if evaluate(z, c) <= mu + 1e-6}


@given(st.integers(0, 2**31))
def test_lower_bound_properties(seed):
    prep = prepare(random_explicit(np.random.default_rng(seed), 2, 2, 2))
    res = lower_bound(prep.spec, prep.U, prep.oracle)
    h = res.mu_history
    assert all(b <= a + 1e-6 * (1 + abs(a)) for a, b in zip(h, h[1:]))
    assert res.iterations <= len(prep.instance.solutions)
    assert prep.U.contains(res.c_star)
    assert min(evaluate(z, res.c_star) for z in res.pool) == pytest.approx(res.mu_star, abs=1e-6)
    assert all(evaluate(z, res.c_star) <= res.mu_star + 1e-6 for z in res.pool)
