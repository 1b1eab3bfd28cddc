import numpy as np
import pytest
from hypothesis import given, strategies as st

import tworo.bnb as bnb_mod
from tworo.bench import brute_force_phi, brute_force_solve
from tworo.bnb import (BnbConfig, Node, make_incumbent, select_branch_var, solve_bnb,
                       warm_start_filter)
from tworo.cg import SolutionPool, lower_bound
from tworo.counters import Counters
from tworo.model import FixationSet, Solution
from tworo.problems import CbInstance, generate_cb, generate_sahlp, random_explicit
from tworo.runner import prepare


def test_t1(t1):
    rep = solve_bnb(t1.spec, t1.U, t1.oracle)
    assert rep.value == pytest.approx(1.5) and rep.incumbent_x == [1]
    assert rep.nodes == 1 and rep.i_lb == 1 and rep.root_gap == pytest.approx(0.0)
    assert rep.status == "optimal"


def test_t2_needs_branching(t2):
    rep = solve_bnb(t2.spec, t2.U, t2.oracle)
    assert rep.value == pytest.approx(1.0)
    assert rep.root_bound == pytest.approx(0.5) and rep.root_gap == pytest.approx(50.0)
    assert rep.nodes == 3


def test_config_validation():
    with pytest.raises(ValueError):
        BnbConfig(branching="depth")
    with pytest.raises(ValueError):
        BnbConfig(eps_gap=0.0)


def test_requires_canonical_spec():
    from tworo.problems import cb_problem
    inst = generate_cb(2, 2, seed=0)
    with pytest.raises(ValueError):
        solve_bnb(cb_problem(inst), inst.uncertainty, None)


def test_select_branch_var():
    assert select_branch_var((0.9, 0.45, 0.0), [0, 1, 2]) == 1
    assert select_branch_var((0.5, 0.5), [0, 1]) == 0
    assert select_branch_var((1.0, 1.0, 0.0), [1, 2]) == 1
    with pytest.raises(ValueError):
        select_branch_var((1.0,), [])


def _sol(x, i=0):
    return Solution(x, (i,), 0.0, (0.0,))


def test_warm_start_filter():
    parent = SolutionPool([_sol((1, 0)), _sol((0, 0)), _sol((1, 1))])
    kept = warm_start_filter(parent, FixationSet(I1={0}))
    assert [z.x for z in kept] == [(1, 0), (1, 1)]
    assert len(warm_start_filter(SolutionPool([_sol((0, 0))]), FixationSet(I1={0}))) == 0
    assert warm_start_filter(parent, FixationSet()).members == parent.members


def test_make_incumbent_exact_leaf(t1):
    res = lower_bound(t1.spec, t1.U, t1.oracle)
    node = Node(FixationSet(), res.mu_star, res.pool)
    counters = Counters()
    cand = make_incumbent(node, None, t1.spec, t1.U, t1.oracle, BnbConfig(), counters=counters)
    assert cand.x == (1,) and cand.value == pytest.approx(1.5)
    assert counters.snapshot().oracle_calls == 0


def test_make_incumbent_rounding():
    prep = prepare(generate_sahlp(4, seed=3))
    spec = prep.spec
    y = (1, 0, 0, 0) * 4
    pool = SolutionPool([spec.solution((1, 0, 0, 0), y),
                         spec.solution((1, 1, 0, 0), y), spec.solution((1, 0, 1, 0), y)])
    node = Node(FixationSet(), -np.inf, pool)
    x_bar = np.array([1.0, 1 / 3, 1 / 3, 0.0])
    cand = make_incumbent(node, x_bar, spec, prep.U, prep.oracle, BnbConfig())
    assert cand.x == (1, 0, 0, 0)
    assert cand.value == pytest.approx(brute_force_phi(spec, prep.U)[(1, 0, 0, 0)], abs=1e-6)


def test_make_incumbent_falls_back_when_rounding_is_infeasible():
    inst = CbInstance(cost=[6.0, 6.0], p_bar=[1.2, 1.2], Q=[[1.0], [-1.0]], budget=6.0)
    prep = prepare(inst)
    spec = prep.spec
    pool = SolutionPool([spec.solution((1, 0, 0), (0, 0, 0)), spec.solution((0, 1, 0), (0, 0, 0))])
    node = Node(FixationSet(), -np.inf, pool)
    x_bar = np.array([0.5, 0.5, 0.0])
    assert not spec.first_stage_feasible(np.array([1, 1, 0]))
    cand = make_incumbent(node, x_bar, spec, prep.U, prep.oracle, BnbConfig())
    phi = brute_force_phi(spec, prep.U)
    assert cand.x in {(1, 0, 0), (0, 1, 0)}
    assert cand.value == pytest.approx(min(phi[(1, 0, 0)], phi[(0, 1, 0)]), abs=1e-6)


def _instances():
    rng = np.random.default_rng(77)
    out = [random_explicit(rng, 3, 2, 2, name=f"e{i}") for i in range(4)]
    out += [generate_cb(3, 2, seed=s) for s in range(2)]
    out += [generate_sahlp(4, 0.1, seed=s) for s in range(2)]
    return out


@pytest.mark.parametrize("inst", _instances(), ids=lambda i: i.name)
@pytest.mark.parametrize("branching", ["avg", "opt"])
def test_equivalence_with_brute_force(inst, branching):
    prep = prepare(inst)
    ref, _ = brute_force_solve(prep.spec, prep.U)
    rep = solve_bnb(prep.spec, prep.U, prep.oracle, BnbConfig(branching=branching))
    assert rep.status == "optimal"
    assert prep.spec.sign * rep.value == pytest.approx(ref, abs=1e-6)
    assert abs(rep.value - rep.best_bound) <= 1e-6
    snap_ok = rep.oracle_calls > 0 and rep.nodes >= 1
    assert snap_ok


@given(st.integers(0, 2**31), st.sampled_from(["avg", "opt"]))
def test_bounds_are_valid_and_monotone(seed, branching):
    """Every node bound is below the best value in its subtree and above its parent's."""
    prep = prepare(random_explicit(np.random.default_rng(seed), 3, 2, 2))
    phi = brute_force_phi(prep.spec, prep.U)
    seen = []
    original = bnb_mod.lower_bound

    def recording(spec, U, oracle, fix, warm, counters, role="lb"):
        res = original(spec, U, oracle, fix, warm, counters, role)
        seen.append((fix, res))
        return res

    bnb_mod.lower_bound = recording
    try:
        rep = solve_bnb(prep.spec, prep.U, prep.oracle, BnbConfig(branching=branching))
    finally:
        bnb_mod.lower_bound = original
    assert rep.value == pytest.approx(min(phi.values()), abs=1e-6)
    for fix, res in seen:
        sub = [v for x, v in phi.items() if fix.admits(x)]
        if not res.feasible:
            assert not sub
            continue
        # a valid bound makes pruning on it sound
        assert res.mu_star <= min(sub) + 1e-6
        for pfix, pres in seen:
            if pres.feasible and pfix.I0 <= fix.I0 and pfix.I1 <= fix.I1:
                assert res.mu_star >= pres.mu_star - 1e-6


def test_best_first_history(t2):
    rep = solve_bnb(t2.spec, t2.U, t2.oracle)
    lb = rep.lb_history
    assert all(b >= a - 1e-9 for a, b in zip(lb, lb[1:]))
    ub = rep.ub_history
    assert all(b <= a + 1e-9 for a, b in zip(ub, ub[1:]))


def test_node_limit():
    prep = prepare(generate_sahlp(5, 0.1, seed=4, deviation_mult=10.0))
    full = solve_bnb(prep.spec, prep.U, prep.oracle)
    assert full.nodes > 3
    rep = solve_bnb(prep.spec, prep.U, prep.oracle, BnbConfig(node_limit=3))
    assert rep.status == "limit_reached" and rep.nodes <= 3
    assert rep.best_bound <= full.value + 1e-6
    assert rep.value is None or rep.value >= full.value - 1e-6


def test_threads_give_same_value():
    prep = prepare(generate_cb(4, 2, seed=9))
    one = solve_bnb(prep.spec, prep.U, prep.oracle, BnbConfig(threads=1))
    two = solve_bnb(prep.spec, prep.U, prep.oracle, BnbConfig(threads=2))
    assert one.value == pytest.approx(two.value, abs=1e-6)
    assert one.nodes == two.nodes


def test_maximize_report_in_natural_sense():
    prep = prepare(generate_cb(3, 2, seed=1))
    rep = solve_bnb(prep.spec, prep.U, prep.oracle)
    assert rep.sense == "maximize"
    # the bound of a maximization problem lies above its value
    assert rep.root_bound >= rep.value - 1e-6


class _NoSolution:
    thread_safe = True

    def solve(self, c, fix):
        return None


def test_infeasible_root(t1):
    rep = solve_bnb(t1.spec, t1.U, _NoSolution())
    assert rep.status == "infeasible" and rep.value is None and rep.oracle_calls == 1
