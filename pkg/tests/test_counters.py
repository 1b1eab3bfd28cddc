import threading

import pytest

from tworo.bnb import solve_bnb
from tworo.ccg import solve_ccg
from tworo.counters import CounterSnapshot, Counters
from tworo.problems import generate_sahlp
from tworo.runner import prepare


def test_fresh_counters_are_zero():
    snap = Counters().snapshot()
    assert snap == CounterSnapshot()
    assert snap.i_lb is None and snap.i_ub is None and snap.consistent()


def test_snapshot_is_frozen():
    c = Counters()
    c.oracle_call()
    c.loop_done("lb", 2, 1)
    snap = c.snapshot()
    c.oracle_call()
    c.loop_done("ub", 3, 1)
    assert snap.oracle_calls == 1 and snap.ub_iterations == ()
    with pytest.raises(AttributeError):
        snap.oracle_calls = 5


def test_snapshots_around_noop_are_equal():
    c = Counters()
    c.node()
    assert c.snapshot() == c.snapshot()


def test_averages_and_roles():
    c = Counters()
    c.loop_done("lb", 1, 2)
    c.loop_done("lb", 2, 3)
    c.loop_done("ub", 4, 4)
    snap = c.snapshot()
    assert snap.i_lb == 1.5 and snap.i_ub == 4.0
    with pytest.raises(ValueError):
        c.loop_done("node", 1, 1)


def test_thread_safe_counting():
    c = Counters()

    def work():
        for _ in range(1000):
            c.oracle_call()

    threads = [threading.Thread(target=work) for _ in range(4)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert c.snapshot().oracle_calls == 4000


def test_t1_bnb_counts(t1):
    rep = solve_bnb(t1.spec, t1.U, t1.oracle)
    assert rep.nodes == 1 and rep.i_lb == 1.0 and rep.i_ub is None
    assert rep.oracle_calls == 2 and rep.master_solves == 1


@pytest.mark.parametrize("algo", ["bnb", "ccg"])
def test_every_oracle_call_is_owned_by_a_loop(algo, monkeypatch):
    prep = prepare(generate_sahlp(4, 0.1, seed=2, deviation_mult=10.0))
    snaps = []
    original = Counters.snapshot

    def keep(self):
        snap = original(self)
        snaps.append(snap)
        return snap

    monkeypatch.setattr(Counters, "snapshot", keep)
    solver = solve_bnb if algo == "bnb" else solve_ccg
    rep = solver(prep.spec, prep.U, prep.oracle)
    snap = snaps[-1]
    assert snap.consistent()
    assert rep.oracle_calls == snap.oracle_calls == sum(snap.lb_calls) + sum(snap.ub_calls)
