"""Glue between problem instances, oracles and algorithms."""
from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .bench import adaptivity_gap, brute_force_solve, policy_gap, sample_scenario
from .bnb import BnbConfig, solve_bnb
from .cg import lower_bound
from .ccg import CcgConfig, solve_ccg
from .counters import Counters
from .model import FixationSet, ProblemSpec, UncertaintySet, canonicalize
from .problems.capital_budgeting import CbInstance, cb_problem
from .problems.encoding import EncodingOracle, EnumerationOracle
from .problems.explicit import ExplicitInstance, explicit_problem
from .problems.sahlp import ENUM_CAP, SahlpInstance, sahlp_problem
from .report import RunReport, fill_counters, policy_entries, to_sense

Instance = Union[ExplicitInstance, SahlpInstance, CbInstance]
ALGORITHMS = ("bnb", "ccg", "lb-only", "brute")


def problem_kind(inst: Instance) -> str:
    if isinstance(inst, ExplicitInstance):
        return "explicit"
    if isinstance(inst, SahlpInstance):
        return "sahlp"
    if isinstance(inst, CbInstance):
        return "cb"
    raise TypeError(f"unknown instance type {type(inst).__name__}")


@dataclass
class Prepared:
    instance: Instance
    kind: str
    spec: ProblemSpec
    U: UncertaintySet
    oracle: object


def prepare(inst: Instance, oracle: str = "auto") -> Prepared:
    """Canonical spec, uncertainty set and oracle for an instance.

    ``oracle`` is ``"mip"`` (encoded MIP), ``"enum"`` (exhaustive search) or
    ``"auto"``: enumeration for explicit instances, the MIP otherwise.
    """
    kind = problem_kind(inst)
    natural = {"explicit": explicit_problem, "sahlp": sahlp_problem, "cb": cb_problem}[kind](inst)
    spec = canonicalize(natural)
    if oracle == "auto":
        oracle = "enum" if kind == "explicit" else "mip"
    if oracle == "mip":
        orc = EncodingOracle(spec)
    elif oracle == "enum":
        if kind == "sahlp" and inst.n > ENUM_CAP:
            raise ValueError(f"enumeration oracle refuses n={inst.n} > {ENUM_CAP}")
        orc = EnumerationOracle(spec)
    else:
        raise ValueError(f"unknown oracle {oracle!r}")
    return Prepared(inst, kind, spec, inst.uncertainty, orc)


def _lb_only(prep: Prepared) -> RunReport:
    start = time.monotonic()
    spec, sign = prep.spec, prep.spec.sign
    counters = Counters()
    counters.node()
    res = lower_bound(spec, prep.U, prep.oracle, FixationSet(), None, counters)
    report = RunReport("lb-only", spec.name, "maximize" if spec.negated else "minimize",
                       "optimal" if res.feasible else "infeasible")
    if res.feasible:
        report.root_bound = report.best_bound = to_sense(sign, res.mu_star)
        report.c_star = [float(v) for v in res.c_star]
        report.policy = policy_entries(res.pool)
        report.n_solutions = len(res.pool)
    fill_counters(report, counters.snapshot())
    report.time_s = time.monotonic() - start
    return report


def _brute(prep: Prepared) -> RunReport:
    start = time.monotonic()
    spec = prep.spec
    value, x = brute_force_solve(spec, prep.U)
    report = RunReport("brute", spec.name, "maximize" if spec.negated else "minimize",
                       "optimal" if x is not None else "infeasible")
    if x is not None:
        report.value = report.best_bound = to_sense(spec.sign, value)
        report.incumbent_x = list(x)
        report.gap = 0.0
    report.time_s = time.monotonic() - start
    return report


def run(prep: Prepared, algo: str = "bnb", branching: str = "avg",
        node_limit: Optional[int] = None, time_limit: Optional[float] = None,
        threads: int = 1, max_iterations: int = 50) -> RunReport:
    if algo == "bnb":
        cfg = BnbConfig(branching=branching, node_limit=node_limit, time_limit=time_limit,
                        threads=threads)
        return solve_bnb(prep.spec, prep.U, prep.oracle, cfg)
    if algo == "ccg":
        cfg = CcgConfig(node_limit=node_limit, time_limit=time_limit, max_iterations=max_iterations)
        return solve_ccg(prep.spec, prep.U, prep.oracle, cfg)
    if algo == "lb-only":
        return _lb_only(prep)
    if algo == "brute":
        return _brute(prep)
    raise ValueError(f"unknown algorithm {algo!r}; choose from {ALGORITHMS}")


def sample_scenarios(U: UncertaintySet, count: int, seed: int) -> list:
    rng = np.random.default_rng(seed)
    return [sample_scenario(U, rng) for _ in range(count)]


def add_metrics(prep: Prepared, report: RunReport, scenarios: int = 10, seed: int = 0) -> RunReport:
    """Fill the adaptivity gap and, from ``scenarios`` samples, the policy gap."""
    if report.value is None:
        return report
    canonical = prep.spec.sign * report.value
    report.adaptivity_gap = adaptivity_gap(prep.spec, prep.U, prep.oracle, canonical)
    if scenarios > 0 and report.policy and report.incumbent_x is not None:
        pool = [prep.spec.solution(x, y) for x, y in report.policy]
        report.policy_gap = policy_gap(pool, report.incumbent_x, prep.spec, prep.oracle,
                                       sample_scenarios(prep.U, scenarios, seed))[0]
        report.metrics_seed = seed
    return report
