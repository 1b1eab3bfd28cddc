"""Binary two-stage robust optimization with objective uncertainty."""
from .bench import adaptivity_gap, brute_force_solve, policy_gap, sample_box, sample_budgeted
from .bnb import BnbConfig, select_branch_var, solve_bnb, warm_start_filter
from .ccg import CcgConfig, build_master, solve_ccg
from .cg import (LowerBoundResult, SolutionPool, average_first_stage, evaluate_first_stage,
                 lower_bound, optimal_convex_combination, purge_nonbinding, solve_master)
from .counters import Counters, CounterSnapshot
from .model import (FixationSet, ProblemSpec, Sense, Solution, UncertaintySet, canonicalize,
                    evaluate, nominal_scenario)
from .report import RunReport
from .runner import prepare, run

__all__ = [
    "adaptivity_gap", "brute_force_solve", "policy_gap", "sample_box", "sample_budgeted",
    "BnbConfig", "select_branch_var", "solve_bnb", "warm_start_filter",
    "CcgConfig", "build_master", "solve_ccg",
    "LowerBoundResult", "SolutionPool", "average_first_stage", "evaluate_first_stage",
    "lower_bound", "optimal_convex_combination", "purge_nonbinding", "solve_master",
    "Counters", "CounterSnapshot",
    "FixationSet", "ProblemSpec", "Sense", "Solution", "UncertaintySet", "canonicalize",
    "evaluate", "nominal_scenario", "RunReport", "prepare", "run",
]
