"""
Hub location with uncertain flows
=================================

Random single-allocation hub location instances: nodes in the unit square,
uncertain flows with a budget on the total relative deviation.  We watch the
two-stage value grow with the budget, compare the solvers and look at how
good the stored recourse decisions are on sampled scenarios.
"""

import time

import numpy as np

from tworo.bench import brute_force_solve
from tworo.problems import generate_sahlp
from tworo.runner import add_metrics, prepare, run

# one instance at several budgets; the generator draws the same data for every budget
print("budget  value     adaptivity gap")
for gamma in (0, 1, 2, 4, 8):
    prep = prepare(generate_sahlp(5, seed=7, deviation_mult=10.0, gamma=float(gamma)))
    rep = add_metrics(prep, run(prep, "bnb"), scenarios=0)
    print(f"{gamma:>6}  {rep.value:8.3f}  {rep.adaptivity_gap:6.2f}%")

# all three exact methods agree with the brute-force reference
prep = prepare(generate_sahlp(5, 0.1, seed=3, deviation_mult=10.0))
ref, x_ref = brute_force_solve(prep.spec, prep.U)
print("\nbrute force", round(ref, 6), "hubs", x_ref)
for algo, branching in (("bnb", "avg"), ("bnb", "opt"), ("ccg", "avg")):
    t = time.monotonic()
    rep = run(prep, algo, branching)
    print(f"{algo}-{branching}: value {rep.value:.6f} nodes {rep.nodes} oracle calls "
          f"{rep.oracle_calls} i_lb {rep.i_lb} i_ub {rep.i_ub} ({time.monotonic() - t:.2f}s)")

# the policy pool holds a handful of allocations for the chosen hubs; on each
# sampled scenario the best of them is compared with the optimal allocation
rep = add_metrics(prep, run(prep, "bnb"), scenarios=10, seed=0)
print("\npool size", rep.n_solutions, "policy gap", round(rep.policy_gap, 4), "%")
print("root gap", round(rep.root_gap, 4), "%")
print("hubs", np.flatnonzero(rep.incumbent_x).tolist())
