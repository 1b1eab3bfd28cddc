"""
Capital budgeting with risk factors
===================================

Projects can be started now or deferred until the risk factors are known,
at a reduced profit.  The problem maximizes profit; the solvers work on the
negated objective and report values in the original sense.
"""

from tworo.bench import brute_force_solve
from tworo.problems import generate_cb
from tworo.runner import add_metrics, prepare, run

inst = generate_cb(5, 4, seed=11)
print("costs", inst.cost.tolist())
print("budget", inst.budget, "loans", inst.C1, inst.C2)

prep = prepare(inst)
ref, x = brute_force_solve(prep.spec, prep.U)
# brute force works in the minimization form, so flip the sign back
print("brute force profit", round(-ref, 6), "first stage", x)

for algo, branching in (("bnb", "avg"), ("bnb", "opt"), ("ccg", "avg")):
    rep = run(prep, algo, branching)
    print(f"{algo}-{branching}: profit {rep.value:.6f} bound {rep.root_bound:.6f} "
          f"nodes {rep.nodes} ccg iterations {rep.ccg_iterations}")

# the adaptivity gap compares with the plan made for xi = 0
rep = add_metrics(prep, run(prep, "bnb"), scenarios=10, seed=1)
print("adaptivity gap", round(rep.adaptivity_gap, 3), "% policy gap", rep.policy_gap)
invest = rep.incumbent_x[:-1]
print("start now", [i for i, v in enumerate(invest) if v], "first-stage loan", rep.incumbent_x[-1])
for x_pol, y_pol in rep.policy:
    print("  recourse option: defer", [i for i, v in enumerate(y_pol[:-1]) if v], "loan", y_pol[-1])
