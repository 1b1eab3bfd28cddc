"""
Two hand-sized instances
========================

Both toys have one first-stage bit, one second-stage bit and a single
uncertain cost ``c`` in ``[0, 1]``.  Every number printed below can be
checked with pencil and paper.
"""

import numpy as np

from tworo.bench import brute_force_phi
from tworo.cg import evaluate_first_stage, lower_bound, optimal_convex_combination
from tworo.problems import toy_t1, toy_t2
from tworo.runner import prepare, run

# the first toy lists four solutions (x, y, g, h) with f = g + c * h
t1 = prepare(toy_t1())
for x, y, g, h in t1.instance.solutions:
    print(f"x={x} y={y}  f(c) = {g} + {h[0]} c")

# column generation seeds with the answer at the midpoint c = 0.5, then asks
# the adversary for its best c against that pool and stops after one round
res = lower_bound(t1.spec, t1.U, t1.oracle)
print("lower bound", res.mu_star, "at c =", res.c_star, "after", res.iterations, "master solve")
print("binding pool", [(z.x, z.y) for z in res.pool])

# both surviving solutions share x = 1, so the bound is already the value of x = 1
for x in [(0,), (1,)]:
    print("worst case of x =", x, "is", evaluate_first_stage(x, t1.spec, t1.U, t1.oracle).mu_star)

# branch & bound stops at the root, CCG needs a second scenario
for algo in ("bnb", "ccg"):
    rep = run(t1, algo)
    print(algo, "value", rep.value, "nodes", rep.nodes, "ccg iterations", rep.ccg_iterations,
          "scenarios", rep.scenarios)

# the second toy has f(x=0) = c and f(x=1) = 1 - c: whatever x is chosen the
# adversary gets 1, while the bound mixes both and only sees 0.5
t2 = prepare(toy_t2())
rep = run(t2, "bnb")
print("root bound", rep.root_bound, "optimum", rep.value, "root gap", rep.root_gap, "%")
print("nodes", rep.nodes, "exact values", brute_force_phi(t2.spec, t2.U))

# the root bound is the value of the best mixture of the pooled solutions
root = lower_bound(t2.spec, t2.U, t2.oracle)
lam, x_bar, value = optimal_convex_combination(root.pool, t2.U)
print("mixture weights", np.round(lam, 3), "fractional first stage", x_bar, "value", value)
