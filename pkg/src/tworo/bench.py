"""Reference solver, scenario samplers and evaluation metrics.

The brute-force solver shares nothing with the column generation code: it
enumerates every first stage and every recourse explicitly and solves each
first stage's adversary LP with HiGHS.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Optional

import numpy as np
from scipy.optimize import linprog

from .model import FixationSet, Oracle, ProblemSpec, Sense, Solution, UncertaintySet, evaluate, nominal_scenario

BRUTE_CAP = 300_000
MAX_ATTEMPTS = 1_000_000


class TooLarge(ValueError):
    """The instance exceeds the brute-force enumeration cap."""


def _adversary_lp(G, H, U: UncertaintySet):
    k, p = G.size, U.p
    # variables (mu, delta): maximize mu
    A_ub = np.vstack([np.hstack([np.ones((k, 1)), -(H @ U.P)]),
                      np.hstack([np.zeros((U.A.shape[0], 1)), U.A])])
    b_ub = np.concatenate([G + H @ U.c_bar, U.b])
    bounds = [(None, None)] + list(zip(U.delta_lower, U.delta_upper))
    cost = np.zeros(p + 1)
    cost[0] = -1.0
    res = linprog(cost, A_ub=A_ub, b_ub=b_ub, bounds=bounds, method="highs")
    if res.status != 0:
        raise RuntimeError(f"HiGHS failed on the adversary LP: {res.message}")
    return U.scenario(res.x[1:])


def worst_case_of_table(G: np.ndarray, H: np.ndarray, U: UncertaintySet,
                        batch: int = 64, tol: float = 1e-9) -> tuple[float, np.ndarray]:
    """``max_{c in U} min_k G_k + H_k @ c`` with HiGHS.

    Rows enter the LP lazily: after each solve every row is scanned at the
    LP's scenario and the most violated ones are added, until none is.
    """
    G = np.asarray(G, dtype=float)
    H = np.asarray(H, dtype=float).reshape(G.size, -1)
    c0 = U.c_bar
    active = np.zeros(G.size, dtype=bool)
    active[np.argmin(G + H @ c0)] = True
    while True:
        idx = np.flatnonzero(active)
        c = _adversary_lp(G[idx], H[idx], U)
        vals = G + H @ c
        mu = float((G[idx] + H[idx] @ c).min())
        viol = np.flatnonzero((vals < mu - tol * (1.0 + abs(mu))) & ~active)
        if not viol.size:
            return float(vals.min()), c
        worst = viol[np.argsort(vals[viol], kind="stable")[:batch]]
        active[worst] = True


def brute_force_phi(spec: ProblemSpec, U: UncertaintySet, cap: int = BRUTE_CAP) -> dict:
    """Exact worst-case value of every feasible first stage (canonical sense)."""
    if spec.sense is not Sense.MINIMIZE:
        raise ValueError("brute force expects a canonical (minimization) spec")
    if spec.enumerate is None:
        raise ValueError(f"problem {spec.name!r} cannot be enumerated")
    out, total = {}, 0
    for x, Y, G, H in spec.enumerate():
        total += G.size
        if total > cap:
            raise TooLarge(f"more than {cap} solutions to enumerate")
        if G.size:
            out[tuple(int(v) for v in x)] = worst_case_of_table(G, H, U)[0]
    return out


def brute_force_solve(spec: ProblemSpec, U: UncertaintySet, cap: int = BRUTE_CAP):
    """``(value, x_star)`` of the two-stage problem in the canonical sense."""
    phi = brute_force_phi(spec, U, cap)
    if not phi:
        return np.inf, None
    x = min(phi, key=lambda k: (phi[k], k))
    return phi[x], x


def brute_force_deterministic(spec: ProblemSpec, c) -> float:
    """``min_{z in Z} f(z, c)`` by enumeration."""
    c = np.asarray(c, dtype=float)
    return min(float((G + H @ c).min()) for _, _, G, H in spec.enumerate() if G.size)


def sample_budgeted(U: UncertaintySet, rng: np.random.Generator,
                    max_attempts: int = MAX_ATTEMPTS, batch: int = 256) -> np.ndarray:
    """Sorted-uniform-spacings scenario: ``p`` uniforms on ``[0, Gamma]``, sorted,
    differenced; draws with any spacing above 1 are rejected."""
    if U.kind != "budgeted":
        raise ValueError("sampler needs a budgeted uncertainty set")
    gamma, p = U.gamma, U.p
    if gamma == 0 or p == 0:
        return U.c_bar.copy()
    tried = 0
    while tried < max_attempts:
        k = min(batch, max_attempts - tried)
        s = np.sort(rng.uniform(0.0, gamma, size=(k, p)), axis=1)
        delta = np.diff(s, axis=1, prepend=0.0)
        ok = np.flatnonzero((delta <= 1.0).all(axis=1))
        if ok.size:
            return U.scenario(delta[ok[0]])
        tried += k
    raise RuntimeError(f"no accepted sample in {max_attempts} attempts")


def sample_box(U: UncertaintySet, rng: np.random.Generator, max_attempts: int = MAX_ATTEMPTS) -> np.ndarray:
    """Uniform deviation in the box, rejecting points that violate the rows."""
    for _ in range(max_attempts):
        delta = rng.uniform(U.delta_lower, U.delta_upper)
        if U.contains_delta(delta):
            return U.scenario(delta)
    raise RuntimeError(f"no accepted sample in {max_attempts} attempts")


def sample_scenario(U: UncertaintySet, rng: np.random.Generator) -> np.ndarray:
    return sample_budgeted(U, rng) if U.kind == "budgeted" else sample_box(U, rng)


def expected_budget_use(p: int, gamma: float) -> float:
    """Exact mean of ``sum(delta)`` under :func:`sample_budgeted`.

    With ``u`` the gap between the largest uniform and ``Gamma`` (rescaled to
    ``[0, 1]``), acceptance given ``u`` is an inclusion-exclusion sum over the
    ``p`` spacings exceeding ``a = 1/Gamma``; integrating term by term gives
    ``E[u] = sum_k (-1)^k C(p,k) L_k^(p+1) / (p+1) / sum_k (-1)^k C(p,k) L_k^p``
    with ``L_k = max(1 - k a, 0)``.  Rational arithmetic avoids cancellation.
    """
    if gamma <= 0:
        return 0.0
    g = Fraction(gamma)
    a = 1 / g
    num = den = Fraction(0)
    for k in range(p + 1):
        L = 1 - k * a
        if L <= 0:
            break
        sgn = -1 if k % 2 else 1
        num += sgn * comb(p, k) * L ** (p + 1)
        den += sgn * comb(p, k) * L ** p
    eu = num / ((p + 1) * den)
    return float(g * (1 - eu))


def reference_scenario(U: UncertaintySet) -> np.ndarray:
    """Scenario of the deterministic comparison problem: nominal weights for a
    budgeted set, the box midpoint otherwise."""
    return U.c_bar.copy() if U.kind == "budgeted" else nominal_scenario(U)


def adaptivity_gap(spec: ProblemSpec, U: UncertaintySet, oracle: Oracle,
                   two_stage_value: float) -> Optional[float]:
    """Percent increase of the canonical two-stage value over the deterministic one.

    ``two_stage_value`` is in the canonical sense.  Returns ``None`` when the
    deterministic value is zero.
    """
    c = reference_scenario(U)
    z = oracle.solve(c, FixationSet())
    if z is None:
        raise ValueError("deterministic problem is infeasible")
    det = evaluate(z, c)
    if det == 0.0:
        return None
    return 100.0 * (two_stage_value - det) / abs(det)


@dataclass
class MetricsReport:
    adaptivity_gap: Optional[float] = None
    root_gap: Optional[float] = None
    policy_gap: Optional[float] = None
    per_scenario: list = field(default_factory=list)
    skipped: int = 0
    seed: Optional[int] = None


def policy_gap(pool, x_bar, spec: ProblemSpec, oracle: Oracle, scenarios) -> tuple[Optional[float], list, int]:
    """Mean percent loss of the best pool recourse against the optimal recourse.

    Works on the canonical spec; the ratio is taken in the problem's own sense
    so that it is a relative loss for both minimization and maximization.
    Returns ``(mean, per-scenario list, skipped)``; scenarios whose pool value
    is not positive in the problem's own sense are skipped with a warning.
    """
    x_bar = tuple(int(v) for v in x_bar)
    members = [z for z in pool if z.x == x_bar]
    if not members:
        raise ValueError("pool has no solution with the given first stage")
    fix = FixationSet.full(x_bar)
    sign = spec.sign
    per, skipped = [], 0
    for c in scenarios:
        v_pool = min(evaluate(z, c) for z in members)
        z = oracle.solve(c, fix)
        if z is None:
            raise ValueError(f"first stage {x_bar} has no recourse")
        v_opt = evaluate(z, c)
        denom = sign * v_pool
        if denom <= 0:
            warnings.warn(f"pool value {denom:g} is not positive; scenario skipped", RuntimeWarning)
            skipped += 1
            continue
        per.append(100.0 * (v_pool - v_opt) / denom)
    mean = float(np.mean(per)) if per else None
    return mean, per, skipped


def policy_pool_from_report(report, spec: ProblemSpec) -> list[Solution]:
    return [spec.solution(x, y) for x, y in report.policy]
