"""Linear encodings of ``Z`` and the two generic oracles built on top of them.

An encoding describes ``Z`` as first-stage rows over ``x`` plus, for any
scenario ``c``, a *block* of second-stage variables whose rows couple them to
``x`` and whose linear cost reproduces ``f(x, y, c)`` at an optimum.  The
same block is used once by the MIP oracle and ``l`` times by the CCG master.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from ..lp import LpProblem
from ..mip import MipProblem, MipStatus, solve_mip
from ..model import EPS_ORACLE, FixationSet, ProblemSpec, Solution


class OracleError(RuntimeError):
    """The deterministic solver could not certify an optimal solution."""


@dataclass
class Block:
    """Second-stage variables for one scenario."""

    lb: np.ndarray
    ub: np.ndarray
    binary: np.ndarray
    A_x: np.ndarray
    A_v: np.ndarray
    senses: list
    rhs: np.ndarray
    cost_x: np.ndarray
    cost_v: np.ndarray
    const: float
    extract_y: Callable[[np.ndarray], np.ndarray]

    @property
    def size(self) -> int:
        return self.lb.size

    def scaled(self, factor: float) -> "Block":
        return replace(self, cost_x=factor * self.cost_x, cost_v=factor * self.cost_v,
                       const=factor * self.const)


@dataclass
class LinearEncoding:
    """``first_rows = (A, senses, rhs)`` over ``x``; ``block(c)`` builds a recourse block."""

    n1: int
    first_rows: tuple
    make_block: Callable[[np.ndarray], Block]
    sign: float = 1.0

    def block(self, c) -> Block:
        blk = self.make_block(np.asarray(c, dtype=float))
        return blk if self.sign == 1.0 else blk.scaled(self.sign)

    def negated(self) -> "LinearEncoding":
        return replace(self, sign=-self.sign)

    def row_counts(self, c) -> tuple[int, int]:
        """(first-stage rows, rows per block)."""
        return self.first_rows[0].shape[0], self.block(c).A_x.shape[0]


def oracle_mip(encoding: LinearEncoding, c, fix: FixationSet) -> tuple[MipProblem, Block]:
    """MIP minimizing the encoded objective at ``c`` under ``fix`` (stated as a max of -f)."""
    blk = encoding.block(c)
    n1, k = encoding.n1, blk.size
    A1, s1, b1 = encoding.first_rows
    A = np.vstack([np.hstack([A1, np.zeros((A1.shape[0], k))]),
                   np.hstack([blk.A_x, blk.A_v])])
    lb = np.concatenate([np.zeros(n1), blk.lb])
    ub = np.concatenate([np.ones(n1), blk.ub])
    for i in fix.I0:
        ub[i] = 0.0
    for i in fix.I1:
        lb[i] = 1.0
    lp = LpProblem(-np.concatenate([blk.cost_x, blk.cost_v]), A, list(s1) + list(blk.senses),
                   np.concatenate([b1, blk.rhs]), lb, ub)
    bins = np.concatenate([np.arange(n1), n1 + np.flatnonzero(blk.binary)])
    return MipProblem(lp, bins), blk


@dataclass
class EncodingOracle:
    """Exact oracle solving the encoded deterministic problem with :func:`solve_mip`."""

    spec: ProblemSpec
    node_limit: Optional[int] = 100_000
    time_limit: Optional[float] = None
    thread_safe: bool = True

    def solve(self, c, fix: FixationSet) -> Optional[Solution]:
        if self.spec.encoding is None:
            raise ValueError(f"problem {self.spec.name!r} has no linear encoding")
        mip, blk = oracle_mip(self.spec.encoding, c, fix)
        res = solve_mip(mip, self.node_limit, self.time_limit)
        if res.status is MipStatus.INFEASIBLE:
            return None
        if res.status is not MipStatus.OPTIMAL:
            raise OracleError(f"MIP oracle stopped at a limit with gap {res.gap:g}")
        n1 = self.spec.n1
        x = np.round(res.x[:n1])
        z = self.spec.solution(x, blk.extract_y(res.x[n1:]))
        encoded = -res.objective + blk.const
        value = z.g + float(np.asarray(c) @ z.h)
        if abs(encoded - value) > EPS_ORACLE * (1.0 + abs(value)):
            raise OracleError(f"encoded objective {encoded:g} != evaluated {value:g}")
        return z


@dataclass
class EnumerationOracle:
    """Exact oracle by exhaustive search over ``spec.enumerate()``.

    Chunks are cached after the first pass when their total size stays below
    ``cache_limit`` floats.
    """

    spec: ProblemSpec
    cache_limit: int = 20_000_000
    thread_safe: bool = True
    _cache: Optional[list] = field(default=None, repr=False)
    _too_big: bool = field(default=False, repr=False)

    def _chunks(self):
        if self._cache is not None:
            return self._cache
        if self._too_big:
            return self.spec.enumerate()
        chunks, size = [], 0
        for chunk in self.spec.enumerate():
            size += chunk[3].size
            if size > self.cache_limit:
                self._too_big = True
                return self.spec.enumerate()
            chunks.append(chunk)
        self._cache = chunks
        return chunks

    def solve(self, c, fix: FixationSet) -> Optional[Solution]:
        c = np.asarray(c, dtype=float)
        best, best_val = None, np.inf
        for x, Y, G, H in self._chunks():
            if not fix.admits(x) or not G.size:
                continue
            vals = G + H @ c
            k = int(np.argmin(vals))
            if vals[k] < best_val:
                best_val, best = vals[k], (x, Y[k], G[k], H[k])
        if best is None:
            return None
        x, y, g, h = best
        return Solution(x, y, g, h)
