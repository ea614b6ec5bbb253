"""Lipschitz distance between finite metric spaces of equal size.

Every bijection between finite metric spaces is bi-Lipschitz, so the
distance is the minimum over permutations of
``log max(Dil(f), Dil(f^-1))``, i.e. of the largest ``|log ratio|`` over
pairs of points. Spaces of different sizes admit no bijection and are at
infinite distance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._search import accept, rng_for, temperature
from .correspondence import BudgetExceeded
from .metric_core import FiniteMetricSpace

EXACT_MAX_N = 10


class SizeMismatch(ValueError):
    pass


class SingletonSpace(ValueError):
    pass


@dataclass(frozen=True)
class Bijection:
    perm: tuple

    def __post_init__(self):
        perm = tuple(int(i) for i in self.perm)
        if sorted(perm) != list(range(len(perm))):
            raise ValueError(f"not a permutation: {perm}")
        object.__setattr__(self, "perm", perm)

    def inverse(self) -> "Bijection":
        inv = [0] * len(self.perm)
        for i, j in enumerate(self.perm):
            inv[j] = i
        return Bijection(inv)


@dataclass(frozen=True)
class LipResult:
    value: float
    witness: Bijection | None
    method: str

    @property
    def infinite(self) -> bool:
        return math.isinf(self.value)


def _log_ratio(dx, dy):
    """``|log(dy/dx)|`` off the diagonal, zero on it."""
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.abs(np.log(dy) - np.log(dx))
    np.fill_diagonal(r, 0.0)
    return r


def dilation(f: Bijection, X: FiniteMetricSpace, Y: FiniteMetricSpace) -> float:
    if X.n != Y.n:
        raise SizeMismatch(f"|X| = {X.n} but |Y| = {Y.n}")
    if X.n < 2:
        raise SingletonSpace("dilation needs at least one pair of distinct points")
    p = np.asarray(f.perm)
    iu = np.triu_indices(X.n, 1)
    return float((Y.dist[np.ix_(p, p)][iu] / X.dist[iu]).max())


def log_distortion(perm, X: FiniteMetricSpace, Y: FiniteMetricSpace) -> float:
    """``log max(Dil(f), Dil(f^-1))`` for the bijection ``perm``."""
    if X.n < 2:
        return 0.0
    p = np.asarray(perm)
    return float(_log_ratio(X.dist, Y.dist[np.ix_(p, p)]).max())


def _infinite():
    return LipResult(math.inf, None, "exact")


def lip_exact(X: FiniteMetricSpace, Y: FiniteMetricSpace) -> LipResult:
    """Branch and bound over permutations in lexicographic order."""
    n = X.n
    if n != Y.n:
        return _infinite()
    if n > EXACT_MAX_N:
        raise BudgetExceeded(f"n = {n} > {EXACT_MAX_N}; use lip_bound")
    if n == 1:
        return LipResult(0.0, Bijection((0,)), "exact")
    lx = np.log(np.where(X.dist > 0, X.dist, 1.0))
    ly = np.log(np.where(Y.dist > 0, Y.dist, 1.0))
    ident = list(range(n))
    best = [log_distortion(ident, X, Y), ident]
    cur: list = []
    used = [False] * n

    def rec(i, worst):
        if i == n:
            best[0] = worst
            best[1] = list(cur)
            return
        for j in range(n):
            if used[j]:
                continue
            nxt = worst
            if i:
                nxt = max(worst, float(np.abs(ly[j, cur] - lx[i, :i]).max()))
            if nxt >= best[0]:
                continue
            used[j] = True
            cur.append(j)
            rec(i + 1, nxt)
            cur.pop()
            used[j] = False

    if best[0] > 0:
        rec(0, 0.0)
    return LipResult(best[0], Bijection(best[1]), "exact")


def lip_bound(X: FiniteMetricSpace, Y: FiniteMetricSpace, budget: int = 2000,
              seed: int = 0, start=None) -> LipResult:
    """Annealing over permutations with transposition moves.

    ``start`` optionally replaces the identity as the initial bijection.
    """
    n = X.n
    if n != Y.n:
        return LipResult(math.inf, None, "heuristic")
    if budget < 1:
        raise ValueError("budget must be >= 1")
    perm = np.arange(n) if start is None else np.array(start, dtype=int)
    if n == 1:
        return LipResult(0.0, Bijection(perm), "heuristic")
    lx = np.log(np.where(X.dist > 0, X.dist, 1.0))
    ly = np.log(np.where(Y.dist > 0, Y.dist, 1.0))
    D = np.abs(ly[np.ix_(perm, perm)] - lx)
    cur = float(D.max())
    best, best_perm = cur, perm.copy()
    rng = rng_for(seed, 3)
    t0 = 0.1 * max(cur, 1e-12)
    for it in range(budget):
        if best == 0.0:
            break
        a, b = rng.choice(n, size=2, replace=False)
        perm[a], perm[b] = perm[b], perm[a]
        old_a, old_b = D[a].copy(), D[b].copy()
        ra = np.abs(ly[perm[a], perm] - lx[a])
        rb = np.abs(ly[perm[b], perm] - lx[b])
        D[a], D[:, a] = ra, ra
        D[b], D[:, b] = rb, rb
        val = float(D.max())
        if accept(val - cur, temperature(it, t0), rng.random()):
            cur = val
            if val < best:
                best, best_perm = val, perm.copy()
        else:
            perm[a], perm[b] = perm[b], perm[a]
            D[a], D[:, a] = old_a, old_a
            D[b], D[:, b] = old_b, old_b
    return LipResult(best, Bijection(best_perm), "heuristic")


def gh_from_lip(rho_l: float, diam: float) -> float:
    """Upper bound on GH from a Lipschitz distance.

    The graph of a bijection with ratios in ``[1/K, K]`` is a correspondence
    of distortion at most ``(K - 1) * diam``.
    """
    return 0.5 * math.expm1(rho_l) * diam
