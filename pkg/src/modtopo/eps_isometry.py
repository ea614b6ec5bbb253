"""The epsilon-isometry distance between finite metric spaces.

A map ``f: X -> Y`` is an epsilon-isometry when its additive distortion
``max |d_X(a,b) - d_Y(f(a),f(b))|`` is at most epsilon. The distance is the
least epsilon admitting epsilon-isometries in both directions; over finite
spaces the map sets are finite, so it is the larger of the two
one-directional minimal distortions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._search import accept, rng_for, start_map, temperature
from .correspondence import BudgetExceeded
from .metric_core import FiniteMetricSpace, diameter

EXACT_BUDGET = 2 * 10**7


class InvalidMap(ValueError):
    pass


@dataclass(frozen=True)
class PointMap:
    assignment: tuple

    def __post_init__(self):
        object.__setattr__(self, "assignment", tuple(int(j) for j in self.assignment))

    def check(self, nx: int, ny: int):
        if len(self.assignment) != nx:
            raise InvalidMap(f"map has {len(self.assignment)} entries for {nx} points")
        bad = [j for j in self.assignment if not 0 <= j < ny]
        if bad:
            raise InvalidMap(f"image index {bad[0]} outside [0, {ny})")


@dataclass(frozen=True)
class EpsResult:
    value: float
    witness_xy: PointMap
    witness_yx: PointMap
    method: str

    @property
    def is_upper_bound(self) -> bool:
        return self.method != "exact"


def _distortion(f, dx, dy) -> float:
    f = np.asarray(f)
    return float(np.abs(dx - dy[np.ix_(f, f)]).max())


def additive_distortion(f: PointMap, X: FiniteMetricSpace, Y: FiniteMetricSpace) -> float:
    f.check(X.n, Y.n)
    return _distortion(f.assignment, X.dist, Y.dist)


def min_distortion_map(dx: np.ndarray, dy: np.ndarray):
    """Branch and bound over all maps, as base-``|Y|`` counters.

    Returns ``(distortion, assignment)`` of a minimizer.
    """
    nx, ny = dx.shape[0], dy.shape[0]
    f = start_map(nx, ny)
    best = [_distortion(f, dx, dy), f.tolist()]
    cur_map: list = []

    def rec(i, cur):
        if i == nx:
            best[0] = cur
            best[1] = list(cur_map)
            return
        for j in range(ny):
            if i:
                nxt = max(cur, float(np.abs(dx[i, :i] - dy[j, cur_map]).max()))
            else:
                nxt = cur
            if nxt >= best[0]:
                continue
            cur_map.append(j)
            rec(i + 1, nxt)
            cur_map.pop()

    if best[0] > 0:
        rec(0, 0.0)
    return best[0], best[1]


def eps_exact(X: FiniteMetricSpace, Y: FiniteMetricSpace) -> EpsResult:
    nx, ny = X.n, Y.n
    # compare in float to avoid building huge integers
    if float(ny) ** nx + float(nx) ** ny > EXACT_BUDGET:
        raise BudgetExceeded(f"|Y|^|X| + |X|^|Y| exceeds {EXACT_BUDGET:.0e}; use eps_bound")
    a, f = min_distortion_map(X.dist, Y.dist)
    b, g = min_distortion_map(Y.dist, X.dist)
    return EpsResult(max(a, b), PointMap(f), PointMap(g), "exact")


def _anneal_map(dx, dy, budget, rng, t0):
    nx, ny = dx.shape[0], dy.shape[0]
    f = start_map(nx, ny)
    D = np.abs(dx - dy[np.ix_(f, f)])
    cur = float(D.max())
    best, best_f = cur, f.copy()
    for it in range(budget):
        if best == 0.0 or ny == 1:
            break
        a = int(rng.integers(nx))
        old = f[a]
        new = int(rng.integers(ny - 1))
        new += new >= old
        f[a] = new
        row = np.abs(dx[a] - dy[new, f])
        old_row = D[a].copy()
        D[a] = row
        D[:, a] = row
        val = float(D.max())
        if accept(val - cur, temperature(it, t0), rng.random()):
            cur = val
            if val < best:
                best, best_f = val, f.copy()
        else:
            f[a] = old
            D[a] = old_row
            D[:, a] = old_row
    return best, best_f


def eps_bound(X: FiniteMetricSpace, Y: FiniteMetricSpace, budget: int = 2000,
              seed: int = 0) -> EpsResult:
    """Upper bound by annealing one point's image at a time, both directions."""
    if budget < 1:
        raise ValueError("budget must be >= 1")
    t0 = 0.1 * max(diameter(X), diameter(Y), 1e-12)
    a, f = _anneal_map(X.dist, Y.dist, budget, rng_for(seed, 2, 0), t0)
    b, g = _anneal_map(Y.dist, X.dist, budget, rng_for(seed, 2, 1), t0)
    return EpsResult(max(a, b), PointMap(f), PointMap(g), "heuristic")
