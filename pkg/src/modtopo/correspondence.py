"""Gromov-Hausdorff distance of finite metric spaces via correspondences.

The Gromov-Hausdorff distance equals half the smallest distortion of a
correspondence ``R`` between ``X`` and ``Y``, a relation whose projections
onto both factors are surjective. Distortion only grows when pairs are
added, so it suffices to search correspondences of the form
``graph(f) ∪ graph(g)^T`` with ``f: X -> Y`` and ``g`` defined on the points
of ``Y`` missed by ``f``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._search import accept, rng_for, start_map, temperature
from .metric_core import FiniteMetricSpace, diameter

EXACT_BUDGET = 25


class InvalidCorrespondence(ValueError):
    pass


class BudgetExceeded(ValueError):
    pass


@dataclass(frozen=True)
class Correspondence:
    pairs: frozenset

    def __post_init__(self):
        object.__setattr__(self, "pairs", frozenset((int(i), int(j)) for i, j in self.pairs))

    @classmethod
    def from_maps(cls, f, g) -> "Correspondence":
        """``{(i, f[i])} ∪ {(g[j], j)}``."""
        return cls({(i, int(j)) for i, j in enumerate(f)} | {(int(i), j) for j, i in enumerate(g)})

    def sorted_pairs(self) -> list:
        return sorted(self.pairs)

    def check(self, nx: int, ny: int):
        xs = {i for i, _ in self.pairs}
        ys = {j for _, j in self.pairs}
        if any(not (0 <= i < nx and 0 <= j < ny) for i, j in self.pairs):
            raise InvalidCorrespondence("pair index out of range")
        if xs != set(range(nx)):
            raise InvalidCorrespondence(f"points of X not covered: {sorted(set(range(nx)) - xs)}")
        if ys != set(range(ny)):
            raise InvalidCorrespondence(f"points of Y not covered: {sorted(set(range(ny)) - ys)}")


@dataclass(frozen=True)
class GhResult:
    lower: float
    upper: float
    witness: Correspondence
    method: str

    @property
    def value(self) -> float:
        return self.upper


def _pair_distortion(px, py, dx, dy) -> float:
    px = np.asarray(px)
    py = np.asarray(py)
    return float(np.abs(dx[np.ix_(px, px)] - dy[np.ix_(py, py)]).max())


def distortion(R: Correspondence, X: FiniteMetricSpace, Y: FiniteMetricSpace) -> float:
    R.check(X.n, Y.n)
    pairs = R.sorted_pairs()
    return _pair_distortion([p[0] for p in pairs], [p[1] for p in pairs], X.dist, Y.dist)


def gh_exact(X: FiniteMetricSpace, Y: FiniteMetricSpace) -> GhResult:
    """Exact distance by branch and bound over minimal correspondences."""
    nx, ny = X.n, Y.n
    if nx * ny > EXACT_BUDGET:
        raise BudgetExceeded(f"|X|*|Y| = {nx * ny} > {EXACT_BUDGET}; use gh_bound")
    dx, dy = X.dist, Y.dist

    # Seed the incumbent with the start used by the heuristic.
    f0 = start_map(nx, ny)
    g0 = start_map(ny, nx)
    best = [_pair_distortion(list(range(nx)) + list(g0), list(f0) + list(range(ny)), dx, dy)]
    best_pairs = [Correspondence.from_maps(f0, g0)]

    px: list = []
    py: list = []

    def extend(i, j, cur):
        # distortion added by pair (i, j) against the pairs already chosen
        if px:
            m = float(np.abs(dx[i, px] - dy[j, py]).max())
            return max(cur, m)
        return cur

    def assign_y(order, pos, cur):
        if cur >= best[0]:
            return
        if pos == len(order):
            best[0] = cur
            best_pairs[0] = Correspondence(zip(px, py))
            return
        j = order[pos]
        for i in range(nx):
            nxt = extend(i, j, cur)
            if nxt >= best[0]:
                continue
            px.append(i)
            py.append(j)
            assign_y(order, pos + 1, nxt)
            px.pop()
            py.pop()

    def assign_x(i, cur):
        if cur >= best[0]:
            return
        if i == nx:
            missed = sorted(set(range(ny)) - set(py))
            assign_y(missed, 0, cur)
            return
        for j in range(ny):
            nxt = extend(i, j, cur)
            if nxt >= best[0]:
                continue
            px.append(i)
            py.append(j)
            assign_x(i + 1, nxt)
            px.pop()
            py.pop()

    if best[0] > 0:
        assign_x(0, 0.0)
    value = 0.5 * best[0]
    return GhResult(value, value, best_pairs[0], "exact")


def _hausdorff_rows(dx: np.ndarray, dy: np.ndarray) -> np.ndarray:
    """``H[x, y]`` = max over ``x'`` of min over ``y'`` of ``|dx[x,x'] - dy[y,y']|``.

    One direction of the Hausdorff distance between the distance profiles
    of ``x`` and ``y``.
    """
    nx, ny = dx.shape[0], dy.shape[0]
    sy = np.sort(dy, axis=1)
    span = 2.0 * max(dx.max(), dy.max()) + 1.0
    flat = (sy + span * np.arange(ny)[:, None]).ravel()
    out = np.empty((nx, ny))
    for x in range(nx):
        q = dx[x][None, :] + span * np.arange(ny)[:, None]  # (ny, nx)
        pos = np.searchsorted(flat, q.ravel()).reshape(ny, nx)
        lo_idx = np.clip(pos - 1, 0, None)
        hi_idx = np.clip(pos, None, flat.size - 1)
        row_start = (np.arange(ny) * ny)[:, None]
        lo_idx = np.maximum(lo_idx, row_start)
        hi_idx = np.minimum(hi_idx, row_start + ny - 1)
        gap = np.minimum(np.abs(q - flat[lo_idx]), np.abs(q - flat[hi_idx]))
        out[x] = gap.max(axis=1)
    return out


def gh_lower_bound(X: FiniteMetricSpace, Y: FiniteMetricSpace) -> float:
    """Certified lower bound on the GH distance.

    If ``(x, y)`` lies in a correspondence ``R`` then every ``x'`` has a
    partner ``y'`` with ``|d(x,x') - d(y,y')| <= dis(R)`` and vice versa, so
    the Hausdorff distance between the two distance profiles is at most
    ``dis(R)``. Combined with the diameter difference.
    """
    dx, dy = X.dist, Y.dist
    diam = abs(diameter(X) - diameter(Y))
    h = np.maximum(_hausdorff_rows(dx, dy), _hausdorff_rows(dy, dx).T)
    profile = max(h.min(axis=1).max(), h.min(axis=0).max())
    return 0.5 * max(diam, float(profile))


def gh_bound(X: FiniteMetricSpace, Y: FiniteMetricSpace, budget: int = 2000,
             seed: int = 0, lower: bool = True) -> GhResult:
    """Simulated annealing over pairs of maps ``f: X -> Y``, ``g: Y -> X``.

    ``upper`` is half the distortion of ``graph(f) ∪ graph(g)^T`` for the
    best pair of maps found; ``lower`` is :func:`gh_lower_bound`.
    """
    if budget < 1:
        raise ValueError("budget must be >= 1")
    nx, ny = X.n, Y.n
    dx, dy = X.dist, Y.dist
    m = nx + ny
    # pair a < nx is (a, f[a]); pair nx + b is (g[b], b)
    px = np.concatenate([np.arange(nx), start_map(ny, nx)])
    py = np.concatenate([start_map(nx, ny), np.arange(ny)])
    D = np.abs(dx[np.ix_(px, px)] - dy[np.ix_(py, py)])
    cur = float(D.max())
    best = cur
    best_px, best_py = px.copy(), py.copy()
    rng = rng_for(seed, 1)
    t0 = 0.1 * max(diameter(X), diameter(Y), 1e-12)
    for it in range(budget):
        if best == 0.0:
            break
        a = int(rng.integers(m))
        if a < nx:
            if ny == 1:
                continue
            old = py[a]
            new = int(rng.integers(ny - 1))
            new += new >= old
            row = np.abs(dx[px[a], px] - dy[new, py])
            row[a] = 0.0
            old_row = D[a].copy()
            D[a] = row
            D[:, a] = row
            py[a] = new
        else:
            if nx == 1:
                continue
            old = px[a]
            new = int(rng.integers(nx - 1))
            new += new >= old
            row = np.abs(dx[new, px] - dy[py[a], py])
            row[a] = 0.0
            old_row = D[a].copy()
            D[a] = row
            D[:, a] = row
            px[a] = new
        val = float(D.max())
        u = rng.random()
        if accept(val - cur, temperature(it, t0), u):
            cur = val
            if val < best:
                best = val
                best_px, best_py = px.copy(), py.copy()
        else:
            D[a] = old_row
            D[:, a] = old_row
            if a < nx:
                py[a] = old
            else:
                px[a] = old
    witness = Correspondence(zip(best_px.tolist(), best_py.tolist()))
    lo = gh_lower_bound(X, Y) if lower else 0.5 * abs(diameter(X) - diameter(Y))
    up = 0.5 * best
    return GhResult(min(lo, up), up, witness, "heuristic")
