"""Discretized closed Riemannian manifolds.

A metric is ``e^{2 phi} g`` with ``g`` the flat metric on a torus
``[0, lx) x [0, ly)`` or the round metric on a sphere of given radius.
Distances are shortest paths in a k-nearest-neighbour graph whose edge
weights integrate ``e^{phi}`` along the base geodesic segment.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components, shortest_path

from ._search import rng_for
from .metric_core import FiniteMetricSpace, validate

SIMPSON_PANELS = 8
DEFAULT_KNN = 8


class TooFewPoints(ValueError):
    pass


class CoincidentPoints(ValueError):
    pass


class DisconnectedGraph(ValueError):
    def __init__(self, n_components: int, labels):
        self.n_components = n_components
        self.component_labels = labels
        super().__init__(f"knn graph has {n_components} connected components")


@dataclass(frozen=True)
class FlatTorus:
    lx: float = 1.0
    ly: float = 1.0

    def __post_init__(self):
        if not (self.lx > 0 and self.ly > 0):
            raise ValueError("torus side lengths must be positive")

    @property
    def dim(self) -> int:
        return 2

    @property
    def periods(self) -> np.ndarray:
        return np.array([self.lx, self.ly])


@dataclass(frozen=True)
class RoundSphere:
    radius: float = 1.0

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("sphere radius must be positive")

    @property
    def dim(self) -> int:
        return 3


@dataclass(frozen=True)
class Bump:
    center: tuple
    height: float
    width: float

    def __post_init__(self):
        c = np.asarray(self.center, dtype=float)
        c = c / np.linalg.norm(c)
        object.__setattr__(self, "center", tuple(float(v) for v in c))
        if not self.width > 0:
            raise ValueError("bump width must be positive")


@dataclass(frozen=True)
class ConformalFactor:
    """The function ``phi`` of the metric ``e^{2 phi} g``.

    On the torus, ``fourier`` maps a frequency pair ``(p, q)`` to a real
    coefficient. Pairs in the upper half-plane (``p > 0``, or ``p == 0`` and
    ``q >= 0``) multiply ``cos(2 pi (p x / lx + q y / ly))``; the remaining
    pairs multiply ``sin`` of the negated frequency. ``(0, 0)`` is the
    constant term. On the sphere, ``bumps`` are Gaussian bumps in chordal
    distance on the unit sphere.
    """

    fourier: tuple = ()
    bumps: tuple = ()

    def __post_init__(self):
        items = self.fourier.items() if isinstance(self.fourier, dict) else self.fourier
        four = tuple(sorted(((int(p), int(q)), float(c)) for (p, q), c in items))
        object.__setattr__(self, "fourier", four)
        object.__setattr__(self, "bumps", tuple(
            b if isinstance(b, Bump) else Bump(**b) for b in self.bumps))

    @classmethod
    def constant(cls, value: float) -> "ConformalFactor":
        return cls({(0, 0): value})

    def is_zero(self) -> bool:
        return all(c == 0 for _, c in self.fourier) and all(b.height == 0 for b in self.bumps)

    def __call__(self, base, pts: np.ndarray) -> np.ndarray:
        pts = np.asarray(pts, dtype=float)
        out = np.zeros(pts.shape[:-1])
        if isinstance(base, FlatTorus):
            u = pts[..., 0] / base.lx
            v = pts[..., 1] / base.ly
            for (p, q), c in self.fourier:
                if c == 0:
                    continue
                if p > 0 or (p == 0 and q >= 0):
                    out += c * np.cos(2 * np.pi * (p * u + q * v))
                else:
                    out += c * np.sin(2 * np.pi * (-p * u - q * v))
            return out
        const = dict(self.fourier).get((0, 0), 0.0)
        if len(self.fourier) > (1 if (0, 0) in dict(self.fourier) else 0):
            raise ValueError("sphere conformal factors accept only the constant Fourier term")
        out += const
        unit = pts / np.linalg.norm(pts, axis=-1, keepdims=True)
        for b in self.bumps:
            c = np.asarray(b.center)
            r2 = ((unit - c) ** 2).sum(-1)
            out += b.height * np.exp(-r2 / (2 * b.width**2))
        return out


@dataclass(frozen=True)
class MetricField:
    base: FlatTorus | RoundSphere
    conformal: ConformalFactor = field(default_factory=ConformalFactor)

    def phi(self, pts) -> np.ndarray:
        return self.conformal(self.base, pts)


def _grid_shape(n: int):
    nx = int(math.isqrt(n))
    while n % nx:
        nx -= 1
    return nx, n // nx


def sample(field: MetricField, n: int, mode: str = "grid", seed: int = 0) -> np.ndarray:
    """``n`` points in the parameter domain, deterministic in ``(mode, seed)``."""
    if n < 4:
        raise TooFewPoints(f"need at least 4 points, got {n}")
    base = field.base
    if mode not in ("grid", "random"):
        raise ValueError(f"unknown sampling mode {mode!r}")
    if isinstance(base, FlatTorus):
        if mode == "grid":
            nx, ny = _grid_shape(n)
            i, j = np.meshgrid(np.arange(nx), np.arange(ny), indexing="ij")
            return np.column_stack([i.ravel() * base.lx / nx, j.ravel() * base.ly / ny])
        return rng_for(seed, 10).random((n, 2)) * base.periods
    if mode == "grid":
        # Fibonacci lattice
        k = np.arange(n) + 0.5
        z = 1 - 2 * k / n
        r = np.sqrt(1 - z * z)
        theta = np.pi * (1 + 5**0.5) * k
        pts = np.column_stack([r * np.cos(theta), r * np.sin(theta), z])
    else:
        pts = rng_for(seed, 11).normal(size=(n, 3))
        pts /= np.linalg.norm(pts, axis=1, keepdims=True)
    return pts * base.radius


def wrap(base: FlatTorus, x: np.ndarray) -> np.ndarray:
    """Reduce torus coordinates into ``[0, lx) x [0, ly)``."""
    out = np.mod(x, base.periods)
    # mod can return the period itself for tiny negative inputs
    out[out >= base.periods] = 0.0
    return out


def torus_displacement(base: FlatTorus, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Shortest lattice representative of ``b - a``."""
    d = np.asarray(b, dtype=float) - np.asarray(a, dtype=float)
    L = base.periods
    return d - L * np.round(d / L)


def base_distance(base, P: np.ndarray, Q: np.ndarray) -> np.ndarray:
    """Pairwise base-metric distances, shape ``(len(P), len(Q))``."""
    P = np.asarray(P, dtype=float)
    Q = np.asarray(Q, dtype=float)
    if isinstance(base, FlatTorus):
        d = torus_displacement(base, P[:, None, :], Q[None, :, :])
        return np.sqrt((d**2).sum(-1))
    R = base.radius
    c = np.clip((P @ Q.T) / (R * R), -1.0, 1.0)
    return R * np.arccos(c)


def _segments(base, a: np.ndarray, b: np.ndarray, t: np.ndarray):
    """Points at fractions ``t`` along base geodesics and the segment lengths."""
    if isinstance(base, FlatTorus):
        d = torus_displacement(base, a, b)
        pts = a[:, None, :] + t[None, :, None] * d[:, None, :]
        return pts, np.sqrt((d**2).sum(-1))
    R = base.radius
    ua = a / np.linalg.norm(a, axis=-1, keepdims=True)
    ub = b / np.linalg.norm(b, axis=-1, keepdims=True)
    cos = np.clip((ua * ub).sum(-1), -1.0, 1.0)
    theta = np.arccos(cos)
    # unit tangent at a pointing toward b
    w = ub - cos[:, None] * ua
    wn = np.linalg.norm(w, axis=-1)
    anti = wn < 1e-12
    if anti.any():
        # antipodal: any great circle through a; pick one deterministically
        e = np.eye(3)[np.argmin(np.abs(ua[anti]), axis=1)]
        w[anti] = e - (e * ua[anti]).sum(-1, keepdims=True) * ua[anti]
        wn[anti] = np.linalg.norm(w[anti], axis=-1)
    w = w / np.where(wn > 0, wn, 1.0)[:, None]
    ang = t[None, :] * theta[:, None]
    pts = R * (np.cos(ang)[..., None] * ua[:, None, :] + np.sin(ang)[..., None] * w[:, None, :])
    return pts, R * theta


def edge_lengths(field: MetricField, a, b) -> np.ndarray:
    """Vectorized :func:`edge_length` over rows of ``a`` and ``b``."""
    a = np.atleast_2d(np.asarray(a, dtype=float))
    b = np.atleast_2d(np.asarray(b, dtype=float))
    t = np.linspace(0.0, 1.0, SIMPSON_PANELS + 1)
    pts, length = _segments(field.base, a, b, t)
    if field.conformal.is_zero():
        return length
    w = np.ones(SIMPSON_PANELS + 1)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    w /= 3.0 * SIMPSON_PANELS
    return length * (np.exp(field.phi(pts)) @ w)


def edge_length(field: MetricField, a, b) -> float:
    """Length of the base geodesic segment ``a -> b`` under ``e^{2 phi} g``."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if float(base_distance(field.base, a[None], b[None])[0, 0]) == 0.0:
        raise CoincidentPoints(f"{a.tolist()} and {b.tolist()} coincide")
    return float(edge_lengths(field, a[None], b[None])[0])


@dataclass(frozen=True, eq=False)
class SampledManifold:
    field: MetricField
    params: np.ndarray
    space: FiniteMetricSpace
    knn: int

    @property
    def n(self) -> int:
        return len(self.params)


def knn_edges(base, params: np.ndarray, knn: int) -> np.ndarray:
    """Undirected edges ``(i, j)``, ``i < j``, of the symmetrized knn graph.

    Ties in distance are broken by index.
    """
    n = len(params)
    D = base_distance(base, params, params)
    np.fill_diagonal(D, np.inf)
    k = min(knn, n - 1)
    nbr = np.argsort(D, axis=1, kind="stable")[:, :k]
    i = np.repeat(np.arange(n), k)
    j = nbr.ravel()
    e = np.unique(np.sort(np.column_stack([i, j]), axis=1), axis=0)
    return e


def geodesic_space(field: MetricField, params, knn: int = DEFAULT_KNN,
                   name: str = "") -> SampledManifold:
    """All-pairs graph-geodesic distances over the knn graph of ``params``."""
    if knn < 3:
        raise ValueError("knn must be >= 3")
    params = np.asarray(params, dtype=float)
    n = len(params)
    e = knn_edges(field.base, params, knn)
    w = edge_lengths(field, params[e[:, 0]], params[e[:, 1]])
    if np.any(w <= 0):
        raise CoincidentPoints("duplicate sample points")
    G = coo_matrix((w, (e[:, 0], e[:, 1])), shape=(n, n)).tocsr()
    ncomp, comp = connected_components(G, directed=False)
    if ncomp > 1:
        raise DisconnectedGraph(ncomp, comp)
    d = shortest_path(G, method="D", directed=False)
    d = np.minimum(d, d.T)
    np.fill_diagonal(d, 0.0)
    labels = [f"p{i}" for i in range(n)]
    space = validate(d, labels=labels, name=name)
    p = params.copy()
    p.setflags(write=False)
    return SampledManifold(field, p, space, knn)

