"""Finite metric spaces and their elementary functionals."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.sparse.csgraph import shortest_path


class MetricAxiomError(ValueError):
    """A distance matrix fails one of the metric axioms."""

    axiom = "metric"

    def __init__(self, *indices: int, detail: str = ""):
        self.indices = tuple(int(i) for i in indices)
        msg = f"{type(self).__name__}{self.indices}"
        if detail:
            msg = f"{msg}: {detail}"
        super().__init__(msg)


ValidationError = MetricAxiomError


class NotSquare(MetricAxiomError):
    pass


class Asymmetric(MetricAxiomError):
    pass


class NonzeroDiagonal(MetricAxiomError):
    pass


class NonpositiveOffDiagonal(MetricAxiomError):
    pass


class TriangleViolation(MetricAxiomError):
    """``dist[i][k] > dist[i][j] + dist[j][k]``; indices are ``(i, k, j)``."""


class NonpositiveScale(ValueError):
    pass


class IndexOutOfRange(IndexError):
    pass


class DuplicateIndex(ValueError):
    pass


@dataclass(frozen=True)
class Tolerance:
    abs: float = 1e-9
    rel: float = 1e-9

    def __post_init__(self):
        if self.abs < 0 or self.rel < 0:
            raise ValueError("tolerances must be nonnegative")
        if self.abs == 0 and self.rel == 0:
            raise ValueError("at least one tolerance must be positive")

    def allows(self, excess: float, scale: float) -> bool:
        return excess <= self.abs + self.rel * abs(scale)


TRIANGLE_TOL = Tolerance(abs=0.0, rel=1e-9)


def _readonly(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class FiniteMetricSpace:
    """A labelled point set with a full symmetric distance matrix.

    Instances are normally built through :func:`validate`. Rescaling keeps
    the unscaled matrix and a cumulative factor so that repeated rescaling
    composes exactly.
    """

    labels: tuple
    base: np.ndarray = field(repr=False)
    scale: float = 1.0
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "base", _readonly(self.base))
        object.__setattr__(self, "_dist", _readonly(self.base * self.scale)
                           if self.scale != 1.0 else self.base)

    @property
    def dist(self) -> np.ndarray:
        return self._dist

    @property
    def n(self) -> int:
        return len(self.labels)

    def __len__(self):
        return self.n

    def __eq__(self, other):
        if not isinstance(other, FiniteMetricSpace):
            return NotImplemented
        return self.labels == other.labels and np.array_equal(self.dist, other.dist)

    def __hash__(self):
        return hash((self.labels, self.dist.tobytes()))

    def __repr__(self):
        return f"FiniteMetricSpace(n={self.n}, diameter={diameter(self):.6g})"


def check_triangle(d: np.ndarray, tol: Tolerance = TRIANGLE_TOL):
    """Return the first ``(i, k, j)`` with ``d[i,k] > d[i,j] + d[j,k]`` or None.

    Pairs are scanned in row-major order over ``i < k``; ``j`` is the
    smallest index witnessing the violation.
    """
    n = d.shape[0]
    rows = range(n)
    if n > 64:
        # Shortest-path closure is below every one-hop detour, so rows where
        # it agrees with d cannot hold a violation.
        closure = shortest_path(d, method="FW", directed=False)
        suspect = d > closure + tol.abs + tol.rel * closure
        rows = np.flatnonzero(suspect.any(axis=1))
    for i in rows:
        # via[j, k] = d[i, j] + d[j, k]
        via = d[i][:, None] + d
        slack = tol.abs + tol.rel * via
        bad = d[i][None, :] > via + slack
        if bad.any():
            # violations with k < i were already reported from row k
            k = int(np.flatnonzero(bad.any(axis=0))[0])
            j = int(np.flatnonzero(bad[:, k])[0])
            return int(i), k, j
    return None


def validate(matrix, labels: Sequence | None = None, name: str = "",
             tol: Tolerance = TRIANGLE_TOL) -> FiniteMetricSpace:
    """Check the metric axioms and wrap ``matrix`` as a space.

    Raises the :class:`MetricAxiomError` subclass for the first violated
    axiom, in the order: symmetry, zero diagonal, positive off-diagonal,
    triangle inequality.
    """
    d = np.asarray(matrix, dtype=float)
    if d.ndim != 2 or d.shape[0] != d.shape[1] or d.shape[0] < 1:
        raise NotSquare(*d.shape, detail="distance matrix must be square, n >= 1")
    if not np.all(np.isfinite(d)):
        i, j = np.argwhere(~np.isfinite(d))[0]
        raise NonpositiveOffDiagonal(i, j, detail="non-finite distance")
    n = d.shape[0]
    asym = np.argwhere(d != d.T)
    if len(asym):
        i, j = asym[0]
        raise Asymmetric(i, j, detail=f"{float(d[i, j])!r} != {float(d[j, i])!r}")
    diag = np.flatnonzero(np.diag(d) != 0)
    if len(diag):
        raise NonzeroDiagonal(diag[0], detail=f"{float(d[diag[0], diag[0]])!r}")
    off = (d <= 0) & ~np.eye(n, dtype=bool)
    if off.any():
        i, j = np.argwhere(off)[0]
        raise NonpositiveOffDiagonal(i, j, detail=f"{float(d[i, j])!r}")
    bad = check_triangle(d, tol)
    if bad is not None:
        i, k, j = bad
        raise TriangleViolation(i, k, j, detail=f"{float(d[i, k])!r} > {float(d[i, j])!r} + {float(d[j, k])!r}")
    if labels is None:
        labels = [str(i) for i in range(n)]
    if len(labels) != n:
        raise ValueError(f"{len(labels)} labels for {n} points")
    return FiniteMetricSpace(tuple(labels), d, name=name)


def diameter(X: FiniteMetricSpace) -> float:
    return float(X.dist.max())


def rescale(X: FiniteMetricSpace, c: float) -> FiniteMetricSpace:
    if not c > 0:
        raise NonpositiveScale(f"scale must be positive, got {c!r}")
    return FiniteMetricSpace(X.labels, X.base, X.scale * c, X.name)


def subsample(X: FiniteMetricSpace, indices) -> FiniteMetricSpace:
    idx = [int(i) for i in indices]
    if not idx:
        raise ValueError("indices must be nonempty")
    for i in idx:
        if not 0 <= i < X.n:
            raise IndexOutOfRange(f"index {i} outside [0, {X.n})")
    if len(set(idx)) != len(idx):
        seen = set()
        dup = next(i for i in idx if i in seen or seen.add(i))
        raise DuplicateIndex(f"index {dup} repeated")
    sel = np.ix_(idx, idx)
    return FiniteMetricSpace(tuple(X.labels[i] for i in idx), X.base[sel], X.scale, X.name)


def from_points(points, labels=None, name: str = "") -> FiniteMetricSpace:
    """Euclidean distance matrix of a point cloud, validated."""
    p = np.asarray(points, dtype=float)
    if p.ndim == 1:
        p = p[:, None]
    d = np.sqrt(((p[:, None, :] - p[None, :, :]) ** 2).sum(-1))
    d = 0.5 * (d + d.T)
    np.fill_diagonal(d, 0.0)
    return validate(d, labels=labels, name=name)
