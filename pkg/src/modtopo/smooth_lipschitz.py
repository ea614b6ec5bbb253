"""Smooth-Lipschitz distance estimated over a finite family of diffeomorphisms.

A family member is an affine part (a unimodular lattice map plus a
translation on the torus, a rotation on the sphere) followed by the time-T
flow of a smooth vector field (truncated Fourier series on the torus,
tangent Gaussian bumps on the sphere). The two-sided Lipschitz constant of
a member is measured on the sample points of a pair of sampled manifolds
sharing the same parameter domain.

Images ``f(x_i)`` generally miss the samples. They are snapped to a
bijection ``sigma`` onto the samples (nearest sample, resolved by a
minimum-cost assignment when two images share a nearest sample). Each snap
moves a point by a known length ``pad_i`` under the target metric, so the
measured ratio ``d2(sigma_i, sigma_j) / d1(x_i, x_j)`` is within a relative
``(pad_i + pad_j) / d2(sigma_i, sigma_j)`` of the true one. That slack is
reported as ``padding``: the true constant lies in
``[k / (1 + padding), k * (1 + padding)]``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import linear_sum_assignment

from ._search import rng_for
from .manifold import (FlatTorus, RoundSphere, SampledManifold, base_distance,
                       edge_lengths, torus_displacement, wrap)

RK4_STEPS = 64


class DomainMismatch(ValueError):
    pass


def _trig_basis(p: int, q: int, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    # same half-plane convention as ConformalFactor
    if p > 0 or (p == 0 and q >= 0):
        return np.cos(2 * np.pi * (p * u + q * v))
    return np.sin(2 * np.pi * (-p * u - q * v))


def torus_frequencies(degree: int) -> list:
    """Frequency pairs with ``max(|p|, |q|) <= degree`` except ``(0, 0)``."""
    r = range(-degree, degree + 1)
    return [(p, q) for p in r for q in r if (p, q) != (0, 0)]


def unimodular_matrices(bound: int = 2) -> list:
    """Integer 2x2 matrices with entries in ``[-bound, bound]`` and det ±1.

    The identity comes first, then the rest in lexicographic order.
    """
    r = range(-bound, bound + 1)
    mats = [((a, b), (c, d)) for a, b, c, d in itertools.product(r, r, r, r)
            if abs(a * d - b * c) == 1]
    ident = ((1, 0), (0, 1))
    mats.remove(ident)
    return [ident] + mats


def rotation(angles) -> np.ndarray:
    """Z-Y-Z Euler rotation."""
    a, b, c = angles

    def rz(t):
        return np.array([[math.cos(t), -math.sin(t), 0.0], [math.sin(t), math.cos(t), 0.0], [0.0, 0.0, 1.0]])

    def ry(t):
        return np.array([[math.cos(t), 0.0, math.sin(t)], [0.0, 1.0, 0.0], [-math.sin(t), 0.0, math.cos(t)]])

    return rz(a) @ ry(b) @ rz(c)


@dataclass(frozen=True)
class DiffeoParams:
    """One member of the diffeomorphism family.

    ``f = flow_T o affine``; with ``inverse`` set, the member is ``f^{-1}``.
    Torus members use ``matrix`` (acting on coordinates normalized by the
    periods), ``translation`` and ``flow`` entries ``((p, q), (vx, vy))``.
    Sphere members use ``angles`` and ``flow`` entries
    ``(center, vector, width)``.
    """

    matrix: tuple = ((1, 0), (0, 1))
    translation: tuple = (0.0, 0.0)
    angles: tuple = (0.0, 0.0, 0.0)
    flow: tuple = ()
    flow_time: float = 1.0
    inverse: bool = False

    def __post_init__(self):
        m = tuple(tuple(int(v) for v in row) for row in self.matrix)
        if abs(m[0][0] * m[1][1] - m[0][1] * m[1][0]) != 1:
            raise ValueError(f"affine matrix {m} is not unimodular")
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "translation", tuple(float(v) for v in self.translation))
        object.__setattr__(self, "angles", tuple(float(v) for v in self.angles))
        if not 0.0 <= self.flow_time <= 1.0:
            raise ValueError("flow_time must lie in [0, 1]")

    def reverse(self) -> "DiffeoParams":
        return replace(self, inverse=not self.inverse)

    def __call__(self, base, x) -> np.ndarray:
        return apply_diffeo(self, base, x)


def _torus_velocity(flow, base: FlatTorus, x: np.ndarray) -> np.ndarray:
    u = x[:, 0] / base.lx
    v = x[:, 1] / base.ly
    out = np.zeros_like(x)
    for (p, q), vec in flow:
        out += _trig_basis(p, q, u, v)[:, None] * np.asarray(vec)[None, :]
    return out


def _sphere_velocity(flow, base: RoundSphere, x: np.ndarray) -> np.ndarray:
    R = base.radius
    unit = x / np.linalg.norm(x, axis=1, keepdims=True)
    out = np.zeros_like(x)
    for center, vec, width in flow:
        c = np.asarray(center, dtype=float)
        c = c / np.linalg.norm(c)
        a = np.asarray(vec, dtype=float)
        w = np.exp(-((unit - c) ** 2).sum(1) / (2 * width**2))
        tangent = a[None, :] - (unit @ a)[:, None] * unit
        out += R * w[:, None] * tangent
    return out


def _flow(p: DiffeoParams, base, x: np.ndarray, time: float) -> np.ndarray:
    if not p.flow or time == 0.0:
        return x
    if isinstance(base, FlatTorus):
        vel = lambda y: _torus_velocity(p.flow, base, y)  # noqa: E731
        project = lambda y: y  # noqa: E731
    else:
        vel = lambda y: _sphere_velocity(p.flow, base, y)  # noqa: E731
        project = lambda y: base.radius * y / np.linalg.norm(y, axis=1, keepdims=True)  # noqa: E731
    h = time / RK4_STEPS
    y = x.copy()
    for _ in range(RK4_STEPS):
        k1 = vel(y)
        k2 = vel(y + 0.5 * h * k1)
        k3 = vel(y + 0.5 * h * k2)
        k4 = vel(y + h * k3)
        y = project(y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4))
    return y


def _affine(p: DiffeoParams, base, x: np.ndarray, inverse: bool) -> np.ndarray:
    if isinstance(base, FlatTorus):
        L = base.periods
        M = np.array(p.matrix, dtype=float)
        t = np.array(p.translation)
        if inverse:
            Minv = np.round(np.linalg.inv(M))
            return (((x - t) / L) @ Minv.T) * L
        return ((x / L) @ M.T) * L + t
    R = rotation(p.angles)
    return x @ (R if inverse else R.T)


def apply_diffeo(p: DiffeoParams, base, x) -> np.ndarray:
    """Image of parameter points ``x`` (one per row) under the member ``p``."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if p.inverse:
        y = _affine(p, base, _flow(p, base, x, -p.flow_time), inverse=True)
    else:
        y = _flow(p, base, _affine(p, base, x, inverse=False), p.flow_time)
    if isinstance(base, FlatTorus):
        return wrap(base, y)
    return base.radius * y / np.linalg.norm(y, axis=1, keepdims=True)


@dataclass(frozen=True)
class ComposedMap:
    """``outer o inner``."""

    outer: object
    inner: object

    def __call__(self, base, x) -> np.ndarray:
        return self.outer(base, self.inner(base, x))


def compose(p, q) -> ComposedMap:
    """Evaluator for ``p o q``."""
    return ComposedMap(p, q)


@dataclass(frozen=True)
class LipschitzConstant:
    k: float
    padding: float = 0.0
    snap: tuple = field(default=(), repr=False)

    @property
    def log(self) -> float:
        return math.log(self.k)


def _check_domain(A: SampledManifold, B: SampledManifold):
    if A.field.base != B.field.base:
        raise DomainMismatch(f"base manifolds differ: {A.field.base} vs {B.field.base}")
    if A.params.shape != B.params.shape or not np.array_equal(A.params, B.params):
        raise DomainMismatch("sampled manifolds must share the same sample parameters")


def snap_bijection(base, images: np.ndarray, params: np.ndarray) -> np.ndarray:
    """Assign each image to a distinct sample.

    Nearest samples when they are distinct, otherwise the assignment with
    the least total squared snap length.
    """
    D = base_distance(base, images, params)
    nearest = np.argmin(D, axis=1)
    if len(np.unique(nearest)) == len(nearest):
        return nearest
    _, cols = linear_sum_assignment(D**2)
    return cols


def _paired_base_distance(base, P, Q) -> np.ndarray:
    if isinstance(base, FlatTorus):
        return np.sqrt((torus_displacement(base, P, Q) ** 2).sum(-1))
    c = np.clip((P * Q).sum(-1) / base.radius**2, -1.0, 1.0)
    return base.radius * np.arccos(c)


def lipschitz_constant(p, A: SampledManifold, B: SampledManifold,
                       min_separation: float = 0.0) -> LipschitzConstant:
    """Two-sided Lipschitz constant of ``p: (M, d_A) -> (M, d_B)`` on the samples.

    Pairs closer than ``min_separation`` in ``d_A`` are skipped; at the
    default every pair of distinct samples counts. ``padding`` bounds the
    snapping error pair by pair: with additive slack ``s = pad_i + pad_j``
    the true ratio lies in ``[(d2 - s) / d1, (d2 + s) / d1]``.
    """
    _check_domain(A, B)
    base = A.field.base
    x = np.asarray(A.params)
    n = len(x)
    y = p(base, x)
    sigma = snap_bijection(base, y, x)
    target = x[sigma]
    pad = np.zeros(n)
    # snaps below rounding level count as exact hits
    moved = _paired_base_distance(base, y, target) > 1e-12 * (1.0 + np.abs(x).max())
    if moved.any():
        pad[moved] = edge_lengths(B.field, y[moved], target[moved])
    snap = tuple(sigma.tolist())
    iu = np.triu_indices(n, 1)
    dA = A.space.dist[iu]
    dB = B.space.dist[np.ix_(sigma, sigma)][iu]
    keep = dA >= min_separation
    if not keep.any():
        return LipschitzConstant(1.0, 0.0, snap)
    dA, dB = dA[keep], dB[keep]
    slack = (pad[iu[0]] + pad[iu[1]])[keep]
    r = dB / dA
    k = max(1.0, float(r.max()), float((1.0 / r).max()))
    if not slack.any():
        return LipschitzConstant(k, 0.0, snap)
    low = dB - slack
    if np.any(low <= 0):
        return LipschitzConstant(k, math.inf, snap)
    k_hi = max(1.0, float(((dB + slack) / dA).max()), float((dA / low).max()))
    return LipschitzConstant(k, max(0.0, k_hi / k - 1.0), snap)


@dataclass(frozen=True)
class SlResult:
    value: float
    padding: float
    witness: DiffeoParams
    evaluations: int
    snap: tuple = field(default=(), repr=False)


class _Family:
    """Continuous coordinates of the family for a fixed affine/discrete part."""

    def __init__(self, base, degree: int):
        self.base = base
        if isinstance(base, FlatTorus):
            self.freqs = torus_frequencies(degree)
            self.dim = 2 + 2 * len(self.freqs)
            scale = np.concatenate([base.periods, np.tile(base.periods, len(self.freqs))])
            self.step0 = scale * np.concatenate([[0.25, 0.25], np.full(2 * len(self.freqs), 0.02)])
        else:
            from .manifold import sample, MetricField
            self.centers = (sample(MetricField(base), max(degree, 4), "grid") / base.radius)[:degree] \
                if degree > 0 else np.zeros((0, 3))
            self.dim = 3 + 3 * len(self.centers)
            self.step0 = np.concatenate([np.full(3, 0.5), np.full(3 * len(self.centers), 0.05)])
        self.min_step = self.step0 * 1e-3

    def make(self, discrete, z: np.ndarray) -> DiffeoParams:
        if isinstance(self.base, FlatTorus):
            flow = tuple((pq, (float(z[2 + 2 * i]), float(z[3 + 2 * i])))
                         for i, pq in enumerate(self.freqs)
                         if z[2 + 2 * i] != 0 or z[3 + 2 * i] != 0)
            return DiffeoParams(matrix=discrete, translation=tuple(z[:2]), flow=flow)
        flow = tuple((tuple(c), tuple(float(v) for v in z[3 + 3 * i: 6 + 3 * i]), 0.5)
                     for i, c in enumerate(self.centers)
                     if np.any(z[3 + 3 * i: 6 + 3 * i] != 0))
        return DiffeoParams(angles=tuple(z[:3]), flow=flow)


def _shift_candidates(base, params: np.ndarray, rng, limit: int = 256) -> np.ndarray:
    """Starting values for the translation/rotation coordinates.

    Torus: the displacements carrying the first sample onto each sample,
    which on a grid are exactly the lattice-preserving translations.
    Sphere: seeded random Euler angles.
    """
    if isinstance(base, FlatTorus):
        shifts = wrap(base, params - params[0])
        if len(shifts) > limit:
            shifts = shifts[np.linspace(0, len(shifts) - 1, limit).astype(int)]
        return shifts
    n = min(len(params), limit)
    ang = rng.uniform(-np.pi, np.pi, size=(n, 3))
    ang[0] = 0.0
    return ang


def sl_bound(A: SampledManifold, B: SampledManifold, family_degree: int = 1,
             budget: int = 1000, seed: int = 0, restarts: int = 4,
             affine_bound: int = 2, min_separation: float = 0.0) -> SlResult:
    """Upper bound on the smooth-Lipschitz distance from ``A`` to ``B``.

    Derivative-free, in three stages sharing one evaluation ``budget``:
    score every discrete affine part with no translation and no flow; scan
    translations (rotations on the sphere) for the identity part and the
    best other part; then run
    ``restarts`` opportunistic compass searches over all continuous
    coordinates, restart ``r`` starting from the ``r``-th best scanned point
    and polling in an order drawn from its own sub-seed.
    """
    _check_domain(A, B)
    if budget < 1:
        raise ValueError("budget must be >= 1")
    base = A.field.base
    fam = _Family(base, family_degree)
    torus = isinstance(base, FlatTorus)
    discretes = unimodular_matrices(affine_bound) if torus else [None]
    evals = 0
    best = None  # (value, params, LipschitzConstant)

    def evaluate(disc, z):
        nonlocal evals, best
        p = fam.make(disc, z)
        L = lipschitz_constant(p, A, B, min_separation)
        evals += 1
        val = L.log
        if best is None or val < best[0]:
            best = (val, p, L)
        return val

    scanned = []  # (value, order, disc, z)
    for disc in discretes:
        if evals >= budget:
            break
        z = np.zeros(fam.dim)
        scanned.append((evaluate(disc, z), len(scanned), disc, z))
    # the untransformed part is always scanned, plus the best other one
    ranked = [d for _, _, d, _ in sorted(scanned, key=lambda s: s[:2])]
    top = [discretes[0]] + [d for d in ranked if d != discretes[0]][:1]
    shifts = _shift_candidates(base, np.asarray(A.params), rng_for(seed, 21))
    scan_stop = evals + (budget - evals) // 2
    for disc in top:
        for sh in shifts[1:] if torus else shifts:
            if evals >= scan_stop or best[0] == 0.0:
                break
            z = np.zeros(fam.dim)
            z[: len(sh)] = sh
            scanned.append((evaluate(disc, z), len(scanned), disc, z))
    starts = sorted(scanned, key=lambda s: s[:2])

    per_restart = max(1, (budget - evals) // max(restarts, 1))
    for r in range(min(restarts, len(starts))):
        if evals >= budget or best[0] == 0.0:
            break
        rng = rng_for(seed, 20, r)
        cur, _, disc, z = starts[r]
        z = z.copy()
        step = fam.step0.copy()
        if torus:
            # translations start at sample spacing, not a quarter period
            step[:2] = np.minimum(step[:2], np.sqrt(base.lx * base.ly / len(A.params)))
        stop = min(budget, evals + per_restart)
        while evals < stop and np.any(step > fam.min_step) and best[0] > 0.0:
            improved = False
            for idx in rng.permutation(fam.dim):
                if step[idx] <= fam.min_step[idx]:
                    continue
                for sgn in (1.0, -1.0):
                    if evals >= stop:
                        break
                    trial = z.copy()
                    trial[idx] += sgn * step[idx]
                    val = evaluate(disc, trial)
                    if val < cur:
                        z, cur, improved = trial, val, True
                        break
                if evals >= stop:
                    break
            if not improved:
                step *= 0.5
    value, witness, L = best
    return SlResult(value, math.log1p(L.padding), witness, evals, L.snap)
