"""Batch certification of the comparison inequalities between the distances.

Each suite draws seeded random instances, evaluates one or more
inequalities ``lhs <= rhs`` on each, and records the largest excess
``max(0, lhs - rhs)``. Failures are report entries, never exceptions.

Finite instances come from random point clouds in R^1 to R^3 (so the
triangle inequality holds by construction); half of them get a constant
``delta`` added off the diagonal, which keeps every triangle inequality.
Manifold suites use small flat-torus grids so that exact solvers stay
within budget.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._search import rng_for
from .bilipschitz import gh_from_lip, lip_exact
from .correspondence import Correspondence, distortion, gh_bound, gh_exact
from .eps_isometry import eps_exact
from .manifold import (ConformalFactor, FlatTorus, MetricField, geodesic_space,
                       sample)
from .metric_core import FiniteMetricSpace, Tolerance, diameter, from_points, validate
from .smooth_lipschitz import (DiffeoParams, compose, lipschitz_constant, sl_bound,
                               torus_frequencies)

SUITES = ("lemma-sandwich", "diameter-bounds", "topology-chain",
          "submultiplicativity", "pseudo-metric-axioms")
DEFAULT_TOL = Tolerance(abs=1e-9, rel=0.0)

CHAIN_CAP = 20
SUBMULT_CAP = 100
SL_TRIPLE_CAP = 10


@dataclass
class Entry:
    name: str
    instances: int = 0
    max_violation: float = 0.0
    passed: bool = True

    def record(self, lhs: float, rhs: float, tol: Tolerance) -> None:
        self.instances += 1
        if math.isnan(lhs) or math.isnan(rhs):
            excess = math.inf
        elif lhs == rhs:
            excess = 0.0  # also covers inf <= inf
        else:
            excess = max(0.0, lhs - rhs)
        scale = max(abs(lhs), abs(rhs)) if math.isfinite(lhs) and math.isfinite(rhs) else 0.0
        self.max_violation = max(self.max_violation, excess)
        if not tol.allows(excess, scale):
            self.passed = False

    def to_dict(self) -> dict:
        return {"name": self.name, "instances": self.instances,
                "max_violation": self.max_violation, "passed": self.passed}


@dataclass
class CertificateReport:
    suite: str
    seed: int
    trials: int
    tol: Tolerance
    entries: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(e.passed for e in self.entries)

    def to_dict(self) -> dict:
        return {"suite": self.suite, "seed": self.seed, "trials": self.trials,
                "tol_abs": self.tol.abs, "tol_rel": self.tol.rel, "passed": self.passed,
                "entries": [e.to_dict() for e in self.entries]}


def random_space(rng: np.random.Generator, n: int, perturb: bool = True) -> FiniteMetricSpace:
    dim = int(rng.integers(1, 4))
    pts = rng.uniform(0.0, 1.0, size=(n, dim))
    X = from_points(pts)
    if perturb and n > 1 and rng.random() < 0.5:
        d = X.dist + rng.uniform(0.0, 0.5) * (1.0 - np.eye(n))
        X = validate(d)
    return X


def permuted_copy(X: FiniteMetricSpace, perm) -> FiniteMetricSpace:
    perm = np.asarray(perm)
    return validate(X.dist[np.ix_(perm, perm)], labels=[X.labels[i] for i in perm])


def _sandwich(trials, seed, tol):
    rng = rng_for(seed, 40, 0)
    lo = Entry("eps_exact <= 2 gh_exact")
    hi = Entry("gh_exact <= 1.5 eps_exact")
    for _ in range(trials):
        X = random_space(rng, int(rng.integers(2, 5)))
        Y = random_space(rng, int(rng.integers(2, 5)))
        g = gh_exact(X, Y).value
        e = eps_exact(X, Y).value
        lo.record(e, 2.0 * g, tol)
        hi.record(g, 1.5 * e, tol)
    return [lo, hi]


def _diameters(trials, seed, tol):
    rng = rng_for(seed, 40, 1)
    lo = Entry("|Diam X - Diam Y| <= eps_exact")
    hi = Entry("eps_exact <= max(Diam X, Diam Y)")
    for _ in range(trials):
        X = random_space(rng, int(rng.integers(2, 5)))
        Y = random_space(rng, int(rng.integers(2, 5)))
        e = eps_exact(X, Y).value
        dx, dy = diameter(X), diameter(Y)
        lo.record(abs(dx - dy), e, tol)
        hi.record(e, max(dx, dy), tol)
    return [lo, hi]


def _random_factor(rng, amp: float) -> ConformalFactor:
    return ConformalFactor({pq: float(rng.uniform(-amp, amp)) for pq in torus_frequencies(1)})


def _padded(L) -> float:
    return L.log + math.log1p(L.padding)


def _chain(trials, seed, tol):
    """Matched 3x3 torus grids: SL estimate >= rho_L >= what rho_GH needs."""
    rng = rng_for(seed, 40, 2)
    sl_lip = Entry("rho_L <= sl_bound + padding")
    lip_gh = Entry("gh lower bound <= (e^rho_L - 1) maxDiam / 2")
    wit_gh = Entry("gh of lip witness <= (e^rho_L - 1) maxDiam / 2")
    base = FlatTorus()
    params = sample(MetricField(base), 9, "grid")
    for _ in range(min(trials, CHAIN_CAP)):
        A = geodesic_space(MetricField(base, _random_factor(rng, 0.2)), params)
        B = geodesic_space(MetricField(base, _random_factor(rng, 0.2)), params)
        sl = sl_bound(A, B, budget=300, seed=int(rng.integers(2**31)))
        lip = lip_exact(A.space, B.space)
        sl_lip.record(lip.value, sl.value + sl.padding, tol)
        bound = gh_from_lip(lip.value, max(diameter(A.space), diameter(B.space)))
        gh = gh_bound(A.space, B.space, budget=500, seed=0)
        lip_gh.record(gh.lower, bound, tol)
        perm = np.asarray(lip.witness.perm)
        R = Correspondence.from_maps(perm, np.argsort(perm))
        wit_gh.record(0.5 * distortion(R, A.space, B.space), bound, tol)
    return [sl_lip, lip_gh, wit_gh]


def _random_diffeo(rng, base: FlatTorus, amp: float) -> DiffeoParams:
    flow = tuple((pq, (float(rng.uniform(-amp, amp)), float(rng.uniform(-amp, amp))))
                 for pq in torus_frequencies(1))
    return DiffeoParams(translation=tuple(rng.uniform(0.0, 1.0, 2) * base.periods), flow=flow)


def _submult(trials, seed, tol, n_side=16, cutoff=0.25, amp=0.005):
    """``L(f o g) <= L(f) L(g) (1 + padding)`` for random near-isometries of a flat torus."""
    rng = rng_for(seed, 40, 3)
    entry = Entry("log L(f o g) <= log L(f) + log L(g) + padding")
    base = FlatTorus()
    A = geodesic_space(MetricField(base), sample(MetricField(base), n_side * n_side, "grid"))
    for _ in range(min(trials, SUBMULT_CAP)):
        f = _random_diffeo(rng, base, amp)
        g = _random_diffeo(rng, base, amp)
        Lf = lipschitz_constant(f, A, A, cutoff)
        Lg = lipschitz_constant(g, A, A, cutoff)
        Lfg = lipschitz_constant(compose(f, g), A, A, cutoff)
        pad = math.log1p(Lf.padding) + math.log1p(Lg.padding) + math.log1p(Lfg.padding)
        entry.record(Lfg.log, Lf.log + Lg.log + pad, tol)
    return [entry]


def _axioms(trials, seed, tol):
    rng = rng_for(seed, 40, 4)
    solvers = (("gh_exact", lambda X, Y: gh_exact(X, Y).value),
               ("eps_exact", lambda X, Y: eps_exact(X, Y).value),
               ("lip_exact", lambda X, Y: lip_exact(X, Y).value))
    entries = []
    for name, fn in solvers:
        sym = Entry(f"{name} symmetric")
        tri = Entry(f"{name} triangle")
        zero = Entry(f"{name} zero on permuted copy")
        for _ in range(trials):
            if name == "lip_exact":
                sizes = [int(rng.integers(2, 5))] * 3
            else:
                sizes = rng.integers(2, 5, size=3)
            X, Y, Z = (random_space(rng, int(k)) for k in sizes)
            xy, yx = fn(X, Y), fn(Y, X)
            sym.record(abs(xy - yx), 0.0, tol)
            tri.record(fn(X, Z), xy + fn(Y, Z), tol)
            zero.record(fn(X, permuted_copy(X, rng.permutation(X.n))), 0.0, tol)
        entries += [sym, tri, zero]
    entries += _sl_axioms(rng, min(trials, SL_TRIPLE_CAP), tol)
    return entries


def _sl_axioms(rng, triples, tol):
    """Pseudo-metric checks on the smooth-Lipschitz estimator, with padding.

    Symmetry: the reversed witness ``f^-1: B -> A`` measures within padding
    of ``f``. Triangle: the composed witness ``g o f: A -> C`` measures at
    most the two estimates plus padding.
    """
    sym = Entry("sl_bound symmetric within padding")
    tri = Entry("sl_bound triangle within padding")
    zero = Entry("sl_bound zero on identical metrics")
    base = FlatTorus()
    params = sample(MetricField(base), 16, "grid")
    for _ in range(triples):
        A, B, C = (geodesic_space(MetricField(base, _random_factor(rng, 0.1)), params)
                   for _ in range(3))
        s = int(rng.integers(2**31))
        ab = sl_bound(A, B, budget=200, seed=s)
        bc = sl_bound(B, C, budget=200, seed=s)
        back = lipschitz_constant(ab.witness.reverse(), B, A)
        sym.record(abs(back.log - ab.value), ab.padding + math.log1p(back.padding), tol)
        ac = lipschitz_constant(compose(bc.witness, ab.witness), A, C)
        tri.record(ac.log, ab.value + bc.value + ab.padding + bc.padding + math.log1p(ac.padding), tol)
        zero.record(sl_bound(A, A, budget=50, seed=s).value, 0.0, tol)
    return [sym, tri, zero]


_RUNNERS = {"lemma-sandwich": _sandwich, "diameter-bounds": _diameters,
            "topology-chain": _chain, "submultiplicativity": _submult,
            "pseudo-metric-axioms": _axioms}


def run_certify(suite: str = "all", trials: int = 200, seed: int = 0,
                tol: Tolerance = DEFAULT_TOL) -> CertificateReport:
    """Run one suite or ``"all"``; every suite draws from its own seeded stream."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if suite != "all" and suite not in _RUNNERS:
        raise ValueError(f"unknown suite {suite!r}; choose from {SUITES + ('all',)}")
    report = CertificateReport(suite, seed, trials, tol)
    for name in SUITES if suite == "all" else (suite,):
        for e in _RUNNERS[name](trials, seed, tol):
            e.name = f"{name}: {e.name}"
            report.entries.append(e)
    return report
