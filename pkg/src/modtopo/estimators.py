"""scikit-learn style front end.

Each distance is an estimator fitted on a pair of spaces::

    gh = GromovHausdorff(method="auto").fit(X, Y)
    gh.lower_, gh.upper_

``get_params``/``set_params``/``clone`` come from :class:`BaseEstimator`, so
the estimators plug into :func:`pairwise_distances` and parameter sweeps.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin, clone
from sklearn.utils.validation import check_is_fitted

from .bilipschitz import EXACT_MAX_N, lip_bound, lip_exact
from .conformal_density import DensityExperiment, run_density
from .correspondence import EXACT_BUDGET as GH_EXACT_BUDGET
from .correspondence import gh_bound, gh_exact
from .eps_isometry import EXACT_BUDGET as EPS_EXACT_BUDGET
from .eps_isometry import eps_bound, eps_exact
from .manifold import MetricField, SampledManifold, geodesic_space, sample
from .metric_core import TRIANGLE_TOL, FiniteMetricSpace, Tolerance, validate
from .smooth_lipschitz import sl_bound

METHODS = ("auto", "exact", "anneal")


def check_space(X, tol: Tolerance = TRIANGLE_TOL) -> FiniteMetricSpace:
    """Accept a space, a sampled manifold or a square matrix; return a validated space."""
    if isinstance(X, FiniteMetricSpace):
        return X
    if isinstance(X, SampledManifold):
        return X.space
    return validate(np.asarray(X, dtype=float), tol=tol)


def check_manifold(M) -> SampledManifold:
    if not isinstance(M, SampledManifold):
        raise TypeError(f"expected a SampledManifold, got {type(M).__name__}")
    return M


def _check_method(method):
    if method not in METHODS:
        raise ValueError(f"method must be one of {METHODS}, got {method!r}")


class _PairDistance(BaseEstimator):
    def _use_exact(self, X, Y) -> bool:
        _check_method(self.method)
        if self.method == "auto":
            return self._exact_ok(X, Y)
        return self.method == "exact"

    def fit(self, X, Y):
        X = check_space(X)
        Y = check_space(Y)
        self.result_ = self._solve(X, Y)
        self.method_ = "exact" if self.result_.method == "exact" else "anneal"
        return self

    @property
    def distance_(self) -> float:
        check_is_fitted(self, "result_")
        return self.result_.value

    def score(self, X, Y) -> float:
        """Negative distance, so that larger is better."""
        return -self.fit(X, Y).distance_


class GromovHausdorff(_PairDistance):
    def __init__(self, method="auto", budget=2000, seed=0):
        self.method = method
        self.budget = budget
        self.seed = seed

    def _exact_ok(self, X, Y):
        return X.n * Y.n <= GH_EXACT_BUDGET

    def _solve(self, X, Y):
        if self._use_exact(X, Y):
            return gh_exact(X, Y)
        return gh_bound(X, Y, self.budget, self.seed)

    def fit(self, X, Y):
        super().fit(X, Y)
        self.lower_ = self.result_.lower
        self.upper_ = self.result_.upper
        return self


class EpsilonIsometry(_PairDistance):
    def __init__(self, method="auto", budget=2000, seed=0):
        self.method = method
        self.budget = budget
        self.seed = seed

    def _exact_ok(self, X, Y):
        return float(Y.n) ** X.n + float(X.n) ** Y.n <= EPS_EXACT_BUDGET

    def _solve(self, X, Y):
        if self._use_exact(X, Y):
            return eps_exact(X, Y)
        return eps_bound(X, Y, self.budget, self.seed)


class LipschitzDistance(_PairDistance):
    def __init__(self, method="auto", budget=2000, seed=0):
        self.method = method
        self.budget = budget
        self.seed = seed

    def _exact_ok(self, X, Y):
        return X.n <= EXACT_MAX_N

    def _solve(self, X, Y):
        # unequal sizes are answered exactly (infinite) by lip_exact
        if self._use_exact(X, Y) or X.n != Y.n:
            return lip_exact(X, Y)
        return lip_bound(X, Y, self.budget, self.seed)


class SmoothLipschitz(BaseEstimator):
    """Upper bound on the smooth-Lipschitz distance between two sampled manifolds."""

    def __init__(self, degree=1, budget=1000, restarts=4, seed=0, affine_bound=2,
                 min_separation=0.0):
        self.degree = degree
        self.budget = budget
        self.restarts = restarts
        self.seed = seed
        self.affine_bound = affine_bound
        self.min_separation = min_separation

    def fit(self, A, B):
        A = check_manifold(A)
        B = check_manifold(B)
        self.result_ = sl_bound(A, B, self.degree, self.budget, self.seed, self.restarts,
                                self.affine_bound, self.min_separation)
        self.upper_ = self.result_.value
        self.padding_ = self.result_.padding
        self.witness_ = self.result_.witness
        return self

    @property
    def distance_(self) -> float:
        check_is_fitted(self, "result_")
        return self.result_.value


class ManifoldSampler(TransformerMixin, BaseEstimator):
    """Turn a :class:`MetricField` into its graph-geodesic finite metric space."""

    def __init__(self, n=64, mode="grid", seed=0, knn=8):
        self.n = n
        self.mode = mode
        self.seed = seed
        self.knn = knn

    def fit(self, field: MetricField, y=None):
        if not isinstance(field, MetricField):
            raise TypeError(f"expected a MetricField, got {type(field).__name__}")
        self.params_ = sample(field, self.n, self.mode, self.seed)
        self.manifold_ = geodesic_space(field, self.params_, self.knn)
        return self

    def transform(self, field: MetricField) -> FiniteMetricSpace:
        check_is_fitted(self, "params_")
        return geodesic_space(field, self.params_, self.knn).space


class ConformalDensity(BaseEstimator):
    """Search the conformal class of ``base`` for a metric GH-close to ``target``."""

    def __init__(self, degree=1, n_samples=64, knn=8, budget=200, seed=0,
                 inner_budget=300, final_budget=5000):
        self.degree = degree
        self.n_samples = n_samples
        self.knn = knn
        self.budget = budget
        self.seed = seed
        self.inner_budget = inner_budget
        self.final_budget = final_budget

    def fit(self, base: MetricField, target: MetricField):
        exp = run_density(DensityExperiment(base, target, self.degree), self.n_samples,
                          self.knn, self.budget, self.seed, self.inner_budget,
                          self.final_budget)
        self.experiment_ = exp
        self.history_ = exp.history
        self.best_factor_ = exp.best_factor
        self.upper_ = exp.final_upper
        self.lower_ = exp.final_lower
        return self


def pairwise_distances(spaces, estimator=None) -> np.ndarray:
    """Symmetric matrix of fitted distances between every pair of ``spaces``."""
    est = GromovHausdorff() if estimator is None else estimator
    spaces = [check_space(s) for s in spaces]
    n = len(spaces)
    out = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            out[i, j] = out[j, i] = clone(est).fit(spaces[i], spaces[j]).distance_
    return out
