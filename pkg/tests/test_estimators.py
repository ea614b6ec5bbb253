import math

import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from modtopo.estimators import (ConformalDensity, EpsilonIsometry, GromovHausdorff,
                                LipschitzDistance, ManifoldSampler, SmoothLipschitz,
                                check_space, pairwise_distances)
from modtopo.manifold import ConformalFactor, FlatTorus, MetricField
from modtopo.metric_core import TriangleViolation, validate

D1 = [[0, 1], [1, 0]]
D3 = [[0, 3], [3, 0]]


def test_params_round_trip():
    est = GromovHausdorff(method="anneal", budget=50, seed=3)
    assert est.get_params() == {"method": "anneal", "budget": 50, "seed": 3}
    c = clone(est).set_params(seed=4)
    assert c.seed == 4 and est.seed == 3
    assert "degree" in SmoothLipschitz().get_params()


def test_input_validation():
    assert check_space(D1).n == 2
    with pytest.raises(TriangleViolation):
        check_space([[0, 1, 5], [1, 0, 1], [5, 1, 0]])
    with pytest.raises(ValueError):
        GromovHausdorff(method="magic").fit(D1, D3)
    with pytest.raises(TypeError):
        SmoothLipschitz().fit(D1, D3)
    with pytest.raises(NotFittedError):
        GromovHausdorff().distance_


def test_distance_estimators_on_matrices():
    gh = GromovHausdorff().fit(D1, D3)
    assert (gh.lower_, gh.upper_, gh.method_) == (1.0, 1.0, "exact")
    assert EpsilonIsometry().fit(D1, D3).distance_ == 2
    assert LipschitzDistance().fit(D1, D3).distance_ == pytest.approx(math.log(3))
    assert math.isinf(LipschitzDistance(method="anneal").fit([[0]], D1).distance_)
    assert GromovHausdorff().score(D1, D3) == -1.0


def test_auto_switches_to_annealing():
    pts = np.random.default_rng(0).uniform(size=(12, 2))
    X = validate(np.sqrt(((pts[:, None] - pts[None]) ** 2).sum(-1)))
    assert GromovHausdorff().fit(X, X).method_ == "anneal"
    assert LipschitzDistance().fit(X, X).method_ == "anneal"


def test_pairwise_distances():
    out = pairwise_distances([D1, D3, [[0]]])
    np.testing.assert_array_equal(out, out.T)
    assert out[0, 1] == 1.0 and out[1, 2] == 1.5
    lip = pairwise_distances([D1, D3], LipschitzDistance())
    assert lip[0, 1] == pytest.approx(math.log(3))


def test_sampler_and_smooth_lipschitz():
    base = MetricField(FlatTorus())
    other = MetricField(FlatTorus(), ConformalFactor({(0, 0): math.log(1.2)}))
    sampler = ManifoldSampler(n=36).fit(base)
    X = sampler.transform(base)
    assert X == sampler.manifold_.space
    assert ManifoldSampler(n=36).fit_transform(base) == X
    A = sampler.manifold_
    B = ManifoldSampler(n=36).fit(other).manifold_
    sl = SmoothLipschitz(budget=100).fit(A, B)
    assert sl.distance_ == pytest.approx(math.log(1.2), rel=1e-12)
    assert sl.padding_ == 0


def test_conformal_density_estimator():
    target = MetricField(FlatTorus(), ConformalFactor({(1, 0): 0.2}))
    est = ConformalDensity(n_samples=36, budget=40, inner_budget=200, final_budget=500)
    est.fit(MetricField(FlatTorus()), target)
    assert est.upper_ <= est.history_[0].gh_upper
    assert est.lower_ <= est.upper_
