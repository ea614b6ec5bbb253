import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from modtopo.correspondence import (BudgetExceeded, Correspondence, InvalidCorrespondence,
                                    distortion, gh_bound, gh_exact, gh_lower_bound)
from modtopo.metric_core import diameter, rescale, validate
from oracles import gh_brute
from strategies import spaces

P1 = validate([[0]])
D1 = validate([[0, 1], [1, 0]])
D2 = validate([[0, 2], [2, 0]])
D3 = validate([[0, 3], [3, 0]])


def test_distortion_examples():
    assert distortion(Correspondence({(0, 0), (1, 1)}), D1, D1) == 0
    assert distortion(Correspondence({(0, 0), (1, 1)}), D1, D3) == 2
    full = Correspondence({(i, j) for i in range(2) for j in range(2)})
    assert distortion(full, D1, D3) == 3


def test_invalid_correspondence():
    with pytest.raises(InvalidCorrespondence):
        distortion(Correspondence({(0, 0)}), D1, D3)


def test_exact_examples():
    # frozen from the brute-force oracle
    assert gh_brute(P1.dist, D2.dist) == 1.0
    assert gh_brute(D1.dist, D3.dist) == 1.0
    assert gh_exact(D1, D1).value == 0
    assert gh_exact(P1, D2).value == 1
    assert gh_exact(D1, D3).value == 1
    r = gh_exact(D1, D3)
    assert r.lower == r.upper
    assert distortion(r.witness, D1, D3) == 2 * r.value


def test_exact_budget():
    X = validate(np.sqrt(((np.arange(6)[:, None] - np.arange(6)[None]) ** 2).astype(float)))
    with pytest.raises(BudgetExceeded):
        gh_exact(X, X)


@given(spaces(1, 3), spaces(1, 3))
@settings(max_examples=40, deadline=None)
def test_exact_matches_brute_force(X, Y):
    assert gh_exact(X, Y).value == pytest.approx(gh_brute(X.dist, Y.dist), abs=1e-12)


@given(spaces(1, 4), spaces(1, 4))
@settings(max_examples=60, deadline=None)
def test_bound_brackets_exact(X, Y):
    exact = gh_exact(X, Y).value
    r = gh_bound(X, Y, budget=300, seed=1)
    assert r.lower <= exact + 1e-12 <= r.upper + 2e-12
    assert r.lower >= 0.5 * abs(diameter(X) - diameter(Y)) - 1e-15
    r.witness.check(X.n, Y.n)
    assert 0.5 * distortion(r.witness, X, Y) == pytest.approx(r.upper)


@given(spaces(1, 4), spaces(1, 4))
@settings(max_examples=40, deadline=None)
def test_symmetry(X, Y):
    assert gh_exact(X, Y).value == pytest.approx(gh_exact(Y, X).value, abs=1e-12)


@given(spaces(1, 5), st.floats(0.2, 5.0))
@settings(max_examples=40, deadline=None)
def test_rescale_bound(X, c):
    Y = rescale(X, c)
    assert gh_bound(X, Y, 200).upper <= 0.5 * abs(c - 1) * diameter(X) + 1e-12


def test_identical_spaces_give_zero_upper():
    rng = np.random.default_rng(3)
    pts = rng.uniform(size=(30, 2))
    X = validate(np.sqrt(((pts[:, None] - pts[None]) ** 2).sum(-1)))
    assert gh_bound(X, X, budget=10).upper == 0.0


def test_bound_monotone_in_budget_and_deterministic():
    rng = np.random.default_rng(5)
    a, b = rng.uniform(size=(12, 2)), rng.uniform(size=(14, 2))
    X = validate(np.sqrt(((a[:, None] - a[None]) ** 2).sum(-1)))
    Y = validate(np.sqrt(((b[:, None] - b[None]) ** 2).sum(-1)))
    ups = [gh_bound(X, Y, budget=k, seed=7).upper for k in (10, 100, 1000, 5000)]
    assert all(u >= v for u, v in zip(ups, ups[1:]))
    assert gh_bound(X, Y, 1000, 7) == gh_bound(X, Y, 1000, 7)
    assert gh_lower_bound(X, Y) <= ups[-1]
