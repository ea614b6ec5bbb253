import csv

import pytest

from modtopo.conformal_density import DensityExperiment, run_density, write_history_csv
from modtopo.correspondence import gh_bound
from modtopo.manifold import (ConformalFactor, FlatTorus, MetricField, RoundSphere,
                              geodesic_space, sample)
from modtopo.metric_core import diameter
from modtopo.smooth_lipschitz import DomainMismatch

FLAT = MetricField(FlatTorus())


def test_target_equal_to_base_stays_at_zero():
    exp = run_density(DensityExperiment(FLAT, FLAT), n_samples=36, budget=5, final_budget=100)
    assert exp.initial_upper == 0
    assert all(r.gh_upper == 0 for r in exp.history)


def test_in_family_target_is_recovered():
    target = MetricField(FlatTorus(), ConformalFactor({(1, 0): 0.3, (0, -1): -0.2}))
    exp = run_density(DensityExperiment(FLAT, target), n_samples=64, budget=200,
                      inner_budget=300, final_budget=2000)
    assert exp.initial_upper > 0.05
    assert exp.final_upper <= 1e-9
    assert exp.n_params == 9


def test_history_invariants_and_csv(tmp_path):
    target = MetricField(FlatTorus(), ConformalFactor({(2, 1): 0.2, (1, -1): 0.15}))
    exp = run_density(DensityExperiment(FLAT, target), n_samples=36, budget=30,
                      inner_budget=100, final_budget=500, seed=4)
    ups = [r.gh_upper for r in exp.history]
    assert all(a >= b for a, b in zip(ups, ups[1:]))
    assert all(r.gh_lower <= r.gh_upper for r in exp.history)
    Xt = geodesic_space(target, sample(target, 36)).space
    best = geodesic_space(MetricField(FlatTorus(), exp.best_factor), sample(FLAT, 36)).space
    assert exp.final_upper >= 0.5 * abs(diameter(best) - diameter(Xt)) - 1e-15
    again = run_density(DensityExperiment(FLAT, target), n_samples=36, budget=30,
                        inner_budget=100, final_budget=500, seed=4)
    assert [r.gh_upper for r in again.history] == ups

    path = tmp_path / "h.csv"
    write_history_csv(exp, path)
    rows = list(csv.reader(path.open()))
    assert rows[0] == ["iteration", "gh_upper", "gh_lower", "wall_ms"]
    assert len(rows) == len(exp.history) + 1
    assert float(rows[-1][1]) == exp.final_upper


def test_sampling_stability():
    """Doubling the sample count moves the evaluated estimate by less than the grid spacing."""
    phi = ConformalFactor({(1, 0): 0.2})
    target = MetricField(FlatTorus(), ConformalFactor({(0, 1): 0.2}))
    vals = []
    for n in (64, 128):
        X = geodesic_space(MetricField(FlatTorus(), phi), sample(FLAT, n)).space
        Y = geodesic_space(target, sample(target, n)).space
        vals.append(gh_bound(X, Y, 2000).upper)
    assert abs(vals[0] - vals[1]) <= 1 / 8


def test_domain_mismatch_and_budget():
    with pytest.raises(DomainMismatch):
        run_density(DensityExperiment(FLAT, MetricField(RoundSphere())))
    with pytest.raises(ValueError):
        run_density(DensityExperiment(FLAT, FLAT), budget=0)


def test_sphere_bump_target_improves():
    S = MetricField(RoundSphere())
    target = MetricField(RoundSphere(), ConformalFactor(
        bumps=[{"center": (0, 0, 1), "height": 0.4, "width": 0.5}]))
    exp = run_density(DensityExperiment(S, target, degree=2), n_samples=60, budget=30,
                      inner_budget=200, final_budget=1000)
    assert exp.n_params == 3
    assert exp.final_upper < exp.initial_upper
