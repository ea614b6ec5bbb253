import json

import pytest

from modtopo.certify import Entry, run_certify
from modtopo.io import dumps
from modtopo.metric_core import Tolerance


@pytest.mark.parametrize("suite", ["lemma-sandwich", "diameter-bounds"])
def test_small_suites_pass(suite):
    r = run_certify(suite, trials=60, seed=1)
    assert r.passed
    assert all(e.instances == 60 and e.max_violation <= 1e-9 for e in r.entries)


def test_diameter_suite_has_zero_violations():
    r = run_certify("diameter-bounds", trials=200, seed=9)
    assert all(e.max_violation == 0 for e in r.entries)


def test_reports_are_deterministic():
    a = dumps(run_certify("lemma-sandwich", 30, seed=5).to_dict())
    b = dumps(run_certify("lemma-sandwich", 30, seed=5).to_dict())
    assert a == b
    doc = json.loads(a)
    assert doc["seed"] == 5 and doc["passed"] is True
    assert "wall" not in a


def test_entry_pass_rule():
    tol = Tolerance(abs=1e-9, rel=0.0)
    e = Entry("x")
    e.record(1.0, 1.0 + 1e-12, tol)
    e.record(1.0 + 5e-10, 1.0, tol)
    assert e.passed and e.max_violation == pytest.approx(5e-10)
    e.record(2.0, 1.0, tol)
    assert not e.passed and e.max_violation == 1.0
    f = Entry("inf")
    f.record(float("inf"), float("inf"), tol)
    assert f.passed


def test_bad_arguments():
    with pytest.raises(ValueError):
        run_certify("nope")
    with pytest.raises(ValueError):
        run_certify("all", trials=0)
