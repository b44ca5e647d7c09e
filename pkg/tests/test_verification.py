import numpy as np
import pytest

from qcapacity.verification import (
    TOLERANCES,
    CheckResult,
    check_entropy_additivity,
    check_factorization,
    check_holevo_relent,
    check_klein,
    factorization_gaps,
    random_ensemble,
    run_suite,
)


def test_checks_pass():
    for check in (check_factorization, check_holevo_relent, check_klein, check_entropy_additivity):
        result = check(20, seed=3)
        assert result.passed, result
        assert result.tolerance == TOLERANCES[result.name]


def test_factorization_gaps_are_deterministic():
    assert np.array_equal(factorization_gaps(30, seed=1), factorization_gaps(30, seed=1))
    assert factorization_gaps(0).size == 0


def test_check_result():
    r = CheckResult("x", 3, 2e-9, 1e-9)
    assert r.passed is False
    assert r.to_dict() == {"name": "x", "trials": 3, "max_deviation": 2e-9, "tolerance": 1e-9, "passed": False}


def test_random_ensemble():
    e = random_ensemble(3, 4, np.random.default_rng(0), pure=True)
    assert len(e) == 4 and e.dim == 3
    assert all(np.isclose(np.trace(s.matrix @ s.matrix).real, 1.0) for s in e.states)


def test_run_suite():
    assert [c.name for c in run_suite("factorization", 2)] == ["factorization"]
    with pytest.raises(ValueError):
        run_suite("nope", 2)
