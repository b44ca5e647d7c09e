import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qcapacity.errors import BadEnsemble, BadRank, DimMismatch, NotHermitian, NotPSD, TraceNotOne
from qcapacity.states import (
    Ensemble,
    average_state,
    basis_state,
    maximally_mixed,
    pure_state,
    random_state,
    validate_state,
    von_neumann_entropy,
)

PLUS = pure_state([1, 1])


def test_validate_examples():
    assert validate_state(np.eye(2) / 2).dim == 2
    with pytest.raises(TraceNotOne):
        validate_state(np.diag([0.7, 0.4]))
    with pytest.raises(NotPSD):
        validate_state(np.array([[0.5, 0.6], [0.6, 0.5]]))
    with pytest.raises(NotHermitian):
        validate_state(np.array([[0.5, 0.1], [0.0, 0.5]]))


def test_validate_keeps_entries_and_freezes():
    m = np.array([[0.6, 0.2j], [-0.2j, 0.4]])
    rho = validate_state(m)
    assert np.array_equal(rho.matrix, m)
    with pytest.raises(ValueError):
        rho.matrix[0, 0] = 1.0


def test_validate_tolerates_tiny_negative_eigenvalue():
    rho = validate_state(np.diag([1 + 5e-11, -5e-11]))
    assert abs(von_neumann_entropy(rho)) <= 1e-9


def test_entropy_examples():
    assert von_neumann_entropy(basis_state(2, 0)) == 0.0
    assert np.isclose(von_neumann_entropy(maximally_mixed(2)), 1.0, atol=1e-14)
    assert np.isclose(von_neumann_entropy(np.diag([0.25, 0.75])), 2 - 0.75 * np.log2(3), atol=1e-14)


@pytest.mark.parametrize("p", np.linspace(0, 1, 11))
def test_binary_entropy(p):
    expected = 0.0 if p in (0, 1) else -p * np.log2(p) - (1 - p) * np.log2(1 - p)
    assert abs(von_neumann_entropy(np.diag([p, 1 - p])) - expected) < 1e-12


@settings(max_examples=40, deadline=None)
@given(dim=st.integers(1, 6), seed=st.integers(0, 2**32 - 1))
def test_entropy_bounds(dim, seed):
    s = von_neumann_entropy(random_state(dim, seed=seed))
    assert -1e-12 <= s <= np.log2(dim) + 1e-12


def test_entropy_unitary_invariance():
    rng = np.random.default_rng(4)
    rho = random_state(4, seed=2).matrix
    q, _ = np.linalg.qr(rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4)))
    assert np.isclose(von_neumann_entropy(q @ rho @ q.conj().T), von_neumann_entropy(rho), atol=1e-12)


def test_average_examples():
    rho = random_state(3, seed=0)
    assert np.allclose(average_state(Ensemble([1.0], (rho,))).matrix, rho.matrix)
    e = Ensemble.from_pairs([(0.5, basis_state(2, 0)), (0.5, basis_state(2, 1))])
    assert np.allclose(average_state(e).matrix, np.eye(2) / 2)
    e = Ensemble.from_pairs([(0.5, basis_state(2, 0)), (0.5, PLUS)])
    assert np.allclose(average_state(e).matrix, [[0.75, 0.25], [0.25, 0.25]])


def test_ensemble_validation():
    a, b = basis_state(2, 0), basis_state(2, 1)
    with pytest.raises(BadEnsemble):
        Ensemble([0.5, 0.6], (a, b))
    with pytest.raises(BadEnsemble):
        Ensemble([1.2, -0.2], (a, b))
    with pytest.raises(BadEnsemble):
        Ensemble([1.0], (a, b))
    with pytest.raises(BadEnsemble):
        Ensemble([], ())
    with pytest.raises(DimMismatch):
        Ensemble([0.5, 0.5], (a, maximally_mixed(3)))


def test_ensemble_iteration():
    e = Ensemble([0.25, 0.75], (basis_state(2, 0), PLUS))
    assert len(e) == 2
    assert e.dim == 2
    probs = [p for p, _ in e]
    assert probs == [0.25, 0.75]
    assert e.stacked().shape == (2, 2, 2)


def test_random_state_examples():
    assert von_neumann_entropy(random_state(2, rank=1, seed=7)) <= 1e-8
    assert np.array_equal(random_state(3, seed=11).matrix, random_state(3, seed=11).matrix)
    mean = np.mean([np.linalg.eigvalsh(random_state(4, 4, seed=s).matrix) for s in range(1000)])
    assert abs(mean - 0.25) <= 0.05


def test_random_state_rank():
    for rank in (1, 2, 3):
        w = np.linalg.eigvalsh(random_state(4, rank, seed=rank).matrix)
        assert np.sum(w > 1e-10) == rank
    with pytest.raises(BadRank):
        random_state(2, rank=3)
    with pytest.raises(BadRank):
        random_state(2, rank=0)
