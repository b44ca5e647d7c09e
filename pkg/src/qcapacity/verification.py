"""Randomized identity suites used by ``qcap verify`` and the acceptance
tests. Each check returns the largest deviation seen over its trials."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channels import identity, amplitude_damping, depolarizing, erasure, phase_damping
from .entropy_measures import holevo_chi, holevo_from_relent, relative_entropy
from .states import Ensemble, random_state, von_neumann_entropy
from .superactivation import verify_factorization

TOLERANCES = {
    "factorization": 1e-8,
    "holevo_relent": 1e-9,
    "klein": 1e-9,
    "entropy_additivity": 1e-9,
}


def qubit_zoo():
    return [identity(2), erasure(2, 0.3), depolarizing(0.5), amplitude_damping(0.3), phase_damping(0.4)]


@dataclass
class CheckResult:
    name: str
    trials: int
    max_deviation: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(self.max_deviation <= self.tolerance)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "trials": self.trials,
            "max_deviation": self.max_deviation,
            "tolerance": self.tolerance,
            "passed": self.passed,
        }


def _seeds(seed: int, trials: int) -> np.ndarray:
    return np.random.default_rng(seed).integers(0, 2**31 - 1, size=(trials, 4))


def factorization_gaps(trials: int, seed: int = 0) -> np.ndarray:
    """``|D(r1 r2 || s1 s2) - D(r1||s1) - D(r2||s2)|`` on full-rank quartets
    with each dimension drawn from 2..4."""
    rng = np.random.default_rng(seed)
    gaps = np.empty(trials)
    for t, s in enumerate(_seeds(seed + 1, trials)):
        d1, d2 = (int(x) for x in rng.integers(2, 5, size=2))
        gaps[t] = verify_factorization(
            random_state(d1, seed=int(s[0])),
            random_state(d1, seed=int(s[1])),
            random_state(d2, seed=int(s[2])),
            random_state(d2, seed=int(s[3])),
        )
    return gaps


def check_factorization(trials: int, seed: int = 0) -> CheckResult:
    gaps = factorization_gaps(trials, seed)
    return CheckResult("factorization", trials, float(gaps.max(initial=0.0)), TOLERANCES["factorization"])


def random_ensemble(dim: int, members: int, rng: np.random.Generator, pure: bool = False) -> Ensemble:
    p = rng.dirichlet(np.ones(members))
    rank = 1 if pure else None
    states = tuple(random_state(dim, rank, seed=int(rng.integers(2**31 - 1))) for _ in range(members))
    return Ensemble(p, states)


def check_holevo_relent(trials: int, seed: int = 0, channels=None) -> CheckResult:
    """``holevo_chi`` against ``holevo_from_relent`` on random 3-member ensembles."""
    rng = np.random.default_rng(seed)
    channels = channels or qubit_zoo()
    worst = 0.0
    for _ in range(trials):
        for ch in channels:
            e = random_ensemble(ch.dim_in, 3, rng)
            worst = max(worst, abs(holevo_chi(e, ch) - holevo_from_relent(e, ch)))
    return CheckResult("holevo_relent", trials, worst, TOLERANCES["holevo_relent"])


def check_klein(trials: int, seed: int = 0) -> CheckResult:
    """Largest violation ``max(0, -D)`` over full-rank pairs."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        d = int(rng.integers(2, 5))
        rho = random_state(d, seed=int(rng.integers(2**31 - 1)))
        sigma = random_state(d, seed=int(rng.integers(2**31 - 1)))
        worst = max(worst, -relative_entropy(rho, sigma).value)
    return CheckResult("klein", trials, max(worst, 0.0), TOLERANCES["klein"])


def check_entropy_additivity(trials: int, seed: int = 0) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        d1, d2 = (int(x) for x in rng.integers(2, 5, size=2))
        a = random_state(d1, int(rng.integers(1, d1 + 1)), seed=int(rng.integers(2**31 - 1)))
        b = random_state(d2, int(rng.integers(1, d2 + 1)), seed=int(rng.integers(2**31 - 1)))
        joint = von_neumann_entropy(np.kron(a.matrix, b.matrix))
        worst = max(worst, abs(joint - von_neumann_entropy(a) - von_neumann_entropy(b)))
    return CheckResult("entropy_additivity", trials, worst, TOLERANCES["entropy_additivity"])


SUITES = {
    "factorization": (check_factorization,),
    "identities": (check_factorization, check_holevo_relent, check_klein, check_entropy_additivity),
}


def run_suite(name: str, trials: int, seed: int = 0) -> list:
    if name not in SUITES:
        raise ValueError(f"unknown suite {name!r}; choose from {sorted(SUITES)}")
    return [check(trials, seed) for check in SUITES[name]]
