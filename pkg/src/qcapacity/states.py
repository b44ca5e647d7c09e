"""Density matrices, ensembles and von Neumann entropy."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import BadEnsemble, BadRank, DimMismatch, NotPSD, TraceNotOne
from .matops import HERMITIAN_TOL, _check_hermitian, as_matrix

STATE_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """A validated quantum state. Build instances with :func:`validate_state`."""

    matrix: np.ndarray

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def __array__(self, dtype=None, copy=None):
        return self.matrix if dtype is None else self.matrix.astype(dtype)

    def __repr__(self):
        return f"DensityMatrix(dim={self.dim})"


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=np.complex128)
    arr.setflags(write=False)
    return arr


def validate_state(m, tol: float = STATE_TOL) -> DensityMatrix:
    """Check that ``m`` is a density matrix and wrap it.

    Raises :class:`NotHermitian`, :class:`NotPSD` (smallest eigenvalue below
    ``-tol``) or :class:`TraceNotOne`. Entries are stored as given.
    """
    if isinstance(m, DensityMatrix):
        return m
    arr = as_matrix(m)
    _check_hermitian(arr, HERMITIAN_TOL)
    tr = np.trace(arr)
    if abs(tr - 1.0) > tol:
        raise TraceNotOne(f"trace is {tr.real:.12g}{tr.imag:+.3g}j, expected 1")
    w = np.linalg.eigvalsh(0.5 * (arr + arr.conj().T))
    if w[0] < -tol:
        raise NotPSD(f"smallest eigenvalue {w[0]:.6g} < -{tol:g}")
    return DensityMatrix(_frozen(arr))


def as_state(m) -> DensityMatrix:
    return m if isinstance(m, DensityMatrix) else validate_state(m)


def clamped_eigvals(m) -> np.ndarray:
    """Eigenvalues with the (-1e-10, 0) window clamped to zero."""
    arr = np.asarray(getattr(m, "matrix", m))
    w = np.linalg.eigvalsh(0.5 * (arr + arr.conj().T))
    if w.size and w[0] < -STATE_TOL:
        raise NotPSD(f"smallest eigenvalue {w[0]:.6g} < -{STATE_TOL:g}")
    return np.clip(w, 0.0, None)


def entropy_of_spectrum(w) -> float:
    """Shannon entropy in bits of a non-negative spectrum, ``0 log 0 = 0``."""
    w = np.asarray(w, dtype=float)
    w = w[w > 0]
    # a spectrum summing to 1 + eps can give -eps; entropy is never negative
    return max(0.0, float(-np.sum(w * np.log2(w))))


def von_neumann_entropy(rho) -> float:
    """``S(rho) = -Tr(rho log2 rho)`` in bits."""
    rho = as_state(rho)
    return entropy_of_spectrum(clamped_eigvals(rho.matrix))


def pure_state(vec) -> DensityMatrix:
    """``|v><v|`` for a (not necessarily normalized) vector ``v``."""
    v = np.asarray(vec, dtype=np.complex128).ravel()
    v = v / np.linalg.norm(v)
    return validate_state(np.outer(v, v.conj()))


def basis_state(dim: int, index: int) -> DensityMatrix:
    v = np.zeros(dim, dtype=np.complex128)
    v[index] = 1.0
    return pure_state(v)


def maximally_mixed(dim: int) -> DensityMatrix:
    return validate_state(np.eye(dim, dtype=np.complex128) / dim)


@dataclass(frozen=True, eq=False)
class Ensemble:
    """Probability-weighted list of density matrices of a common dimension.

    The type does not know whether it holds channel inputs or outputs;
    callers say which.
    """

    probs: np.ndarray
    states: tuple

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=float).ravel()
        states = tuple(as_state(s) for s in self.states)
        if len(states) == 0:
            raise BadEnsemble("ensemble has no members")
        if probs.shape[0] != len(states):
            raise BadEnsemble(f"{probs.shape[0]} probabilities for {len(states)} states")
        if np.any(probs < -STATE_TOL) or np.any(probs > 1 + STATE_TOL):
            raise BadEnsemble("probabilities must lie in [0, 1]")
        if abs(probs.sum() - 1.0) > STATE_TOL:
            raise BadEnsemble(f"probabilities sum to {probs.sum():.12g}, expected 1")
        dims = {s.dim for s in states}
        if len(dims) != 1:
            raise DimMismatch(f"ensemble members have differing dimensions {sorted(dims)}")
        probs = np.clip(probs, 0.0, 1.0)
        probs.setflags(write=False)
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "states", states)

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple]) -> "Ensemble":
        pairs = list(pairs)
        return cls(np.array([p for p, _ in pairs], dtype=float), tuple(s for _, s in pairs))

    @property
    def dim(self) -> int:
        return self.states[0].dim

    def __len__(self):
        return len(self.states)

    def __iter__(self):
        return iter(zip(self.probs, self.states))

    def stacked(self) -> np.ndarray:
        """Member matrices as a ``(k, dim, dim)`` array."""
        return np.stack([s.matrix for s in self.states])


def average_state(e: Ensemble) -> DensityMatrix:
    """``sum_k p_k rho_k``."""
    avg = np.einsum("k,kij->ij", e.probs, e.stacked())
    return validate_state(avg)


def random_state(dim: int, rank: int | None = None, seed: int = 0) -> DensityMatrix:
    """``G G^dag / Tr(G G^dag)`` with ``G`` a ``dim x rank`` complex Ginibre matrix."""
    rank = dim if rank is None else rank
    if dim < 1 or rank < 1 or rank > dim:
        raise BadRank(f"rank {rank} invalid for dimension {dim}")
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    a = g @ g.conj().T
    a = 0.5 * (a + a.conj().T)
    return validate_state(a / np.trace(a).real)


def random_pure_states(dim: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """``count`` Haar-random pure states as a ``(count, dim, dim)`` array."""
    v = rng.standard_normal((count, dim)) + 1j * rng.standard_normal((count, dim))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    return np.einsum("ki,kj->kij", v, v.conj())


def states_close(a, b, atol: float = 1e-10) -> bool:
    return bool(np.allclose(np.asarray(a), np.asarray(b), atol=atol))


def check_same_dim(*states: Sequence) -> int:
    dims = {np.asarray(getattr(s, "matrix", s)).shape[0] for s in states}
    if len(dims) != 1:
        raise DimMismatch(f"states have differing dimensions {sorted(dims)}")
    return dims.pop()
