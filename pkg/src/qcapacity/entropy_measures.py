"""Relative entropy, Holevo quantities, entropy exchange and coherent
information. All values are in bits."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channels import QuantumChannel, apply, apply_array, complementary
from .errors import DimMismatch, InfiniteTerm
from .matops import ZERO_TOL
from .states import (
    DensityMatrix,
    Ensemble,
    as_state,
    average_state,
    clamped_eigvals,
    entropy_of_spectrum,
    von_neumann_entropy,
)

SUPPORT_MASS_TOL = 1e-10


@dataclass(frozen=True)
class RelEntResult:
    value: float
    support_violation: bool = False

    def __float__(self):
        return self.value

    @property
    def is_finite(self) -> bool:
        return not self.support_violation


@dataclass(frozen=True)
class CoherentInfoResult:
    """Coherent information together with the pieces it was built from.

    A result computed from a single input fills ``s_output``/``s_env``;
    one computed from an ensemble also fills ``chi_ab``/``chi_ae``.
    Unused fields are NaN.
    """

    value: float
    s_output: float = math.nan
    s_env: float = math.nan
    chi_ab: float = math.nan
    chi_ae: float = math.nan


def relative_entropy(rho, sigma, zero_tol: float = ZERO_TOL) -> RelEntResult:
    """``D(rho || sigma) = Tr rho (log2 rho - log2 sigma)``.

    Returns ``inf`` with ``support_violation`` set when more than
    ``SUPPORT_MASS_TOL`` of ``rho`` lies in the kernel of ``sigma``.
    """
    rho, sigma = as_state(rho), as_state(sigma)
    if rho.dim != sigma.dim:
        raise DimMismatch(f"dimensions differ: {rho.dim} vs {sigma.dim}")
    return _relative_entropy_arrays(rho.matrix, sigma.matrix, zero_tol)


def _relative_entropy_arrays(rho: np.ndarray, sigma: np.ndarray, zero_tol: float = ZERO_TOL) -> RelEntResult:
    ws, vs = np.linalg.eigh(0.5 * (sigma + sigma.conj().T))
    support = ws > zero_tol
    # diagonal of rho in sigma's eigenbasis
    rho_diag = np.einsum("ik,ij,jk->k", vs.conj(), rho, vs).real
    if np.sum(rho_diag[~support]) > SUPPORT_MASS_TOL:
        return RelEntResult(math.inf, True)
    cross = float(np.sum(rho_diag[support] * np.log2(ws[support])))
    neg_entropy = -entropy_of_spectrum(clamped_eigvals(rho))
    return RelEntResult(neg_entropy - cross, False)


def _check_ensemble(e: Ensemble, ch: QuantumChannel) -> None:
    if e.dim != ch.dim_in:
        raise DimMismatch(f"ensemble dimension {e.dim} does not match channel input {ch.dim_in}")


def holevo_chi(e: Ensemble, ch: QuantumChannel) -> float:
    """``S(N(sum p_i rho_i)) - sum p_i S(N(rho_i))``.

    Pass ``complementary(ch)`` to get the quantity leaked to the
    environment.
    """
    _check_ensemble(e, ch)
    outs = apply_array(ch.kraus, e.stacked())
    avg = np.einsum("k,kij->ij", e.probs, outs)
    s_avg = entropy_of_spectrum(clamped_eigvals(avg))
    s_members = sum(p * entropy_of_spectrum(clamped_eigvals(o)) for p, o in zip(e.probs, outs))
    return s_avg - s_members


def holevo_from_relent(e: Ensemble, ch: QuantumChannel) -> float:
    """``sum_k p_k D(N(rho_k) || N(sigma))`` with ``sigma`` the average input."""
    _check_ensemble(e, ch)
    outs = apply_array(ch.kraus, e.stacked())
    sigma_out = apply_array(ch.kraus, average_state(e).matrix)
    total = 0.0
    for k, (p, o) in enumerate(zip(e.probs, outs)):
        if p == 0:
            continue
        d = _relative_entropy_arrays(o, sigma_out)
        if d.support_violation:
            raise InfiniteTerm(f"member {k} is not supported on the average output")
        total += p * d.value
    return total


def entropy_exchange(rho, ch: QuantumChannel) -> float:
    """Entropy of the environment output, ``S(N_c(rho))``."""
    rho = _checked_input(rho, ch)
    return von_neumann_entropy(apply(complementary(ch), rho))


def _checked_input(rho, ch: QuantumChannel) -> DensityMatrix:
    rho = as_state(rho)
    if rho.dim != ch.dim_in:
        raise DimMismatch(f"state has dimension {rho.dim}, channel expects {ch.dim_in}")
    return rho


def coherent_information(rho, ch: QuantumChannel) -> CoherentInfoResult:
    """``S(N(rho)) - S(N_c(rho))``; negative values are returned as-is."""
    rho = _checked_input(rho, ch)
    s_out = von_neumann_entropy(apply(ch, rho))
    s_env = entropy_exchange(rho, ch)
    return CoherentInfoResult(s_out - s_env, s_output=s_out, s_env=s_env)


def coherent_info_via_holevo(e: Ensemble, ch: QuantumChannel) -> CoherentInfoResult:
    """``chi_AB - chi_AE`` over the ensemble members.

    For a single-member ensemble both Holevo quantities vanish, so this is
    not the same as :func:`coherent_information` of the member.
    """
    _check_ensemble(e, ch)
    chi_ab = holevo_chi(e, ch)
    chi_ae = holevo_chi(e, complementary(ch))
    avg = average_state(e)
    s_out = von_neumann_entropy(apply(ch, avg))
    s_env = entropy_exchange(avg, ch)
    return CoherentInfoResult(chi_ab - chi_ae, s_output=s_out, s_env=s_env, chi_ab=chi_ab, chi_ae=chi_ae)
