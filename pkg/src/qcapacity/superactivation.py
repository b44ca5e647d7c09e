"""Product tests for joint channel states and the superactivation verdict.

A bipartite operator is a tensor product exactly when its operator Schmidt
rank is one, and relative entropy is additive on product arguments. Given
optimized joint states of ``a (x) b`` this module measures how far they are
from products, how large the capacity gain over the single channels is,
and classifies the pair.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

import numpy as np

from .capacity import CapacityReport, OptimizerConfig, joint_q1, q1
from .channels import QuantumChannel, apply, tensor_channels
from .entropy_measures import relative_entropy
from .errors import BadDims, SupportViolation
from .states import as_state

GAP_TOL = 1e-3
ZERO_CAP_TOL = 1e-4
PRODUCT_TOL = 1e-4


class OperatorSchmidtDecomposition(NamedTuple):
    coefficients: np.ndarray
    left_ops: list
    right_ops: list

    def reconstruct(self) -> np.ndarray:
        return sum(c * np.kron(a, b) for c, a, b in zip(self.coefficients, self.left_ops, self.right_ops))


class Verdict(str, Enum):
    ADDITIVE_PRODUCT = "ADDITIVE_PRODUCT"
    NON_PRODUCT_NO_GAIN = "NON_PRODUCT_NO_GAIN"
    SUPERACTIVE_CANDIDATE = "SUPERACTIVE_CANDIDATE"


def _matrix_and_dims(state, dims) -> tuple:
    m = np.asarray(getattr(state, "matrix", state), dtype=np.complex128)
    d1, d2 = (int(d) for d in dims)
    if d1 < 1 or d2 < 1 or m.shape != (d1 * d2, d1 * d2):
        raise BadDims(f"dims {dims} do not factor a matrix of shape {m.shape}")
    return m, d1, d2


def realign(m: np.ndarray, d1: int, d2: int) -> np.ndarray:
    """``R[(i,j),(k,l)] = M[(i,k),(j,l)]``."""
    return m.reshape(d1, d2, d1, d2).transpose(0, 2, 1, 3).reshape(d1 * d1, d2 * d2)


def operator_schmidt(state, dims) -> OperatorSchmidtDecomposition:
    """``M = sum_k c_k L_k (x) R_k`` with Hilbert-Schmidt orthonormal
    ``L_k``, ``R_k`` and descending ``c_k``, from the SVD of the realigned
    matrix."""
    m, d1, d2 = _matrix_and_dims(state, dims)
    u, s, vh = np.linalg.svd(realign(m, d1, d2), full_matrices=False)
    left = [u[:, k].reshape(d1, d1) for k in range(s.size)]
    right = [vh[k].reshape(d2, d2) for k in range(s.size)]
    return OperatorSchmidtDecomposition(s, left, right)


def product_residual(state, dims) -> float:
    """``sqrt(sum_{k>=2} c_k^2) / ||M||_F``: zero exactly for products."""
    m, _, _ = _matrix_and_dims(state, dims)
    c = operator_schmidt(m, dims).coefficients
    norm = np.linalg.norm(m)
    if norm == 0:
        return 0.0
    return float(min(1.0, np.sqrt(np.sum(c[1:] ** 2)) / norm))


def is_product(state, dims, tol: float = 1e-6) -> tuple:
    """``(residual <= tol, residual)``."""
    r = product_residual(state, dims)
    return r <= tol, r


def partial_transpose(m: np.ndarray, d1: int, d2: int) -> np.ndarray:
    """Transpose of the second factor."""
    return m.reshape(d1, d2, d1, d2).transpose(0, 3, 2, 1).reshape(d1 * d2, d1 * d2)


def negativity(state, dims) -> float:
    """``(||rho^{T_B}||_1 - 1) / 2``. Positive values certify entanglement;
    zero does not certify separability beyond 2x2 and 2x3."""
    m, d1, d2 = _matrix_and_dims(state, dims)
    pt = partial_transpose(m, d1, d2)
    w = np.linalg.eigvalsh(0.5 * (pt + pt.conj().T))
    return max(0.0, float((np.sum(np.abs(w)) - 1.0) / 2.0))


def verify_factorization(r1, s1, r2, s2) -> float:
    """``|D(r1 (x) r2 || s1 (x) s2) - D(r1 || s1) - D(r2 || s2)|``.

    This is an identity of the relative entropy, so the result is rounding
    error only.
    """
    r1, s1, r2, s2 = (as_state(x) for x in (r1, s1, r2, s2))
    d1 = relative_entropy(r1, s1)
    d2 = relative_entropy(r2, s2)
    joint = relative_entropy(np.kron(r1.matrix, r2.matrix), np.kron(s1.matrix, s2.matrix))
    if d1.support_violation or d2.support_violation or joint.support_violation:
        raise SupportViolation("a relative entropy in the factorization is infinite")
    return abs(joint.value - d1.value - d2.value)


@dataclass
class FactorizationReport:
    value_a: float
    value_b: float
    value_joint: float
    additivity_gap: float
    schmidt_coeffs_optimal: list
    schmidt_coeffs_average: list
    product_residual_optimal: float
    product_residual_average: float
    negativity_optimal: float
    negativity_average: float
    verdict: Verdict
    both_zero: bool
    joint_form: str
    report_a: CapacityReport | None = None
    report_b: CapacityReport | None = None
    report_joint: CapacityReport | None = None

    def to_dict(self, include_reports: bool = False) -> dict:
        doc = {
            "verdict": self.verdict.value,
            "both_zero": self.both_zero,
            "value_a": self.value_a,
            "value_b": self.value_b,
            "value_joint": self.value_joint,
            "additivity_gap": self.additivity_gap,
            "joint_form": self.joint_form,
            "schmidt_coeffs_optimal": list(self.schmidt_coeffs_optimal),
            "schmidt_coeffs_average": list(self.schmidt_coeffs_average),
            "product_residual_optimal": self.product_residual_optimal,
            "product_residual_average": self.product_residual_average,
            "negativity_optimal": self.negativity_optimal,
            "negativity_average": self.negativity_average,
        }
        if include_reports:
            for key in ("report_a", "report_b", "report_joint"):
                rep = getattr(self, key)
                doc[key] = rep.to_dict(include_states=False) if rep is not None else None
        return doc


def classify(gap: float, residual_optimal: float, value_a: float, value_b: float,
             gap_tol: float = GAP_TOL, zero_cap_tol: float = ZERO_CAP_TOL) -> tuple:
    """Verdict and the ``both_zero`` flag for a measured pair."""
    both_zero = value_a <= zero_cap_tol and value_b <= zero_cap_tol
    if gap > gap_tol:
        return Verdict.SUPERACTIVE_CANDIDATE, both_zero
    if residual_optimal <= PRODUCT_TOL:
        return Verdict.ADDITIVE_PRODUCT, both_zero
    return Verdict.NON_PRODUCT_NO_GAIN, both_zero


def analyze_pair(
    a: QuantumChannel,
    b: QuantumChannel,
    cfg: OptimizerConfig = OptimizerConfig(),
    gap_tol: float = GAP_TOL,
    zero_cap_tol: float = ZERO_CAP_TOL,
) -> FactorizationReport:
    """Compare ``Q1(a (x) b)`` with ``Q1(a) + Q1(b)`` and test the joint
    optimal input and joint average output for product structure across
    the ``a | b`` cut."""
    rep_a = q1(a, cfg)
    rep_b = q1(b, cfg)
    rep_joint = joint_q1(a, b, cfg, report_a=rep_a, report_b=rep_b)
    gap = rep_joint.value - (rep_a.value + rep_b.value)

    joint_in = rep_joint.joint_input
    in_dims = (a.dim_in, b.dim_in)
    out_dims = (a.dim_out, b.dim_out)
    avg_out = apply(tensor_channels(a, b), joint_in)

    coeffs_opt = operator_schmidt(joint_in, in_dims).coefficients
    coeffs_avg = operator_schmidt(avg_out, out_dims).coefficients
    res_opt = product_residual(joint_in, in_dims)
    res_avg = product_residual(avg_out, out_dims)
    verdict, both_zero = classify(gap, res_opt, rep_a.value, rep_b.value, gap_tol, zero_cap_tol)
    return FactorizationReport(
        value_a=rep_a.value,
        value_b=rep_b.value,
        value_joint=rep_joint.value,
        additivity_gap=gap,
        schmidt_coeffs_optimal=[float(c) for c in coeffs_opt],
        schmidt_coeffs_average=[float(c) for c in coeffs_avg],
        product_residual_optimal=res_opt,
        product_residual_average=res_avg,
        negativity_optimal=negativity(joint_in, in_dims),
        negativity_average=negativity(avg_out, out_dims),
        verdict=verdict,
        both_zero=both_zero,
        joint_form=rep_joint.form,
        report_a=rep_a,
        report_b=rep_b,
        report_joint=rep_joint,
    )
