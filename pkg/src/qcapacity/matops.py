"""Dense complex-matrix kernel.

Matrices are plain ``numpy.ndarray`` objects of dtype ``complex128``.
Every function here is pure: inputs are never modified in place.
"""

from __future__ import annotations

from typing import NamedTuple, Sequence

import numpy as np

from .errors import (
    BadDims,
    DimensionOverflow,
    NegativeEigenvalue,
    NoConvergence,
    NotHermitian,
    ShapeMismatch,
)

MAX_DIM = 4096
ZERO_TOL = 1e-12
HERMITIAN_TOL = 1e-10
JACOBI_MAX_SWEEPS = 100


class EigenDecomposition(NamedTuple):
    """Eigenvalues in ascending order and the unitary whose columns are
    the matching eigenvectors."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def as_matrix(m) -> np.ndarray:
    """Coerce ``m`` to a finite 2-D complex array."""
    arr = np.asarray(getattr(m, "matrix", m), dtype=np.complex128)
    if arr.ndim != 2:
        raise ShapeMismatch(f"expected a 2-D matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("matrix has non-finite entries")
    return arr


def hermitian_defect(m: np.ndarray) -> float:
    """Relative Frobenius distance between ``m`` and its adjoint."""
    return float(np.linalg.norm(m - m.conj().T) / max(1.0, np.linalg.norm(m)))


def _check_hermitian(m: np.ndarray, tol: float = HERMITIAN_TOL) -> None:
    if m.shape[0] != m.shape[1]:
        raise NotHermitian(f"matrix is not square: {m.shape}")
    defect = hermitian_defect(m)
    if defect > tol:
        raise NotHermitian(f"||M - M^dag||_F / max(1, ||M||_F) = {defect:.3e} > {tol:g}")


def hermitian_eig(m, method: str = "lapack") -> EigenDecomposition:
    """Eigendecomposition of a Hermitian matrix.

    ``method="lapack"`` delegates to ``numpy.linalg.eigh``;
    ``method="jacobi"`` runs the cyclic Jacobi iteration in pure numpy and
    raises :class:`NoConvergence` after ``JACOBI_MAX_SWEEPS`` sweeps.
    """
    m = as_matrix(m)
    _check_hermitian(m)
    h = 0.5 * (m + m.conj().T)
    if method == "lapack":
        w, v = np.linalg.eigh(h)
    elif method == "jacobi":
        w, v = jacobi_eigh(h)
    else:
        raise ValueError(f"unknown eigensolver {method!r}")
    return EigenDecomposition(w, v)


def jacobi_eigh(h: np.ndarray, max_sweeps: int = JACOBI_MAX_SWEEPS):
    """Cyclic complex Jacobi rotations; returns ascending eigenvalues."""
    a = np.array(h, dtype=np.complex128)
    n = a.shape[0]
    v = np.eye(n, dtype=np.complex128)
    scale = max(np.linalg.norm(a), np.finfo(float).tiny)
    offdiag = ~np.eye(n, dtype=bool)
    for _ in range(max_sweeps):
        off = np.linalg.norm(a[offdiag])
        if off <= 1e-15 * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                r = abs(apq)
                if r <= 1e-300:
                    continue
                phase = apq / r
                theta = 0.5 * np.arctan2(2.0 * r, a[p, p].real - a[q, q].real)
                c, s = np.cos(theta), np.sin(theta)
                # rotation acting on columns p, q: R = diag(1, conj(phase)) @ [[c, -s], [s, c]]
                rot = np.array([[c, -s], [s * np.conj(phase), c * np.conj(phase)]])
                idx = [p, q]
                a[:, idx] = a[:, idx] @ rot
                a[idx, :] = rot.conj().T @ a[idx, :]
                v[:, idx] = v[:, idx] @ rot
    else:
        off = np.linalg.norm(a[offdiag])
        if off > 1e-15 * scale:
            raise NoConvergence(f"Jacobi did not converge in {max_sweeps} sweeps (off-norm {off:.3e})")
    w = np.diag(a).real
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]


def spectral_function(m, f, zero_tol: float = ZERO_TOL) -> np.ndarray:
    """Apply ``f`` to the eigenvalues above ``zero_tol``; others map to 0."""
    w, v = hermitian_eig(m)
    fw = np.zeros_like(w)
    mask = w > zero_tol
    fw[mask] = f(w[mask])
    return (v * fw) @ v.conj().T


def matrix_log_on_support(m, zero_tol: float = ZERO_TOL) -> np.ndarray:
    """Base-2 logarithm of a PSD matrix restricted to its support.

    Eigenvalues at or below ``zero_tol`` contribute 0 (the ``0 log 0 = 0``
    convention); eigenvalues below ``-zero_tol`` raise
    :class:`NegativeEigenvalue`.
    """
    if zero_tol <= 0:
        raise ValueError("zero_tol must be positive")
    w, v = hermitian_eig(m)
    if w.size and w[0] < -zero_tol:
        raise NegativeEigenvalue(f"eigenvalue {w[0]:.3e} < -{zero_tol:g}")
    fw = np.zeros_like(w)
    mask = w > zero_tol
    fw[mask] = np.log2(w[mask])
    return (v * fw) @ v.conj().T


def matrix_exp2(m) -> np.ndarray:
    """``2**M`` for Hermitian ``M``, built from its eigendecomposition."""
    w, v = hermitian_eig(m)
    return (v * np.exp2(w)) @ v.conj().T


def tensor(a, b, max_dim: int = MAX_DIM) -> np.ndarray:
    """Kronecker product ``a (x) b``."""
    a = as_matrix(a)
    b = as_matrix(b)
    rows, cols = a.shape[0] * b.shape[0], a.shape[1] * b.shape[1]
    if max(rows, cols) > max_dim:
        raise DimensionOverflow(f"tensor product of shape {(rows, cols)} exceeds max dimension {max_dim}")
    return np.kron(a, b)


def tensor_all(mats: Sequence, max_dim: int = MAX_DIM) -> np.ndarray:
    out = as_matrix(mats[0])
    for m in mats[1:]:
        out = tensor(out, m, max_dim=max_dim)
    return out


def partial_trace(m, dims: Sequence[int], keep) -> np.ndarray:
    """Trace out every tensor factor whose index is not in ``keep``.

    ``dims`` lists the factor dimensions; kept factors stay in their
    original order.
    """
    m = as_matrix(m)
    dims = [int(d) for d in dims]
    if any(d <= 0 for d in dims):
        raise BadDims(f"dimensions must be positive: {dims}")
    total = int(np.prod(dims))
    if m.shape != (total, total):
        raise BadDims(f"dims {dims} (product {total}) do not match matrix shape {m.shape}")
    keep = sorted(set(int(k) for k in keep))
    if any(k < 0 or k >= len(dims) for k in keep):
        raise BadDims(f"keep indices {keep} out of range for {len(dims)} factors")
    n = len(dims)
    t = m.reshape(dims + dims)
    traced = [i for i in range(n) if i not in keep]
    # trace highest axes first so the remaining indices stay valid
    for count, i in enumerate(sorted(traced, reverse=True)):
        nleft = n - count
        t = np.trace(t, axis1=i, axis2=i + nleft)
    d_keep = int(np.prod([dims[k] for k in keep])) if keep else 1
    return t.reshape(d_keep, d_keep)


def frobenius_distance(a, b) -> float:
    a = as_matrix(a)
    b = as_matrix(b)
    if a.shape != b.shape:
        raise ShapeMismatch(f"shapes differ: {a.shape} vs {b.shape}")
    return float(np.linalg.norm(a - b))


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary from the QR decomposition of a Ginibre matrix."""
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))
