"""Quantum channels in Kraus form.

A channel stores its Kraus operators as a read-only ``(k, dim_out, dim_in)``
array. The environment of the Stinespring dilation has one level per Kraus
operator; no attempt is made to find a minimal dilation.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    BadParam,
    CompletenessViolation,
    DimensionOverflow,
    DimMismatch,
    ParseError,
    UnknownChannel,
)
from .matops import MAX_DIM, partial_trace
from .states import DensityMatrix, as_state, validate_state

COMPLETENESS_TOL = 1e-9


def completeness_defect(kraus: np.ndarray) -> float:
    """``|| sum_k A_k^dag A_k - I ||_F``."""
    din = kraus.shape[2]
    s = np.einsum("koi,koj->ij", kraus.conj(), kraus)
    return float(np.linalg.norm(s - np.eye(din)))


@dataclass(frozen=True, eq=False)
class QuantumChannel:
    kraus: np.ndarray
    name: str = ""

    def __post_init__(self):
        k = np.array(self.kraus, dtype=np.complex128)
        if k.ndim == 2:
            k = k[None]
        if k.ndim != 3 or k.shape[0] == 0:
            raise ParseError(f"Kraus operators must form a (k, dim_out, dim_in) array, got {k.shape}")
        if not np.all(np.isfinite(k)):
            raise ParseError("Kraus operators contain non-finite entries")
        count, dout, din = k.shape
        if count > din * dout:
            raise BadParam(f"{count} Kraus operators exceed dim_in * dim_out = {din * dout}")
        defect = completeness_defect(k)
        if defect > COMPLETENESS_TOL:
            raise CompletenessViolation(
                f"||sum A^dag A - I||_F = {defect:.3e} > {COMPLETENESS_TOL:g}", deviation=defect
            )
        k.setflags(write=False)
        object.__setattr__(self, "kraus", k)

    @property
    def dim_in(self) -> int:
        return self.kraus.shape[2]

    @property
    def dim_out(self) -> int:
        return self.kraus.shape[1]

    @property
    def env_dim(self) -> int:
        return self.kraus.shape[0]

    def __call__(self, rho) -> DensityMatrix:
        return apply(self, rho)

    def __repr__(self):
        label = self.name or "QuantumChannel"
        return f"<{label}: {self.dim_in} -> {self.dim_out}, {self.env_dim} Kraus>"


def apply_array(kraus: np.ndarray, rho: np.ndarray) -> np.ndarray:
    """Kraus sum on raw arrays; ``rho`` may carry leading batch axes."""
    out = np.einsum("koi,...ij,kpj->...op", kraus, rho, kraus.conj(), optimize=True)
    return 0.5 * (out + np.swapaxes(out, -1, -2).conj())


def adjoint_array(kraus: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Heisenberg-picture map ``X -> sum_k A_k^dag X A_k``."""
    return np.einsum("koi,...op,kpj->...ij", kraus.conj(), x, kraus, optimize=True)


def apply(ch: QuantumChannel, rho) -> DensityMatrix:
    """``sum_k A_k rho A_k^dag``."""
    rho = as_state(rho)
    if rho.dim != ch.dim_in:
        raise DimMismatch(f"state has dimension {rho.dim}, channel expects {ch.dim_in}")
    return validate_state(apply_array(ch.kraus, rho.matrix))


def stinespring_isometry(ch: QuantumChannel) -> np.ndarray:
    """``V = sum_k A_k (x) |k>_env`` with the output factor first."""
    count, dout, din = ch.kraus.shape
    return np.transpose(ch.kraus, (1, 0, 2)).reshape(dout * count, din)


def dilated_state(ch: QuantumChannel, rho) -> np.ndarray:
    """``V rho V^dag`` on output (x) environment."""
    v = stinespring_isometry(ch)
    rho = as_state(rho)
    return v @ rho.matrix @ v.conj().T


def complementary(ch: QuantumChannel) -> QuantumChannel:
    """Channel onto the environment: ``rho -> Tr_out(V rho V^dag)``.

    Kraus operators are ``(B_j)_{k,i} = (A_k)_{j,i}`` for each output
    basis index ``j``.
    """
    b = np.transpose(ch.kraus, (1, 0, 2))
    name = f"complementary({ch.name})" if ch.name else ""
    return QuantumChannel(b, name=name)


def tensor_channels(a: QuantumChannel, b: QuantumChannel, max_dim: int = MAX_DIM) -> QuantumChannel:
    """``a (x) b`` with Kraus set ``{A_i (x) B_j}``."""
    din, dout = a.dim_in * b.dim_in, a.dim_out * b.dim_out
    if max(din, dout) > max_dim:
        raise DimensionOverflow(f"joint channel {din} -> {dout} exceeds max dimension {max_dim}")
    ka, kb = a.kraus, b.kraus
    k = np.einsum("aij,bkl->abikjl", ka, kb).reshape(len(ka) * len(kb), dout, din)
    name = f"{a.name or '?'}*{b.name or '?'}"
    return QuantumChannel(k, name=name)


def tensor_power(ch: QuantumChannel, n: int, max_dim: int = MAX_DIM) -> QuantumChannel:
    if n < 1:
        raise BadParam("tensor power needs n >= 1")
    out = ch
    for _ in range(n - 1):
        out = tensor_channels(out, ch, max_dim=max_dim)
    return out


def choi_matrix(ch: QuantumChannel) -> np.ndarray:
    """``sum_ij |i><j| (x) N(|i><j|)``, input factor first, unnormalized."""
    din, dout = ch.dim_in, ch.dim_out
    units = np.zeros((din, din, din, din), dtype=np.complex128)
    for i in range(din):
        for j in range(din):
            units[i, j, i, j] = 1.0
    images = np.einsum("koi,abij,kpj->abop", ch.kraus, units, ch.kraus.conj())
    return np.transpose(images, (0, 2, 1, 3)).reshape(din * dout, din * dout)


def channel_from_choi(choi: np.ndarray, dim_in: int, dim_out: int, zero_tol: float = 1e-12, name: str = "") -> QuantumChannel:
    """Kraus operators from an unnormalized Choi matrix with input factor first."""
    choi = 0.5 * (choi + choi.conj().T)
    w, v = np.linalg.eigh(choi)
    keep = w > zero_tol * max(1.0, w[-1])
    kraus = []
    for lam, vec in zip(w[keep][::-1], v[:, keep].T[::-1]):
        # vec is indexed (i, o); the Kraus operator is indexed (o, i)
        kraus.append(np.sqrt(lam) * vec.reshape(dim_in, dim_out).T)
    return QuantumChannel(np.array(kraus), name=name)


def _check_prob(value: float, label: str) -> float:
    value = float(value)
    if not 0.0 <= value <= 1.0:
        raise BadParam(f"{label} = {value} not in [0, 1]")
    return value


def _check_dim(value: float) -> int:
    if float(value) != int(value) or int(value) < 1:
        raise BadParam(f"dimension must be a positive integer, got {value}")
    return int(value)


def identity(d: int = 2) -> QuantumChannel:
    d = _check_dim(d)
    return QuantumChannel(np.eye(d)[None], name=f"identity({d})")


def erasure(d: int, p: float) -> QuantumChannel:
    """With probability ``p`` replace the input by the flag ``|d>`` of a
    ``d + 1`` dimensional output."""
    d = _check_dim(d)
    p = _check_prob(p, "p")
    kraus = np.zeros((d + 1, d + 1, d), dtype=np.complex128)
    kraus[0, :d, :] = np.sqrt(1 - p) * np.eye(d)
    for i in range(d):
        kraus[i + 1, d, i] = np.sqrt(p)
    return QuantumChannel(kraus, name=f"erasure({d},{p:g})")


def _weyl_operators(d: int) -> list:
    omega = np.exp(2j * np.pi / d)
    shift = np.roll(np.eye(d), 1, axis=0)
    clock = np.diag(omega ** np.arange(d))
    return [np.linalg.matrix_power(shift, a) @ np.linalg.matrix_power(clock, b) for a in range(d) for b in range(d)]


def depolarizing(p: float, d: int = 2) -> QuantumChannel:
    """``rho -> (1 - p) rho + p I/d``."""
    p = _check_prob(p, "p")
    d = _check_dim(d)
    ops = _weyl_operators(d)
    weights = [1 - p + p / d**2] + [p / d**2] * (d * d - 1)
    kraus = [np.sqrt(w) * u for w, u in zip(weights, ops) if w > 0]
    label = f"depolarizing({p:g})" if d == 2 else f"depolarizing({d},{p:g})"
    return QuantumChannel(np.array(kraus), name=label)


def amplitude_damping(gamma: float) -> QuantumChannel:
    g = _check_prob(gamma, "gamma")
    a0 = np.array([[1, 0], [0, np.sqrt(1 - g)]])
    a1 = np.array([[0, np.sqrt(g)], [0, 0]])
    return QuantumChannel(np.array([a0, a1]), name=f"amplitude_damping({g:g})")


def phase_damping(lam: float) -> QuantumChannel:
    lam = _check_prob(lam, "lambda")
    a0 = np.array([[1, 0], [0, np.sqrt(1 - lam)]])
    a1 = np.array([[0, 0], [0, np.sqrt(lam)]])
    return QuantumChannel(np.array([a0, a1]), name=f"phase_damping({lam:g})")


_ZOO = {
    "identity": (identity, (1, 1)),
    "erasure": (erasure, (2, 2)),
    "depolarizing": (lambda *a: depolarizing(a[-1], *a[:-1]), (1, 2)),
    "amplitude_damping": (amplitude_damping, (1, 1)),
    "phase_damping": (phase_damping, (1, 1)),
}

ZOO_NAMES = tuple(_ZOO)


def zoo(name: str, params=()) -> QuantumChannel:
    """Standard channel by name.

    ``identity(d)``, ``erasure(d, p)``, ``depolarizing(p)`` (or
    ``depolarizing(d, p)``), ``amplitude_damping(gamma)`` and
    ``phase_damping(lambda)``.
    """
    if name not in _ZOO:
        raise UnknownChannel(f"unknown channel {name!r}; known: {', '.join(ZOO_NAMES)}")
    factory, (lo, hi) = _ZOO[name]
    params = tuple(float(p) for p in params)
    if name == "identity" and not params:
        params = (2.0,)
    if not lo <= len(params) <= hi:
        raise BadParam(f"{name} takes {lo}..{hi} parameters, got {len(params)}")
    return factory(*params)


_ZOO_RE = re.compile(r"^\s*([A-Za-z_]+)\s*(?:\(([^)]*)\))?\s*$")


def parse_zoo_spec(spec: str) -> QuantumChannel:
    """Parse inline syntax such as ``erasure(2,0.25)``."""
    m = _ZOO_RE.match(spec)
    if not m:
        raise ParseError(f"cannot parse channel spec {spec!r}")
    name, args = m.group(1), m.group(2)
    params = []
    if args and args.strip():
        try:
            params = [float(tok) for tok in args.split(",")]
        except ValueError as exc:
            raise ParseError(f"bad parameter list in {spec!r}") from exc
    return zoo(name, params)


def _decode_matrix(rows, label: str) -> np.ndarray:
    try:
        arr = np.array(rows, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"{label}: entries must be [re, im] number pairs") from exc
    if arr.ndim != 3 or arr.shape[2] != 2:
        raise ParseError(f"{label}: expected rows of [re, im] pairs, got shape {arr.shape}")
    return arr[..., 0] + 1j * arr[..., 1]


def _encode_matrix(m: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def channel_from_dict(doc: dict, name: str = "") -> QuantumChannel:
    try:
        dim_in, dim_out, kraus_doc = int(doc["dim_in"]), int(doc["dim_out"]), doc["kraus"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError("channel spec needs integer 'dim_in', 'dim_out' and a 'kraus' list") from exc
    if not isinstance(kraus_doc, list) or not kraus_doc:
        raise ParseError("'kraus' must be a non-empty list")
    mats = [_decode_matrix(k, f"kraus[{i}]") for i, k in enumerate(kraus_doc)]
    for i, m in enumerate(mats):
        if m.shape != (dim_out, dim_in):
            raise ParseError(f"kraus[{i}] has shape {m.shape}, expected {(dim_out, dim_in)}")
    return QuantumChannel(np.array(mats), name=name or str(doc.get("name", "")))


def channel_to_dict(ch: QuantumChannel) -> dict:
    return {
        "dim_in": ch.dim_in,
        "dim_out": ch.dim_out,
        "kraus": [_encode_matrix(k) for k in ch.kraus],
    }


def load_channel(path) -> QuantumChannel:
    """Read a channel-spec JSON file.

    Raises :class:`ParseError` for malformed files and
    :class:`CompletenessViolation` when the Kraus operators are not trace
    preserving.
    """
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"cannot read channel file {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise ParseError("channel spec must be a JSON object")
    return channel_from_dict(doc, name=doc.get("name") or path.stem)


def save_channel(ch: QuantumChannel, path, **extra) -> None:
    doc = channel_to_dict(ch)
    doc.update(extra)
    Path(path).write_text(json.dumps(doc, indent=1) + "\n")


def state_from_dict(doc: dict) -> DensityMatrix:
    try:
        dim = int(doc["dim"])
        mat = _decode_matrix(doc["matrix"], "matrix")
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError("state spec needs integer 'dim' and a 'matrix'") from exc
    if mat.shape != (dim, dim):
        raise ParseError(f"matrix has shape {mat.shape}, expected {(dim, dim)}")
    return validate_state(mat)


def state_to_dict(rho) -> dict:
    m = np.asarray(getattr(rho, "matrix", rho))
    return {"dim": int(m.shape[0]), "matrix": _encode_matrix(m)}


def load_state(path) -> DensityMatrix:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"cannot read state file {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise ParseError("state spec must be a JSON object")
    return state_from_dict(doc)


def save_state(rho, path) -> None:
    Path(path).write_text(json.dumps(state_to_dict(rho), indent=1) + "\n")


def marginal_output(ch: QuantumChannel, rho) -> np.ndarray:
    """Output marginal of the dilated state, equal to ``apply(ch, rho)``."""
    return partial_trace(dilated_state(ch, rho), [ch.dim_out, ch.env_dim], keep=[0])


def marginal_env(ch: QuantumChannel, rho) -> np.ndarray:
    return partial_trace(dilated_state(ch, rho), [ch.dim_out, ch.env_dim], keep=[1])
