"""Write the reconstructed PPT channel used with the 50% erasure channel
in superactivation experiments.

The channel maps two qubits (key A, shield A') to two qubits (key B,
shield B'). Its normalized Choi state is the 4x4 private-key state

    rho ~ [[p sqrt(X1 X1^dag), 0, 0, p X1],
           [0, (1/2 - p) sqrt(X2 X2^dag), 0, 0],
           [0, 0, (1/2 - p) sqrt(X2 X2^dag), 0],
           [p X1^dag, 0, 0, p sqrt(X1^dag X1)]]

written in the key basis |AB> with shield-operator blocks
X1 = sum_ij u_ij |ij><ji| / sqrt2 and X2 = sum_ij u_ij |ii><jj| / sqrt2,
u the Hadamard matrix. The family has a positive partial transpose for
p <= 1/4; p = 1/4 is used. This is a reconstruction of a known family of
zero-capacity channels, not a verified reference channel, and is meant as
an exploratory fixture only.

Usage: python scripts/make_ppt_channel.py [OUTPUT.json]
"""

import sys
from pathlib import Path

import numpy as np

from qcapacity.channels import channel_from_choi, choi_matrix, save_channel

P = 0.25


def _psd_sqrt(m):
    w, v = np.linalg.eigh(m)
    return (v * np.sqrt(np.clip(w, 0, None))) @ v.conj().T


def key_state(p: float = P) -> np.ndarray:
    """Normalized state with tensor factors ordered (A, B, A', B')."""
    u = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
    e = np.eye(2)

    def ket(i, j):
        return np.kron(e[i], e[j])

    x1 = sum(u[i, j] * np.outer(ket(i, j), ket(j, i)) for i in range(2) for j in range(2)) / np.sqrt(2)
    x2 = sum(u[i, j] * np.outer(ket(i, i), ket(j, j)) for i in range(2) for j in range(2)) / np.sqrt(2)
    z = np.zeros((4, 4))
    rho = np.block(
        [
            [p * _psd_sqrt(x1 @ x1.conj().T), z, z, p * x1],
            [z, (0.5 - p) * _psd_sqrt(x2 @ x2.conj().T), z, z],
            [z, z, (0.5 - p) * _psd_sqrt(x2 @ x2.conj().T), z],
            [p * x1.conj().T, z, z, p * _psd_sqrt(x1.conj().T @ x1)],
        ]
    )
    return rho / np.trace(rho)


def ppt_channel(p: float = P):
    rho = key_state(p)
    # (A, B, A', B') -> (A, A', B, B'): input factor first, as the Choi layout expects
    t = rho.reshape([2] * 8).transpose(0, 2, 1, 3, 4, 6, 5, 7).reshape(16, 16)
    return channel_from_choi(4 * t, 4, 4, name="ppt_private_key")


def main(argv):
    out = Path(argv[1]) if len(argv) > 1 else Path(__file__).resolve().parents[1] / "src/qcapacity/data/ppt_channel.json"
    ch = ppt_channel()
    assert np.allclose(choi_matrix(ch), 4 * key_state().reshape([2] * 8).transpose(0, 2, 1, 3, 4, 6, 5, 7).reshape(16, 16))
    save_channel(
        ch,
        out,
        name="ppt_private_key",
        description=(
            "Reconstructed two-qubit PPT channel whose Choi state is a private-key state "
            f"(p = {P}). Exploratory fixture; not a trusted reference."
        ),
    )
    print(f"wrote {out} ({ch.env_dim} Kraus operators)")


if __name__ == "__main__":
    main(sys.argv)
