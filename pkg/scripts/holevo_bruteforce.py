"""Brute-force Holevo oracle for the qubit zoo.

Draws random 4-member ensembles of Haar-random pure qubit states with
Dirichlet(1, 1, 1, 1) weights and records the largest chi found per
channel. Everything is batched numpy and independent of the optimizer
code; only the Kraus operators come from the package.

Usage: python scripts/holevo_bruteforce.py [SAMPLES] [OUTPUT.json]
"""

import json
import sys
import time
from pathlib import Path

import numpy as np

from qcapacity.verification import qubit_zoo

MEMBERS = 4
BATCH = 50_000
SEED = 20240601


def _entropy(mats):
    w = np.clip(np.linalg.eigvalsh(mats), 0.0, None)
    logs = np.log2(np.where(w > 0, w, 1.0))
    return -(w * logs).sum(axis=-1)


def best_chi(kraus, samples, rng):
    best, best_ens = -np.inf, None
    done = 0
    while done < samples:
        n = min(BATCH, samples - done)
        z = rng.standard_normal((n, MEMBERS, 2)) + 1j * rng.standard_normal((n, MEMBERS, 2))
        z /= np.linalg.norm(z, axis=-1, keepdims=True)
        p = rng.dirichlet(np.ones(MEMBERS), size=n)
        rho = z[..., :, None] * z[..., None, :].conj()
        out = np.einsum("kab,nmbc,kdc->nmad", kraus, rho, kraus.conj())
        avg = np.einsum("nm,nmab->nab", p, out)
        chi = _entropy(avg) - (p * _entropy(out)).sum(axis=1)
        i = int(np.argmax(chi))
        if chi[i] > best:
            best, best_ens = float(chi[i]), (p[i], z[i])
        done += n
    return best, best_ens


def main(argv):
    samples = int(argv[1]) if len(argv) > 1 else 1_000_000
    out = Path(argv[2]) if len(argv) > 2 else Path(__file__).resolve().parents[1] / "tests/fixtures/holevo_bruteforce.json"
    rng = np.random.default_rng(SEED)
    doc = {"samples": samples, "members": MEMBERS, "seed": SEED, "channels": {}}
    for ch in qubit_zoo():
        t0 = time.perf_counter()
        value, (p, z) = best_chi(ch.kraus, samples, rng)
        doc["channels"][ch.name] = {
            "best_chi": value,
            "probs": p.tolist(),
            "kets": [[[c.real, c.imag] for c in ket] for ket in z],
        }
        print(f"{ch.name}: {value:.6f} ({time.perf_counter() - t0:.1f} s)")
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps(doc, indent=1))
    print(f"wrote {out}")


if __name__ == "__main__":
    main(sys.argv)
