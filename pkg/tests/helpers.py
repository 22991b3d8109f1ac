"""Small test utilities."""

from __future__ import annotations

import numpy as np


def random_state(rng, dim: int) -> np.ndarray:
    psi = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return psi / np.linalg.norm(psi)


def random_unitary(rng, dim: int) -> np.ndarray:
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


PAULI = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]]),
    "z": np.diag([1.0 + 0j, -1.0]),
}


def su2_q8():
    """Independent oracle: quaternion units as ``-i sigma`` matrices, canonical order."""
    one = np.eye(2, dtype=complex)
    units = {"1": one, "I": -1j * PAULI["x"], "J": -1j * PAULI["y"], "K": -1j * PAULI["z"]}
    mats = []
    for lab in ("1", "-1", "I", "-I", "J", "-J", "K", "-K"):
        mats.append(-units[lab[1:]] if lab.startswith("-") else units[lab])
    return mats
