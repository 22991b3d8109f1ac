"""Fixed-step fourth-order Magnus integrator for lossy Schrodinger equations.

Solves ``i dpsi/dt = (H(t) - (i/2) sum_k gamma_k |k><k|) psi``.  The step count
is doubled until two successive solutions agree to the requested relative
tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.linalg import expm

_GL = math.sqrt(3.0) / 6.0
_CHUNK = 4096


class IntegrationError(RuntimeError):
    """Step doubling did not converge before the step limit."""


@dataclass
class IntegrationResult:
    psi: np.ndarray
    n_steps: int
    error_estimate: float


def _effective(hamiltonian: Callable, decay: np.ndarray | None, times: np.ndarray) -> np.ndarray:
    h = np.asarray(hamiltonian(times), dtype=complex)
    if h.ndim == 2:
        h = np.broadcast_to(h, (len(times),) + h.shape).copy()
    if decay is not None:
        idx = np.arange(h.shape[-1])
        h[:, idx, idx] -= 0.5j * decay
    return h


def magnus_propagator(hamiltonian: Callable, decay, t0: float, t1: float, n_steps: int) -> np.ndarray:
    """Propagator from ``t0`` to ``t1`` with ``n_steps`` fourth-order Magnus steps.

    ``hamiltonian`` maps an array of times ``(m,)`` to ``(m, n, n)`` matrices
    (a single ``(n, n)`` matrix is broadcast for constant Hamiltonians).
    """
    decay = None if decay is None else np.asarray(decay, dtype=float)
    h = (t1 - t0) / n_steps
    total = None
    for start in range(0, n_steps, _CHUNK):
        stop = min(start + _CHUNK, n_steps)
        mids = t0 + h * (np.arange(start, stop) + 0.5)
        a1 = -1j * _effective(hamiltonian, decay, mids - _GL * h)
        a2 = -1j * _effective(hamiltonian, decay, mids + _GL * h)
        comm = a2 @ a1 - a1 @ a2
        omega = 0.5 * h * (a1 + a2) + (math.sqrt(3.0) / 12.0) * h * h * comm
        steps = expm(omega)
        chunk = _ordered_product(steps)
        total = chunk if total is None else chunk @ total
    return total


def _ordered_product(mats: np.ndarray) -> np.ndarray:
    """``M_{n-1} ... M_1 M_0`` by pairwise tree reduction."""
    while len(mats) > 1:
        if len(mats) % 2:
            tail = mats[-1:]
            mats = np.concatenate([mats[1:-1:2] @ mats[0:-1:2], tail])
        else:
            mats = mats[1::2] @ mats[0::2]
    return mats[0]


def integrate_lossy_tdse(hamiltonian: Callable, decay, psi0: np.ndarray, t_span: tuple[float, float],
                         rtol: float = 1e-9, n_init: int = 64, max_steps: int = 2 ** 21
                         ) -> IntegrationResult:
    """Integrate with step doubling until the relative change is below ``rtol``.

    ``psi0`` may be a vector or a matrix of column vectors (pass the identity
    to obtain the full propagator).

    Raises
    ------
    IntegrationError
        If the step count would exceed ``max_steps`` before convergence.
    """
    psi0 = np.asarray(psi0, dtype=complex)
    t0, t1 = map(float, t_span)
    if t1 == t0:
        return IntegrationResult(psi0.copy(), 0, 0.0)
    n = max(1, int(n_init))
    prev = magnus_propagator(hamiltonian, decay, t0, t1, n) @ psi0
    while True:
        n *= 2
        if n > max_steps:
            raise IntegrationError(f"no convergence to rtol={rtol:g} within {max_steps} steps")
        cur = magnus_propagator(hamiltonian, decay, t0, t1, n) @ psi0
        scale = max(np.linalg.norm(cur), 1e-300)
        err = float(np.linalg.norm(cur - prev) / scale)
        if err <= rtol:
            return IntegrationResult(cur, n, err)
        prev = cur


def converged_propagator(hamiltonian: Callable, decay, dim: int, t_span: tuple[float, float],
                         rtol: float = 1e-9, n_init: int = 64, max_steps: int = 2 ** 21
                         ) -> IntegrationResult:
    return integrate_lossy_tdse(hamiltonian, decay, np.eye(dim, dtype=complex), t_span,
                                rtol=rtol, n_init=n_init, max_steps=max_steps)
