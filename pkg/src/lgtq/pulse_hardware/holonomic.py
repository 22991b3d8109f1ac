"""Holonomic two-level gates from Gaussian pulse pairs on a four-level system.

The active subspace is ordered ``(g0, g1, p, e)``.  All times and rates are in
units of ``Omega`` (so ``Omega = 1``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .integrate import converged_propagator
from .params import GaussianPulsePair, HardwareParams

G0, G1, P, E = 0, 1, 2, 3


def holonomic_hamiltonian(omegas, levels: tuple[int, int, int, int] | None = None,
                          n_levels: int | None = None) -> np.ndarray:
    """``(1/2)|e>(O0 <g0| + O1 <g1| + Op <p|) + h.c.``.

    Returns the 4x4 matrix in the ``(g0, g1, p, e)`` basis, or, when
    ``levels`` and ``n_levels`` are given, its embedding on those atomic levels.
    """
    o0, o1, op = (complex(x) for x in omegas)
    h = np.zeros((4, 4), dtype=complex)
    h[E, G0], h[E, G1], h[E, P] = o0 / 2, o1 / 2, op / 2
    h = h + h.conj().T
    if levels is None:
        return h
    if n_levels is None:
        raise ValueError("n_levels required with levels")
    out = np.zeros((n_levels, n_levels), dtype=complex)
    idx = np.asarray(levels)
    out[np.ix_(idx, idx)] = h
    return out


def dark_space_dimension(h: np.ndarray, tol: float = 1e-10) -> int:
    return int(np.sum(np.abs(np.linalg.eigvalsh(h)) < tol))


def pulse_hamiltonian(pair: GaussianPulsePair, omega_p: float, shifts=(0.0, 0.0, 0.0, 0.0)):
    """Vectorised ``H(t)`` for one pair; ``shifts`` adds static energies per level."""
    shifts = np.asarray(shifts, dtype=float)

    def ham(times):
        times = np.asarray(times, dtype=float)
        o0, o1 = pair.envelopes(times)
        h = np.zeros((len(times), 4, 4), dtype=complex)
        h[:, E, G0] = o0 / 2
        h[:, E, G1] = o1 / 2
        h[:, E, P] = omega_p / 2
        h[:, G0, E] = np.conj(o0) / 2
        h[:, G1, E] = np.conj(o1) / 2
        h[:, P, E] = omega_p / 2
        h[:, np.arange(4), np.arange(4)] += shifts
        return h

    return ham


def _steps_hint(window: float, shifts, omega_p: float) -> int:
    scale = 1.0 + float(np.max(np.abs(shifts))) + omega_p
    return int(2 ** math.ceil(math.log2(max(64.0, window * scale / 2.0))))


@lru_cache(maxsize=4096)
def _cached_propagator(window: float, tau: float, delta: float, omega_p: float,
                       shifts: tuple[float, ...], decay: tuple[float, ...], rtol: float) -> np.ndarray:
    pair = GaussianPulsePair.centered(0, 1, tau, delta, window)
    ham = pulse_hamiltonian(pair, omega_p, shifts)
    res = converged_propagator(ham, np.asarray(decay), 4, (0.0, window), rtol=rtol,
                               n_init=_steps_hint(window, shifts, omega_p))
    out = res.psi
    out.setflags(write=False)
    return out


def pair_propagator(window: float, tau: float, delta: float, omega_p: float,
                    shifts=(0.0, 0.0, 0.0, 0.0), decay=(0.0, 0.0, 0.0, 0.0),
                    rtol: float = 1e-9) -> np.ndarray:
    """Converged 4x4 propagator of one centred pulse pair (cached)."""
    key = lambda xs: tuple(float(f"{x:.14g}") for x in xs)  # noqa: E731
    return _cached_propagator(float(f"{window:.14g}"), float(f"{tau:.14g}"),
                              float(f"{math.remainder(delta, 2 * math.pi):.14g}"),
                              float(f"{omega_p:.14g}"), key(shifts), key(decay), rtol)


def alpha_from_block(u: np.ndarray, delta: float) -> float:
    """Rotation angle of a 2x2 block assumed to have the ``u(alpha, delta)`` form."""
    return math.atan2((u[0, 1] * np.exp(1j * delta)).real, u[0, 0].real)


@dataclass
class TwoLevelPulseResult:
    """Effective operator of one pulse pair on ``{g0, g1}``.

    ``leakage`` is the mean population left in ``{p, e}`` and ``loss`` the mean
    norm deficit, both averaged over the two computational inputs.
    """

    u: np.ndarray
    propagator: np.ndarray
    alpha: float
    leakage: float
    loss: float


def simulate_two_level_pulse(hw: HardwareParams, pair: GaussianPulsePair, rtol: float = 1e-9
                             ) -> TwoLevelPulseResult:
    """Integrate the lossy four-level problem for ``pair`` (dimensionless times)."""
    if hw.Omega_p_ratio <= 0:
        raise ValueError("Omega_p must be positive to keep the gap open")
    if not math.isclose(pair.window, hw.omega_T, rel_tol=1e-12):
        raise ValueError("pulse window does not match hw.omega_T")
    centred = math.isclose(pair.tau0 + pair.tau1, pair.window, rel_tol=1e-12, abs_tol=1e-12)
    if centred and pair.phi0 == 0.0 and pair.amplitude == 1.0:
        prop = pair_propagator(pair.window, pair.tau, pair.delta, hw.Omega_p_ratio,
                               decay=(0.0, 0.0, 0.0, hw.gamma_e_ratio), rtol=rtol)
    else:
        ham = pulse_hamiltonian(pair, hw.Omega_p_ratio)
        prop = converged_propagator(ham, np.array([0.0, 0.0, 0.0, hw.gamma_e_ratio]), 4,
                                    (0.0, pair.window), rtol=rtol,
                                    n_init=_steps_hint(pair.window, (0.0,), hw.Omega_p_ratio)).psi
    cols = prop[:, :2]
    leakage = float(np.mean(np.sum(np.abs(cols[2:]) ** 2, axis=0)))
    loss = float(1.0 - np.mean(np.sum(np.abs(cols) ** 2, axis=0)))
    u = prop[:2, :2].copy()
    return TwoLevelPulseResult(u=u, propagator=np.array(prop), alpha=alpha_from_block(u, pair.delta),
                               leakage=leakage, loss=loss)
