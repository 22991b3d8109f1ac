"""Average gate fidelity, single-qudit pulse simulation and error scans."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .blockade import PulseOp, expand_rotation
from .decompose import decompose_unitary
from .holonomic import pair_propagator
from .params import AtomLevelScheme, HardwareParams, TwoLevelRotation


def average_gate_fidelity(u_target: np.ndarray, u_sim: np.ndarray, projector=None) -> float:
    """``[Tr(M M^+) + |Tr M|^2] / (d (d + 1))`` with ``M = P U^+ U_sim P``.

    Parameters
    ----------
    u_target : (d, d) array
    u_sim : array
        Either ``(d, d)`` (already restricted) or a larger operator whose
        computational subspace is selected by ``projector``.
    projector : sequence of int or (n, n) array, optional
        Indices of the computational levels, or a diagonal projector.
        Defaults to the first ``d`` levels.
    """
    u_target = np.asarray(u_target, dtype=complex)
    u_sim = np.asarray(u_sim, dtype=complex)
    d = u_target.shape[0]
    if u_sim.shape != (d, d):
        if projector is None:
            idx = np.arange(d)
        else:
            p = np.asarray(projector)
            idx = np.flatnonzero(np.abs(np.diag(p)) > 0.5) if p.ndim == 2 else p.astype(int)
        if len(idx) != d:
            raise ValueError(f"projector selects {len(idx)} levels, target has {d}")
        u_sim = u_sim[np.ix_(idx, idx)]
    m = u_target.conj().T @ u_sim
    return float((np.trace(m @ m.conj().T).real + abs(np.trace(m)) ** 2) / (d * (d + 1)))


def state_fidelity(target: np.ndarray, sim: np.ndarray) -> float:
    """Raw overlap ``|<target|sim>|^2`` (no renormalisation of ``sim``)."""
    return float(abs(np.vdot(target, sim)) ** 2)


@dataclass
class SingleQuditResult:
    operator: np.ndarray          # full (d+3) x (d+3) propagator
    block: np.ndarray             # d x d computational block
    n_pulse_pairs: int
    global_phase: float
    loss: float


def rotations_pulse_ops(rotations, hw: HardwareParams, atom: str = "single") -> list[PulseOp]:
    ops: list[PulseOp] = []
    for rot in rotations:
        ops.extend(expand_rotation(rot, hw, atom))
    return ops


def single_qudit_pulse_sim(hw: HardwareParams, u: np.ndarray | None = None,
                           rotations: list[TwoLevelRotation] | None = None, d: int | None = None,
                           connectivity: str = "all_to_all", rtol: float = 1e-9) -> SingleQuditResult:
    """Simulate a single-qudit gate on one lossy ``d + 3`` level atom."""
    phase = 0.0
    if rotations is None:
        if u is None:
            raise ValueError("need u or rotations")
        dec = decompose_unitary(u, connectivity)
        rotations, phase = dec.rotations, dec.global_phase
    if d is None:
        if u is None:
            raise ValueError("need d when only rotations are given")
        d = u.shape[0]
    s = AtomLevelScheme(d)
    rates = s.decay_rates(hw.gamma_e_ratio, hw.gamma_r_ratio)
    window = hw.omega_T
    idle = np.exp(-0.5 * rates * window)
    full = np.eye(s.n_levels, dtype=complex)
    ops = rotations_pulse_ops(rotations, hw)
    cache: dict = {}
    for op in ops:
        key = (op.i, op.j, op.tau, op.delta)
        step = cache.get(key)
        if step is None:
            active = np.array([op.i, op.j, s.p, s.e])
            prop = pair_propagator(window, op.tau, op.delta, hw.Omega_p_ratio,
                                   decay=[rates[k] for k in active], rtol=rtol)
            step = np.diag(idle).astype(complex)
            step[np.ix_(active, active)] = prop
            cache[key] = step
        full = step @ full
    block = full[:d, :d] * np.exp(1j * phase)
    norms = np.sum(np.abs(full[:, :d]) ** 2, axis=0)
    return SingleQuditResult(operator=full, block=block, n_pulse_pairs=len(ops), global_phase=phase,
                             loss=float(1 - norms.mean()))


def single_qudit_infidelity(hw: HardwareParams, u: np.ndarray, connectivity: str = "all_to_all") -> float:
    res = single_qudit_pulse_sim(hw, u, connectivity=connectivity)
    return 1.0 - average_gate_fidelity(u, res.block)


@dataclass
class ErrorSurface:
    """Infidelity table ``eps[i_gamma, i_omegaT]``."""

    omega_T: np.ndarray
    gamma_ratio: np.ndarray
    infidelity: np.ndarray
    fits: list[dict] = field(default_factory=list)

    def rows(self):
        for ig, g in enumerate(self.gamma_ratio):
            for io, w in enumerate(self.omega_T):
                yield float(w), float(g), float(self.infidelity[ig, io])


def fit_power_law_saturation(omega_T: np.ndarray, eps: np.ndarray) -> dict:
    """Fit ``eps = A (Omega T)^-p + floor`` via log-least squares on a floor grid."""
    x = np.asarray(omega_T, dtype=float)
    y = np.asarray(eps, dtype=float)
    keep = y > 0
    x, y = np.log(x[keep]), y[keep]
    best = None
    if len(y) < 2:
        floors = np.array([])
    else:
        floors = np.concatenate([[0.0], np.geomspace(max(y.min() * 1e-3, 1e-18), y.min() * 0.999, 200)])
    for floor in floors:
        resid = y - floor
        if np.any(resid <= 0):
            continue
        slope, icpt = np.polyfit(x, np.log(resid), 1)
        pred = np.exp(icpt) * np.exp(x * slope) + floor
        err = float(np.sum((np.log(pred) - np.log(y)) ** 2))
        if best is None or err < best["residual"]:
            best = {"amplitude": float(np.exp(icpt)), "power": float(-slope), "floor": float(floor),
                    "residual": err}
    return best or {"amplitude": float("nan"), "power": float("nan"), "floor": float("nan"),
                    "residual": float("nan")}


def gate_error_scan(base: HardwareParams, omega_T_grid, gamma_ratio_grid, u_target: np.ndarray,
                    connectivity: str = "all_to_all") -> ErrorSurface:
    """Infidelity of ``u_target`` over ``Omega T`` and ``gamma_e/Omega = gamma_r/Omega`` grids."""
    wt = np.asarray(list(omega_T_grid), dtype=float)
    gr = np.asarray(list(gamma_ratio_grid), dtype=float)
    eps = np.zeros((len(gr), len(wt)))
    for ig, g in enumerate(gr):
        for io, w in enumerate(wt):
            hw = base.with_ratios(omega_T=float(w), gamma_e_ratio=float(g), gamma_r_ratio=float(g))
            eps[ig, io] = single_qudit_infidelity(hw, u_target, connectivity)
    surface = ErrorSurface(omega_T=wt, gamma_ratio=gr, infidelity=eps)
    surface.fits = [dict(gamma_ratio=float(g), **fit_power_law_saturation(wt, eps[ig]))
                    for ig, g in enumerate(gr)]
    return surface


def is_monotone_non_increasing(values, rel_tol: float = 0.1, atol: float = 1e-12) -> bool:
    """Non-increasing up to ``rel_tol`` relative scan noise and ``atol`` absolute round-off."""
    v = np.asarray(values, dtype=float)
    return bool(np.all(v[1:] <= v[:-1] + rel_tol * np.abs(v[:-1]) + atol))
