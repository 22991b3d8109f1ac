"""Blockade-mediated controlled unitaries on two lossy ``d + 3`` level atoms.

Protocol for ``C_U(j0)``: ``U`` on the target, ``S_(j0,r)`` on the control,
``U^+`` on the target with every rotation routed through the Rydberg level,
then ``S_(j0,r)^+`` on the control.  When the control sits in ``|r>`` the
interaction ``V |rr><rr|`` detunes the target's Rydberg transitions and the
inverse is not applied.

Pulses never drive both atoms at once, so during a window on one atom the
two-atom propagator is block diagonal in the other atom's level.  Each block
is the driven atom's four-level propagator (with a ``V`` shift on its ``r``
level when the other atom is in ``r``) times idle decay of the other atom.
:func:`direct_two_atom_operator` integrates the full two-atom Hamiltonian
and serves as a cross-check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .calibration import calibrate_alpha
from .decompose import decompose_unitary
from .holonomic import pair_propagator, pulse_hamiltonian
from .integrate import converged_propagator
from .params import AtomLevelScheme, GaussianPulsePair, HardwareParams, TwoLevelRotation

CONTROL, TARGET = "control", "target"


@dataclass(frozen=True)
class PulseOp:
    """One calibrated pulse window: ``u(alpha, delta)`` on ``(i, j)`` of one atom."""

    atom: str
    i: int
    j: int
    tau: float
    delta: float
    tag: str = ""


def expand_rotation(rot: TwoLevelRotation, hw: HardwareParams, atom: str, tag: str = "") -> list[PulseOp]:
    cal = calibrate_alpha(hw, rot.alpha)
    return [PulseOp(atom, rot.i, rot.j, cal.tau, rot.delta, tag)] * cal.k


def rydberg_pi(level: int, r: int, dagger: bool = False) -> TwoLevelRotation:
    """``S_(level, r) = R_y(pi)`` on ``(level, r)`` (``dagger`` gives ``R_y(-pi)``)."""
    return TwoLevelRotation(level, r, -math.pi / 2 if dagger else math.pi / 2, math.pi)


def routed_rotation(rot: TwoLevelRotation, r: int) -> list[TwoLevelRotation]:
    """Realise ``u^(i,j)(alpha, delta)`` as ``S_(i,r)``, ``u^(j,r)(alpha, pi - delta)``, ``S_(i,r)^+``."""
    return [rydberg_pi(rot.i, r), TwoLevelRotation(rot.j, r, rot.alpha, math.pi - rot.delta),
            rydberg_pi(rot.i, r, dagger=True)]


def controlled_protocol(rotations: list[TwoLevelRotation], j0: int, scheme: AtomLevelScheme
                        ) -> list[tuple[str, TwoLevelRotation, str]]:
    """Time-ordered ``(atom, rotation, tag)`` list for ``C_U(j0)`` with ``U`` given by ``rotations``."""
    if not rotations:
        return []
    r = scheme.r
    prog = [(TARGET, rot, "U") for rot in rotations]
    prog.append((CONTROL, rydberg_pi(j0, r), "S"))
    for rot in reversed(rotations):
        for sub in routed_rotation(rot.inverse(), r):
            prog.append((TARGET, sub, "U_dag_r"))
    prog.append((CONTROL, rydberg_pi(j0, r, dagger=True), "S_dag"))
    return prog


class TwoAtomEngine:
    """State ``psi[c, t, k]`` over control level ``c``, target level ``t``, input column ``k``."""

    def __init__(self, hw: HardwareParams, d: int, rtol: float = 1e-9):
        self.hw = hw
        self.scheme = AtomLevelScheme(d)
        self.rtol = rtol
        self.window = hw.omega_T
        self.rates = self.scheme.decay_rates(hw.gamma_e_ratio, hw.gamma_r_ratio)
        self._ops: dict = {}

    @property
    def n_levels(self) -> int:
        return self.scheme.n_levels

    def _atom_operator(self, op: PulseOp, other_in_r: bool) -> np.ndarray:
        key = (op.i, op.j, op.tau, op.delta, other_in_r)
        cached = self._ops.get(key)
        if cached is not None:
            return cached
        s = self.scheme
        hw = self.hw
        v = hw.V_ratio if other_in_r else 0.0
        active = [op.i, op.j, s.p, s.e]
        shifts = [v if lvl == s.r else 0.0 for lvl in active]
        decay = [self.rates[lvl] for lvl in active]
        prop = pair_propagator(self.window, op.tau, op.delta, hw.Omega_p_ratio, shifts=shifts,
                               decay=decay, rtol=self.rtol)
        full = np.diag(np.exp(-0.5 * self.rates * self.window)).astype(complex)
        if other_in_r and s.r not in active:
            full[s.r, s.r] *= np.exp(-1j * v * self.window)
        idx = np.array(active)
        full[np.ix_(idx, idx)] = prop
        self._ops[key] = full
        return full

    def apply(self, psi: np.ndarray, op: PulseOp) -> np.ndarray:
        r = self.scheme.r
        idle = np.exp(-0.5 * self.rates * self.window)
        op_n = self._atom_operator(op, False)
        op_r = self._atom_operator(op, True)
        out = np.empty_like(psi)
        if op.atom == TARGET:
            out[:] = np.einsum("ab,cbk->cak", op_n, psi)
            out[r] = op_r @ psi[r]
            out *= idle[:, None, None]
        elif op.atom == CONTROL:
            out[:] = np.einsum("ab,btk->atk", op_n, psi)
            out[:, r] = op_r @ psi[:, r]
            out *= idle[None, :, None]
        else:
            raise ValueError(f"unknown atom {op.atom!r}")
        return out

    def initial_columns(self) -> np.ndarray:
        """Identity on the computational subspace; column ``k = t * d + c``."""
        d, n = self.scheme.d, self.n_levels
        psi = np.zeros((n, n, d * d), dtype=complex)
        for t in range(d):
            for c in range(d):
                psi[c, t, t * d + c] = 1.0
        return psi

    def computational_block(self, psi: np.ndarray) -> np.ndarray:
        d = self.scheme.d
        # rows ordered (target, control) like the columns
        return psi[:d, :d, :].transpose(1, 0, 2).reshape(d * d, -1)


@dataclass
class ControlledGateResult:
    """Effective ``d^2 x d^2`` operator in (target, control) order plus diagnostics."""

    operator: np.ndarray
    ideal: np.ndarray
    loss: float
    leakage: float
    n_pulse_pairs: int
    duration: float
    global_phase: float = 0.0


def controlled_ideal(u: np.ndarray, j0: int) -> np.ndarray:
    """Exact ``C_U(j0)`` in (target, control) order."""
    d = u.shape[0]
    out = np.zeros((d * d, d * d), dtype=complex)
    for c in range(d):
        block = u if c == j0 else np.eye(d)
        for t_out in range(d):
            for t_in in range(d):
                out[t_out * d + c, t_in * d + c] = block[t_out, t_in]
    return out


def controlled_unitary_pulse_sim(hw: HardwareParams, u: np.ndarray | None, j0: int,
                                 rotations: list[TwoLevelRotation] | None = None,
                                 connectivity: str = "all_to_all", rtol: float = 1e-9
                                 ) -> ControlledGateResult:
    """Pulse-level ``C_U(j0)`` on two ``d + 3`` level atoms.

    ``rotations`` (time ordered) override the decomposition of ``u``; when
    both are given ``u`` is only used for the ideal reference.
    """
    phase = 0.0
    if rotations is None:
        if u is None:
            raise ValueError("need u or rotations")
        dec = decompose_unitary(u, connectivity)
        rotations, phase = dec.rotations, dec.global_phase
    if u is None:
        raise ValueError("u is required for the ideal reference")
    d = u.shape[0]
    engine = TwoAtomEngine(hw, d, rtol=rtol)
    psi = engine.initial_columns()
    program = controlled_protocol(list(rotations), j0, engine.scheme)
    n_pairs = 0
    for atom, rot, tag in program:
        for op in expand_rotation(rot, hw, atom, tag):
            psi = engine.apply(psi, op)
            n_pairs += 1
    m = engine.computational_block(psi)
    norms = np.sum(np.abs(psi) ** 2, axis=(0, 1))
    comp = np.sum(np.abs(m) ** 2, axis=0)
    # compare against C_{U'} with U' = e^{-i phase} U, the operator the rotations implement
    ideal = controlled_ideal(u * np.exp(-1j * phase), j0)
    return ControlledGateResult(operator=m, ideal=ideal, loss=float(1 - norms.mean()),
                                leakage=float((norms - comp).mean()), n_pulse_pairs=n_pairs,
                                duration=n_pairs * engine.window, global_phase=phase)


# ---------------------------------------------------------------------------
# direct reference integration (small atoms only)
# ---------------------------------------------------------------------------

def direct_two_atom_operator(hw: HardwareParams, d: int, ops: list[PulseOp], rtol: float = 1e-9
                             ) -> np.ndarray:
    """Full ``(d+3)^2`` two-atom propagator of a pulse list by brute-force integration."""
    s = AtomLevelScheme(d)
    n = s.n_levels
    rates = s.decay_rates(hw.gamma_e_ratio, hw.gamma_r_ratio)
    rates2 = (rates[:, None] + rates[None, :]).reshape(-1)
    vmat = np.zeros((n * n, n * n))
    vmat[s.r * n + s.r, s.r * n + s.r] = hw.V_ratio
    eye = np.eye(n)
    total = np.eye(n * n, dtype=complex)
    window = hw.omega_T
    for op in ops:
        pair = GaussianPulsePair.centered(op.i, op.j, op.tau, op.delta, window)
        h4 = pulse_hamiltonian(pair, hw.Omega_p_ratio)
        idx = np.array([op.i, op.j, s.p, s.e])

        def ham(times, h4=h4, idx=idx, atom=op.atom):
            small = h4(times)
            one = np.zeros((len(times), n, n), dtype=complex)
            one[:, idx[:, None], idx[None, :]] = small
            if atom == CONTROL:
                big = np.einsum("mab,cd->macbd", one, eye)
            else:
                big = np.einsum("ab,mcd->macbd", eye, one)
            return big.reshape(len(times), n * n, n * n) + vmat

        step = converged_propagator(ham, rates2, n * n, (0.0, window), rtol=rtol,
                                    n_init=int(2 ** math.ceil(math.log2(max(64, window * (2 + hw.V_ratio))))))
        total = step.psi @ total
    return total


def direct_computational_block(full: np.ndarray, d: int) -> np.ndarray:
    """Computational block of a direct two-atom propagator in (target, control) order."""
    n = d + 3
    comp = [c * n + t for t in range(d) for c in range(d)]
    return full[np.ix_(comp, comp)]
