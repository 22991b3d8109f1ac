"""Native qudit circuits for Trotterised finite-group gauge dynamics.

Gate set: single-qudit unitaries, diagonal single-qudit gates and controlled
permutations ``C_theta(h)(j0)`` (apply ``theta(h)`` to the target link iff the
control link holds ``j0``).  Circuits are applied to register states, either
exactly or with sub-unitary matrices substituted from a :class:`GateBank`.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .group_core import FiniteGroup, PermutationOperator, right_regular
from .lgt_model import (LatticeGeometry, ModelParams, SpectralPropagator, check_dimension, electric_gate,
                        exact_hamiltonian, magnetic_gate, observables)
from .pulse_hardware.bank import GateBank, cperm_template, matrix_template
from .pulse_hardware.decompose import decompose_unitary
from .pulse_hardware.params import HardwareParams
from .pulse_hardware.schedules import (controlled_pulse_bound, nominal_controlled_pulse_pairs,
                                       q8_rotations, single_qudit_pulse_bound)

SINGLE, DIAGONAL, CPERM = "single", "diagonal", "cperm"
FAULTY_SCOPES = ("theta", "all")


@dataclass(frozen=True, eq=False)
class GateOp:
    """One native gate.

    ``links`` is ``(link,)`` for single-qudit gates and ``(target, control)``
    for controlled permutations.  ``duration`` is the nominal number of pulse
    windows (units of ``T``); ``bound`` the worst-case count.
    """

    kind: str
    links: tuple[int, ...]
    matrix: np.ndarray | None = None
    phases: np.ndarray | None = None
    control_element: int | None = None
    perm: PermutationOperator | None = None
    perm_element: int | None = None
    provenance: str = "ideal"
    duration: float = 0.0
    bound: float = 0.0
    template: str = ""
    block: str = ""
    label: str = ""

    def __post_init__(self):
        if self.kind == SINGLE:
            if self.matrix is None or len(self.links) != 1:
                raise ValueError("single-qudit gate needs one link and a matrix")
            _check_operator(self.matrix, self.provenance)
        elif self.kind == DIAGONAL:
            if self.phases is None or len(self.links) != 1:
                raise ValueError("diagonal gate needs one link and phases")
            if self.provenance == "ideal" and not np.allclose(np.abs(self.phases), 1.0, atol=1e-10):
                raise ValueError("ideal diagonal gate must have unit-modulus phases")
        elif self.kind == CPERM:
            if self.perm is None or self.control_element is None or len(self.links) != 2:
                raise ValueError("controlled permutation needs (target, control), element and permutation")
            if self.links[0] == self.links[1]:
                raise ValueError("control and target must differ")
        else:
            raise ValueError(f"unknown gate kind {self.kind!r}")

    @property
    def entangling(self) -> bool:
        return self.kind == CPERM

    def operator(self) -> np.ndarray:
        """Ideal dense matrix (``d x d``, or ``d^2 x d^2`` in (target, control) order)."""
        if self.kind == SINGLE:
            return np.asarray(self.matrix)
        if self.kind == DIAGONAL:
            return np.diag(self.phases)
        d = self.perm.dim
        out = np.eye(d * d, dtype=complex)
        p = self.perm.matrix()
        c = self.control_element
        idx = np.arange(d) * d + c
        out[np.ix_(idx, idx)] = p
        return out


def _check_operator(m: np.ndarray, provenance: str, tol: float = 1e-10) -> None:
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("gate matrix must be square")
    if provenance == "ideal":
        if np.abs(m.conj().T @ m - np.eye(m.shape[0])).max() > tol:
            raise ValueError("ideal gate matrix is not unitary")
    elif np.linalg.norm(m, 2) > 1 + tol:
        raise ValueError("faulty gate matrix increases the norm")


@dataclass
class Circuit:
    """Ordered list of gates on a register of ``n_links`` qudits of dimension ``d``."""

    d: int
    n_links: int
    ops: list[GateOp] = field(default_factory=list)

    def __post_init__(self):
        for op in self.ops:
            self._check(op)

    def _check(self, op: GateOp) -> None:
        for link in op.links:
            if not 0 <= link < self.n_links:
                raise ValueError(f"gate touches link {link} outside 0..{self.n_links - 1}")

    def append(self, op: GateOp) -> None:
        self._check(op)
        self.ops.append(op)

    def extend(self, ops) -> None:
        for op in ops:
            self.append(op)

    def __iter__(self):
        return iter(self.ops)

    def __len__(self) -> int:
        return len(self.ops)

    @property
    def n_entangling(self) -> int:
        return sum(op.entangling for op in self.ops)

    def inverse_order(self) -> list[GateOp]:
        return list(reversed(self.ops))

    def to_records(self, group: FiniteGroup | None = None) -> list[dict]:
        def lab(x):
            return None if x is None else (group.labels[x] if group is not None else int(x))

        recs = []
        for op in self.ops:
            recs.append({"kind": op.kind, "links": list(op.links), "label": op.label, "block": op.block,
                         "control_element": lab(op.control_element), "perm_element": lab(op.perm_element),
                         "duration": op.duration, "template": op.template})
        return recs

    def to_json(self, group: FiniteGroup | None = None) -> str:
        return json.dumps(self.to_records(group), indent=1)


# ---------------------------------------------------------------------------
# compilation
# ---------------------------------------------------------------------------

def _perm_rotation_count(group: FiniteGroup, h: int) -> int:
    if group.order == 8 and group.labels[h] in ("1", "-1", "I", "-I", "J", "-J", "K", "-K"):
        return len(q8_rotations(h))
    return len(decompose_unitary(right_regular(group, h).matrix()).rotations)


def controlled_permutation(group: FiniteGroup, target: int, control: int, j0: int, h: int,
                           block: str = "") -> GateOp:
    m = _perm_rotation_count(group, h)
    d = group.order
    return GateOp(kind=CPERM, links=(target, control), control_element=j0, perm=right_regular(group, h),
                  perm_element=h, duration=0.0 if m == 0 else nominal_controlled_pulse_pairs(m),
                  bound=controlled_pulse_bound(d), template=cperm_template(j0, h), block=block,
                  label=f"C[{group.labels[j0]}]theta({group.labels[h]})")


def theta_circuit(group: FiniteGroup, control: int, target: int, n_links: int | None = None,
                  dagger: bool = False) -> Circuit:
    """``Theta_{target|control}``: ``|g_t>|g_c> -> |g_t g_c>|g_c>`` as ``d`` controlled permutations.

    ``dagger`` builds ``Theta^+`` from ``C_theta(g^-1)(g)``.
    """
    if control == target:
        raise ValueError("control and target must differ")
    n = n_links if n_links is not None else max(control, target) + 1
    circ = Circuit(group.order, n)
    name = "theta_dag" if dagger else "theta"
    for g in range(group.order):
        h = int(group.inverse[g]) if dagger else g
        circ.append(controlled_permutation(group, target, control, g, h, block=name))
    return circ


def _single_duration(u: np.ndarray) -> int:
    return len(decompose_unitary(u).rotations)


def plaquette_circuit(group: FiniteGroup, params: ModelParams, dt: float, plaquette, n_links: int | None = None
                      ) -> Circuit:
    """Magnetic plaquette evolution as conjugated ``Theta`` blocks around a diagonal gate on ``l1``.

    Operator order (rightmost first):
    ``Theta^+_{1|2} Theta_{1|3} Theta_{1|4} U_B(l1) Theta^+_{1|4} Theta^+_{1|3} Theta_{1|2}``.
    """
    l1, l2, l3, l4 = (int(x) for x in plaquette)
    if len({l1, l2, l3, l4}) != 4:
        raise ValueError("plaquette links must be distinct")
    n = n_links if n_links is not None else max(l1, l2, l3, l4) + 1
    circ = Circuit(group.order, n)
    for ctrl, dag in ((l2, False), (l3, True), (l4, True)):
        circ.extend(theta_circuit(group, ctrl, l1, n, dagger=dag).ops)
    phases = np.diag(magnetic_gate(group, params, dt)).copy()
    circ.append(GateOp(kind=DIAGONAL, links=(l1,), phases=phases, duration=_single_duration(np.diag(phases)),
                       bound=single_qudit_pulse_bound(group.order), block="B",
                       template=matrix_template("B", np.diag(phases)), label="U_B"))
    for ctrl, dag in ((l4, False), (l3, False), (l2, True)):
        circ.extend(theta_circuit(group, ctrl, l1, n, dagger=dag).ops)
    return circ


@dataclass(frozen=True)
class TrotterConfig:
    """Trotter step ``dt``, splitting order (1 or 2), step count and gate source."""

    dt: float
    order: int = 2
    n_steps: int = 1
    gate_source: str = "ideal"

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.order not in (1, 2):
            raise ValueError("order must be 1 or 2")
        if self.n_steps < 1:
            raise ValueError("n_steps must be at least 1")
        if self.gate_source not in ("ideal", "pulse_simulated"):
            raise ValueError("gate_source must be 'ideal' or 'pulse_simulated'")


def electric_layer(group: FiniteGroup, params: ModelParams, dt: float, n_links: int) -> list[GateOp]:
    u = electric_gate(group, params, dt)
    dur = _single_duration(u)
    tmpl = matrix_template("E", u)
    return [GateOp(kind=SINGLE, links=(link,), matrix=u, duration=dur, bound=single_qudit_pulse_bound(group.order),
                   block="E", template=tmpl, label="U_E") for link in range(n_links)]


def trotter_step_circuit(group: FiniteGroup, params: ModelParams, geom: LatticeGeometry, cfg: TrotterConfig
                         ) -> Circuit:
    """One Trotter step: ``E`` then ``B`` (order 1) or ``E/2, B, E/2`` (order 2)."""
    circ = Circuit(group.order, geom.n_links)
    b_ops = []
    for plaq in geom.plaquettes:
        b_ops.extend(plaquette_circuit(group, params, cfg.dt, plaq, geom.n_links).ops)
    if cfg.order == 1:
        circ.extend(electric_layer(group, params, cfg.dt, geom.n_links))
        circ.extend(b_ops)
    else:
        half = electric_layer(group, params, cfg.dt / 2, geom.n_links)
        circ.extend(half)
        circ.extend(b_ops)
        circ.extend(half)
    return circ


# ---------------------------------------------------------------------------
# state-vector application
# ---------------------------------------------------------------------------

def _as_tensor(state: np.ndarray, d: int, n: int) -> tuple[np.ndarray, bool]:
    psi = np.asarray(state, dtype=complex)
    batched = psi.ndim == 2
    dim = d ** n
    if psi.shape[0] != dim:
        raise ValueError(f"state of length {psi.shape[0]} does not match {d}**{n} = {dim}")
    return psi.reshape((d,) * n + ((psi.shape[1],) if batched else (1,))), batched


def _apply_one(t: np.ndarray, m: np.ndarray, link: int) -> np.ndarray:
    t = np.tensordot(m, t, axes=([1], [link]))
    return np.moveaxis(t, 0, link)


def _apply_two(t: np.ndarray, m: np.ndarray, a: int, b: int, d: int) -> np.ndarray:
    t = np.tensordot(m.reshape(d, d, d, d), t, axes=([2, 3], [a, b]))
    return np.moveaxis(t, [0, 1], [a, b])


def _apply_ideal(t: np.ndarray, op: GateOp, d: int) -> np.ndarray:
    if op.kind == SINGLE:
        return _apply_one(t, op.matrix, op.links[0])
    if op.kind == DIAGONAL:
        shape = [1] * t.ndim
        shape[op.links[0]] = d
        return t * np.asarray(op.phases).reshape(shape)
    target, control = op.links
    mapping = np.asarray(op.perm.mapping)
    inv = np.empty_like(mapping)
    inv[mapping] = np.arange(len(mapping))
    out = t.copy()
    sl = [slice(None)] * t.ndim
    sl[control] = op.control_element
    src = t[tuple(sl)]
    tgt_axis = target if target < control else target - 1
    out[tuple(sl)] = np.take(src, inv, axis=tgt_axis)
    return out


def _bank_matrix(op: GateOp, bank: GateBank | None, scope: str) -> np.ndarray | None:
    if bank is None:
        return None
    if op.kind == CPERM:
        if op.template in bank:
            return bank[op.template]
        if op.perm_element is not None and op.perm.mapping == tuple(range(op.perm.dim)):
            return None  # identity permutation, empty schedule
        raise KeyError(f"gate bank has no entry for {op.template}")
    if scope == "all":
        if op.template in bank:
            return bank[op.template]
        raise KeyError(f"gate bank has no entry for {op.template} ({op.label})")
    return None


def apply(circuit: Circuit, state: np.ndarray, gate_bank: GateBank | None = None, faulty_scope: str = "theta",
          norm_trace: list | None = None) -> np.ndarray:
    """Apply ``circuit`` to a state vector (or a ``(D, k)`` batch of columns).

    With ``gate_bank``, entangling gates (and single-qudit gates when
    ``faulty_scope == "all"``) are replaced by the bank's matrices.
    ``norm_trace`` collects the squared norm after every gate if given.
    """
    if faulty_scope not in FAULTY_SCOPES:
        raise ValueError(f"faulty_scope must be one of {FAULTY_SCOPES}")
    d, n = circuit.d, circuit.n_links
    t, batched = _as_tensor(state, d, n)
    for op in circuit.ops:
        m = _bank_matrix(op, gate_bank, faulty_scope)
        if m is None:
            t = _apply_ideal(t, op, d)
        elif op.kind == CPERM:
            t = _apply_two(t, m, op.links[0], op.links[1], d)
        else:
            t = _apply_one(t, m, op.links[0])
        if norm_trace is not None:
            norm_trace.append(float(np.vdot(t, t).real))
    out = t.reshape(d ** n, -1)
    return out if batched else out[:, 0]


# ---------------------------------------------------------------------------
# Trotterised evolution
# ---------------------------------------------------------------------------

@dataclass
class Trajectory:
    """Per-step observables; fidelity is the raw overlap with the exact state."""

    t: np.ndarray
    E_energy: np.ndarray
    B_energy: np.ndarray
    norm: np.ndarray
    fidelity: np.ndarray
    exact_E: np.ndarray | None = None
    exact_B: np.ndarray | None = None

    @property
    def per_step_loss(self) -> np.ndarray:
        return 1.0 - self.norm[1:] / self.norm[:-1]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["step", "t", "E_energy", "B_energy", "norm", "fidelity"])
        for k in range(len(self.t)):
            w.writerow([k, repr(float(self.t[k])), repr(float(self.E_energy[k])), repr(float(self.B_energy[k])),
                        repr(float(self.norm[k])), repr(float(self.fidelity[k]))])
        return buf.getvalue()

    def write_csv(self, path: str | Path) -> Path:
        path = Path(path)
        path.write_text(self.to_csv())
        return path


def exact_propagator(group: FiniteGroup, params: ModelParams, geom: LatticeGeometry) -> SpectralPropagator:
    return SpectralPropagator(exact_hamiltonian(group, params, geom))


def run_quench(group: FiniteGroup, params: ModelParams, geom: LatticeGeometry, cfg: TrotterConfig,
               psi0: np.ndarray, gate_bank: GateBank | None = None, faulty_scope: str = "theta",
               propagator: SpectralPropagator | None = None, with_exact_observables: bool = False
               ) -> Trajectory:
    """Trotterised evolution for ``cfg.n_steps`` steps with observables after each step."""
    check_dimension(group.order, geom.n_links)
    if cfg.gate_source == "pulse_simulated" and gate_bank is None:
        raise ValueError("pulse_simulated gate source requires a gate bank")
    bank = gate_bank if cfg.gate_source == "pulse_simulated" else None
    step = trotter_step_circuit(group, params, geom, cfg)
    prop = propagator if propagator is not None else exact_propagator(group, params, geom)
    psi = np.asarray(psi0, dtype=complex).copy()
    n = cfg.n_steps
    ts = np.arange(n + 1) * cfg.dt
    e_en, b_en, norms, fids = (np.zeros(n + 1) for _ in range(4))
    ex_e, ex_b = np.zeros(n + 1), np.zeros(n + 1)
    exact_states = prop.evolve_many(psi0, ts)
    for k in range(n + 1):
        if k > 0:
            psi = apply(step, psi, bank, faulty_scope)
        obs = observables(psi, group, params, geom)
        e_en[k], b_en[k], norms[k] = obs["E_energy"], obs["B_energy"], obs["norm"]
        fids[k] = abs(np.vdot(exact_states[k], psi)) ** 2
        if with_exact_observables:
            ex = observables(exact_states[k], group, params, geom)
            ex_e[k], ex_b[k] = ex["E_energy"], ex["B_energy"]
    traj = Trajectory(t=ts, E_energy=e_en, B_energy=b_en, norm=norms, fidelity=fids)
    if with_exact_observables:
        traj.exact_E, traj.exact_B = ex_e, ex_b
    return traj


def trotter_infidelity(group: FiniteGroup, params: ModelParams, geom: LatticeGeometry, dt: float, t_final: float,
                       order: int, psi0: np.ndarray, propagator: SpectralPropagator,
                       gate_bank: GateBank | None = None, faulty_scope: str = "theta") -> float:
    """``1 - |<psi_sim|psi_exact>|^2`` at ``t_final`` (must be a multiple of ``dt``)."""
    n = int(round(t_final / dt))
    if not math.isclose(n * dt, t_final, rel_tol=1e-9):
        raise ValueError(f"t_final = {t_final} is not a multiple of dt = {dt}")
    cfg = TrotterConfig(dt=dt, order=order, n_steps=n,
                        gate_source="pulse_simulated" if gate_bank is not None else "ideal")
    step = trotter_step_circuit(group, params, geom, cfg)
    psi = np.asarray(psi0, dtype=complex)
    for _ in range(n):
        psi = apply(step, psi, gate_bank, faulty_scope)
    exact = propagator.evolve(psi0, n * dt)
    return float(1.0 - abs(np.vdot(exact, psi)) ** 2)


# ---------------------------------------------------------------------------
# durations
# ---------------------------------------------------------------------------

@dataclass
class DurationReport:
    """Makespan of a circuit under as-soon-as-possible scheduling."""

    count_seconds: float
    bound_seconds: float
    count_T: float
    bound_T: float
    n_entangling_blocks: int
    dead_time_seconds: float

    def to_dict(self) -> dict:
        return self.__dict__.copy()


def entangling_blocks(circuit: Circuit) -> list[list[int]]:
    """Index runs of consecutive entangling gates acting on the same link pair."""
    blocks: list[list[int]] = []
    prev = None
    for k, op in enumerate(circuit.ops):
        if op.entangling:
            pair = frozenset(op.links)
            if prev == pair and blocks:
                blocks[-1].append(k)
            else:
                blocks.append([k])
            prev = pair
        else:
            prev = None
    return blocks


def _makespan(circuit: Circuit, window: float, dead: float, mode: str) -> float:
    blocks = entangling_blocks(circuit)
    starts = {blk[0] for blk in blocks}
    ends = {blk[-1] for blk in blocks}
    free = np.zeros(circuit.n_links)
    for k, op in enumerate(circuit.ops):
        links = list(op.links)
        t0 = free[links].max()
        pulses = op.duration if mode == "count" or op.duration == 0 else op.bound
        dur = pulses * window + dead * ((k in starts) + (k in ends))
        free[links] = t0 + dur
    return float(free.max()) if circuit.n_links else 0.0


def duration_estimate(circuit: Circuit, hw: HardwareParams) -> DurationReport:
    """Circuit duration from pulse counts plus movement dead time.

    Every entangling block gets one dead-time interval before and after it.
    Gates on disjoint links run in parallel.  ``count`` uses the nominal pulse
    count of each gate, ``bound`` the generic worst case.
    """
    n_blocks = len(entangling_blocks(circuit))
    return DurationReport(count_seconds=_makespan(circuit, hw.T, hw.move_dead_time, "count"),
                          bound_seconds=_makespan(circuit, hw.T, hw.move_dead_time, "bound"),
                          count_T=_makespan(circuit, 1.0, 0.0, "count"),
                          bound_T=_makespan(circuit, 1.0, 0.0, "bound"),
                          n_entangling_blocks=n_blocks, dead_time_seconds=2 * n_blocks * hw.move_dead_time)


def theta_pulse_pairs(circuit: Circuit) -> int:
    """Nominal pulse pairs of all entangling gates in ``circuit``."""
    return int(sum(op.duration for op in circuit.ops if op.entangling))
