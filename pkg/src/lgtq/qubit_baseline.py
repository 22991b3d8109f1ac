"""Qubit-register comparison: three-qubit encoding of Q8, group-multiplication
circuits, Toffoli lowering, entangling-gate counts and the noisy Theta run.

Qubit 0 is the most significant bit of the computational basis index.  Gate
lists are in time order.  Controlled gates fire when all controls are ``1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .group_core import FiniteGroup, make_q8, right_regular
from .lgt_model import ModelParams, magnetic_gate

# element index (canonical Q8 order) -> bits (s1, s2, s3)
Q8_QUBIT_CODES: tuple[str, ...] = ("000", "010", "001", "011", "101", "111", "100", "110")

LEVEL_NATIVE = "native"
LEVEL_CU = "two_qubit_controlled_U"
LEVEL_CIY = "cnot_plus_controlled_iY"
LEVELS = (LEVEL_NATIVE, LEVEL_CU, LEVEL_CIY)

X = np.array([[0, 1], [1, 0]], dtype=complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
IY = np.array([[0, 1], [-1, 0]], dtype=complex)
I2 = np.eye(2, dtype=complex)


def phase_gate(phi: float) -> np.ndarray:
    return np.diag([1.0, np.exp(1j * phi)])


def rz(a: float) -> np.ndarray:
    return np.diag([np.exp(-0.5j * a), np.exp(0.5j * a)])


def rx(b: float) -> np.ndarray:
    c, s = math.cos(b / 2), math.sin(b / 2)
    return np.array([[c, -1j * s], [-1j * s, c]])


# ---------------------------------------------------------------------------
# encoding
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QubitEncoding:
    """Bijection between group element indices and ``n_bits`` bit strings."""

    codes: tuple[str, ...] = Q8_QUBIT_CODES

    def __post_init__(self):
        n = len(self.codes[0])
        if any(len(c) != n or set(c) - {"0", "1"} for c in self.codes):
            raise ValueError("codes must be equal-length bit strings")
        if len(set(self.codes)) != len(self.codes):
            raise ValueError("codes must be distinct")

    @property
    def n_bits(self) -> int:
        return len(self.codes[0])

    def encode(self, element: int) -> str:
        return self.codes[int(element)]

    def decode(self, bits: str) -> int:
        try:
            return self.codes.index(bits)
        except ValueError:
            raise ValueError(f"bit string {bits!r} encodes no element") from None

    def index(self, element: int) -> int:
        """Computational basis index of the encoded element."""
        return int(self.encode(element), 2)

    def embedding(self) -> np.ndarray:
        """``(2**n_bits, d)`` isometry mapping ``|g>`` to its encoded basis state."""
        e = np.zeros((2 ** self.n_bits, len(self.codes)))
        for g in range(len(self.codes)):
            e[self.index(g), g] = 1.0
        return e

    def register_permutation(self, n_links: int) -> np.ndarray:
        """Qubit basis index of every qudit register index (link 0 slowest)."""
        d, nb = len(self.codes), self.n_bits
        codes = np.array([self.index(g) for g in range(d)], dtype=np.int64)
        digits = np.unravel_index(np.arange(d ** n_links), (d,) * n_links)
        idx = np.zeros(d ** n_links, dtype=np.int64)
        for dig in digits:
            idx = (idx << nb) | codes[dig]
        return idx


Q8_ENCODING = QubitEncoding()


# ---------------------------------------------------------------------------
# circuits
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QubitGate:
    """``matrix`` on ``target`` when every qubit in ``controls`` is ``1``.

    ``matrix`` may be ``(4, 4)`` with exactly one control: a full two-qubit
    matrix in (target, control) order, target the slow index.
    """

    name: str
    target: int
    controls: tuple[int, ...] = ()
    matrix: np.ndarray = field(default_factory=lambda: X.copy(), compare=False)

    @property
    def qubits(self) -> tuple[int, ...]:
        return (*self.controls, self.target)

    @property
    def n_qubits(self) -> int:
        return len(self.controls) + 1

    @property
    def entangling(self) -> bool:
        return self.n_qubits >= 2

    def inverse(self) -> "QubitGate":
        name = self.name[:-4] if self.name.endswith("_dag") else self.name + "_dag"
        if self.name in ("x", "cnot", "h") or self.name.startswith("mcx"):
            name = self.name
        return QubitGate(name, self.target, self.controls, self.matrix.conj().T)


def x_gate(q: int) -> QubitGate:
    return QubitGate("x", q)


def mcx(controls, target: int) -> QubitGate:
    controls = tuple(int(c) for c in controls)
    name = "cnot" if len(controls) == 1 else f"mcx{len(controls)}"
    return QubitGate(name, int(target), controls, X.copy())


def c_iy(control: int, target: int) -> QubitGate:
    return QubitGate("c_iy", int(target), (int(control),), IY.copy())


@dataclass
class QubitCircuit:
    """Time-ordered gate list over ``n_qubits`` qubits."""

    n_qubits: int
    gates: list[QubitGate] = field(default_factory=list)

    def __post_init__(self):
        for g in self.gates:
            self._check(g)

    def _check(self, g: QubitGate) -> None:
        qs = g.qubits
        if any(q < 0 or q >= self.n_qubits for q in qs):
            raise ValueError(f"gate {g.name} on {qs} outside {self.n_qubits} qubits")
        if len(set(qs)) != len(qs):
            raise ValueError(f"gate {g.name} repeats a qubit")

    def append(self, g: QubitGate) -> None:
        self._check(g)
        self.gates.append(g)

    def extend(self, gates) -> None:
        for g in gates:
            self.append(g)

    def __len__(self) -> int:
        return len(self.gates)

    def __iter__(self):
        return iter(self.gates)

    def n_entangling(self) -> int:
        """Gates acting on two or more qubits (at the circuit's current level)."""
        return sum(g.entangling for g in self.gates)

    def count_by_size(self) -> dict[int, int]:
        out: dict[int, int] = {}
        for g in self.gates:
            if g.entangling:
                out[g.n_qubits] = out.get(g.n_qubits, 0) + 1
        return out

    def inverse(self) -> "QubitCircuit":
        return QubitCircuit(self.n_qubits, [g.inverse() for g in reversed(self.gates)])

    def shifted(self, offset: int, n_qubits: int) -> "QubitCircuit":
        """Same gates relabelled onto qubits ``q + offset`` of a wider register."""
        return QubitCircuit(n_qubits, [QubitGate(g.name, g.target + offset, tuple(c + offset for c in g.controls),
                                                 g.matrix) for g in self.gates])

    def remap(self, mapping, n_qubits: int) -> "QubitCircuit":
        m = list(mapping)
        return QubitCircuit(n_qubits, [QubitGate(g.name, m[g.target], tuple(m[c] for c in g.controls), g.matrix)
                                       for g in self.gates])

    def unitary(self) -> np.ndarray:
        dim = 2 ** self.n_qubits
        return apply_circuit(self, np.eye(dim, dtype=complex))


def _apply_gate(t: np.ndarray, g: QubitGate, n: int, m: np.ndarray | None = None) -> np.ndarray:
    """Apply to a ``(2,)*n + (batch,)`` tensor; ``m`` overrides the gate matrix."""
    m = g.matrix if m is None else m
    if m.shape == (4, 4):
        (c,) = g.controls
        tq = g.target
        moved = np.moveaxis(t, (tq, c), (0, 1))
        shape = moved.shape
        out = (m @ moved.reshape(4, -1)).reshape(shape)
        return np.moveaxis(out, (0, 1), (tq, c))
    sel = [slice(None)] * (n + 1)
    for c in g.controls:
        sel[c] = 1
    sel = tuple(sel)
    sub = t[sel]
    # target axis index inside the sliced view
    ax = g.target - sum(1 for c in g.controls if c < g.target)
    moved = np.moveaxis(sub, ax, 0)
    new = np.tensordot(m, moved, axes=(1, 0))
    out = t.copy()
    out[sel] = np.moveaxis(new, 0, ax)
    return out


def apply_circuit(circuit: QubitCircuit, state: np.ndarray, faulty: dict[str, np.ndarray] | None = None
                  ) -> np.ndarray:
    """Apply ``circuit`` to a state vector or ``(2**n, k)`` batch.

    ``faulty`` maps gate names to replacement matrices (two-qubit ones in
    (target, control) order), used for noise substitution.
    """
    n = circuit.n_qubits
    state = np.asarray(state, dtype=complex)
    vec = state.ndim == 1
    t = state.reshape((2,) * n + (-1,))
    for g in circuit.gates:
        sub = None if faulty is None else faulty.get(g.name)
        t = _apply_gate(t, g, n, sub)
    out = t.reshape(2 ** n, -1)
    return out[:, 0] if vec else out


# ---------------------------------------------------------------------------
# group-multiplication circuits
# ---------------------------------------------------------------------------

# qubits s1, s2, s3 = 0, 1, 2
_THETA_GATES: dict[int, list[tuple]] = {
    0: [],
    1: [("x", 1)],
    2: [("x", 2), ("cx", 2, 1)],
    3: [("cx", 2, 1), ("x", 2)],
    4: [("x", 0), ("cx", 0, 1), ("x", 2)],
    5: [("x", 2), ("cx", 0, 1), ("x", 0)],
    6: [("x", 0), ("cx", 2, 1), ("cx", 0, 1)],
    7: [("cx", 0, 1), ("cx", 2, 1), ("x", 0)],
}

# controls q1..q3 = 0..2, targets s1..s3 = 3..5; ("c", extra_controls, target)
_CTHETA_GATES: dict[int, list[tuple]] = {
    0: [],
    1: [("c", (), 4)],
    2: [("c", (), 5), ("c", (5,), 4)],
    3: [("c", (5,), 4), ("c", (), 5)],
    4: [("c", (), 3), ("c", (3,), 4), ("c", (), 5)],
    5: [("c", (), 5), ("c", (3,), 4), ("c", (), 3)],
    6: [("c", (), 3), ("c", (5,), 4), ("c", (3,), 4)],
    7: [("c", (3,), 4), ("c", (5,), 4), ("c", (), 3)],
}


def _listed_circuit(entries, n: int, time_order: bool) -> QubitCircuit:
    entries = entries if time_order else list(reversed(entries))
    circ = QubitCircuit(n)
    for e in entries:
        if e[0] == "x":
            circ.append(x_gate(e[1]))
        elif e[0] == "cx":
            circ.append(mcx((e[1],), e[2]))
        else:
            circ.append(mcx((0, 1, 2, *e[1]), e[2]))
    return circ


def theta_qubit_circuit(g: int, as_drawn: bool = False) -> QubitCircuit:
    """Three-qubit circuit for ``theta(g)`` under :data:`Q8_ENCODING`.

    The stored gate lists are the drawn circuits; drawn left to right they
    compose as an operator product (rightmost acts first), so the time order
    reverses them.  ``as_drawn=True`` returns the drawn order as time order.
    """
    if g not in _THETA_GATES:
        raise ValueError(f"unknown Q8 element {g}")
    return _listed_circuit(_THETA_GATES[g], 3, time_order=as_drawn)


def controlled_theta_qubit_circuit(g: int, as_drawn: bool = False) -> QubitCircuit:
    """Six-qubit ``C_theta(g)(g)``: controls on qubits 0-2, target element on qubits 3-5."""
    if g not in _CTHETA_GATES:
        raise ValueError(f"unknown Q8 element {g}")
    zeros = [q for q, b in enumerate(Q8_ENCODING.encode(g)) if b == "0"]
    body = _listed_circuit(_CTHETA_GATES[g], 6, time_order=as_drawn)
    if not body.gates:
        return body
    circ = QubitCircuit(6, [x_gate(q) for q in zeros])
    circ.extend(body.gates)
    circ.extend(x_gate(q) for q in zeros)
    return circ


def theta_program(dagger: bool = False, as_drawn: bool = False) -> QubitCircuit:
    """Full six-qubit ``Theta`` (target ``<-`` target * control) as the product of all ``C_theta(g)(g)``."""
    circ = QubitCircuit(6)
    for g in range(8):
        circ.extend(controlled_theta_qubit_circuit(g, as_drawn).gates)
    return circ.inverse() if dagger else circ


def encoded_operator(op: np.ndarray, n_registers: int = 1, encoding: QubitEncoding = Q8_ENCODING) -> np.ndarray:
    """Qudit operator on ``n_registers`` registers embedded in the qubit space (zero elsewhere)."""
    e = encoding.embedding()
    emb = e
    for _ in range(n_registers - 1):
        emb = np.kron(emb, e)
    return emb @ op @ emb.T


def theta_oracle(g: int, group: FiniteGroup | None = None) -> np.ndarray:
    """Encoded ``theta(g)`` as an 8x8 matrix."""
    group = group or make_q8()
    return encoded_operator(right_regular(group, g).matrix())


def controlled_theta_oracle(g: int, group: FiniteGroup | None = None) -> np.ndarray:
    """Encoded ``C_theta(g)(g)`` (control register first) as a 64x64 matrix."""
    group = group or make_q8()
    d = group.order
    perm = right_regular(group, g).matrix()
    op = np.zeros((d * d, d * d), dtype=complex)
    for c in range(d):
        blk = perm if c == g else np.eye(d)
        op[c * d:(c + 1) * d, c * d:(c + 1) * d] = blk
    return encoded_operator(op, 2)


def z4_identity() -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``(P, A, B)`` with ``P`` the mod-4 shift and ``P = A @ B`` (``B`` acts first).

    On two qubits ``(a, b)`` with ``a`` significant, ``B = X_b`` and ``A`` is a
    CNOT from ``b`` onto ``a``.
    """
    p = np.roll(np.eye(4), -1, axis=0)
    b = QubitCircuit(2, [x_gate(1)]).unitary()
    a = QubitCircuit(2, [mcx((1,), 0)]).unitary()
    return p, a, b


def magnetic_qubit_circuit(params: ModelParams, dt: float, offset: int = 0, n_qubits: int = 3) -> QubitCircuit:
    """Single-register magnetic gate: a two-controlled phase on ``s2`` gated by ``s1 = s3 = 0``."""
    diag = np.diag(magnetic_gate(make_q8(), params, dt))
    u = np.diag([diag[0], diag[1]])          # +1 -> s2 = 0, -1 -> s2 = 1
    s1, s2, s3 = offset, offset + 1, offset + 2
    circ = QubitCircuit(n_qubits, [x_gate(s1), x_gate(s3)])
    circ.append(QubitGate("mcu2", s2, (s1, s3), u))
    circ.extend([x_gate(s1), x_gate(s3)])
    return circ


def plaquette_qubit_circuit(params: ModelParams, dt: float, plaquette=(0, 1, 2, 3), n_links: int = 4
                            ) -> QubitCircuit:
    """Qubit version of the plaquette evolution on ``3 * n_links`` qubits.

    Same block order as the qudit circuit: ``Theta_{1|2}``, ``Theta^+_{1|3}``,
    ``Theta^+_{1|4}``, ``U_B(l1)``, ``Theta_{1|4}``, ``Theta_{1|3}``,
    ``Theta^+_{1|2}`` in time order.
    """
    l1, l2, l3, l4 = plaquette
    n = 3 * n_links
    circ = QubitCircuit(n)

    def theta(ctrl, dag):
        mapping = [3 * ctrl + k for k in range(3)] + [3 * l1 + k for k in range(3)]
        return theta_program(dagger=dag).remap(mapping, n).gates

    for ctrl, dag in ((l2, False), (l3, True), (l4, True)):
        circ.extend(theta(ctrl, dag))
    circ.extend(magnetic_qubit_circuit(params, dt, offset=3 * l1, n_qubits=n).gates)
    for ctrl, dag in ((l4, False), (l3, False), (l2, True)):
        circ.extend(theta(ctrl, dag))
    return circ


# ---------------------------------------------------------------------------
# lowering
# ---------------------------------------------------------------------------

def _root(u: np.ndarray, k: int) -> np.ndarray:
    """Principal ``k``-th root of a unitary ``u``."""
    w, v = np.linalg.eig(u)
    return v @ np.diag(w ** (1.0 / k)) @ np.linalg.inv(v)


def gray_code_controlled(controls, target: int, u: np.ndarray) -> list[QubitGate]:
    """``n``-controlled ``u`` as ``2**n - 1`` controlled-``V`` and ``2**n - 2`` CNOTs, ``V**(2**(n-1)) = u``.

    Controlled-``V`` (odd subsets) and ``V^+`` (even subsets) sit on the
    highest control of each Gray-code subset, which holds that subset's
    parity.
    """
    controls = [int(c) for c in controls]
    n = len(controls)
    if n == 0:
        raise ValueError("need at least one control")
    if n == 1:
        return [QubitGate("cv", target, (controls[0],), np.asarray(u, dtype=complex))]
    v = _root(np.asarray(u, dtype=complex), 2 ** (n - 1))
    vd = v.conj().T
    content = [{i} for i in range(n)]
    gates: list[QubitGate] = []
    for k in range(1, 2 ** n):
        gray = k ^ (k >> 1)
        subset = {i for i in range(n) if gray >> i & 1}
        h = max(subset)
        diff = content[h] ^ subset
        if diff:
            (j,) = diff
            if content[j] != {j}:
                raise AssertionError("Gray-code parity bookkeeping broken")
            gates.append(mcx((controls[j],), controls[h]))
            content[h] = content[h] ^ {j}
        odd = len(subset) % 2 == 1
        gates.append(QubitGate("cv" if odd else "cv_dag", target, (controls[h],), v if odd else vd))
    return gates


def _zxz(w: np.ndarray) -> tuple[float, float, float]:
    """``w = rz(a) rx(b) rz(c)`` for ``w`` in SU(2)."""
    alpha, beta = w[0, 0], w[0, 1]
    b = 2 * math.atan2(abs(beta), abs(alpha))
    s = -2 * np.angle(alpha) if abs(alpha) > 1e-14 else 0.0          # a + c
    dm = -2 * np.angle(1j * beta) if abs(beta) > 1e-14 else 0.0      # a - c
    return (s + dm) / 2, b, (s - dm) / 2


def controlled_u_to_c_iy(control: int, target: int, u: np.ndarray) -> list[QubitGate]:
    """Controlled-``u`` as single-qubit gates and controlled-iY.

    One controlled-iY when ``u`` is proportional to X (the CNOT case), two
    otherwise.  Uses ``A iY B iY C = -rz(a) rx(b) rz(c)`` with ``ABC = 1``.
    """
    u = np.asarray(u, dtype=complex)
    det = np.linalg.det(u)
    phi = np.angle(det) / 2
    w = u * np.exp(-1j * phi)
    if np.allclose(u, X, atol=1e-12):
        a = rz(-math.pi / 2)                 # a iY a^+ = iX
        return [QubitGate("single", target, (), a.conj().T), c_iy(control, target),
                QubitGate("single", target, (), a), QubitGate("single", control, (), phase_gate(-math.pi / 2))]
    a_, b_, c_ = _zxz(w)
    A = rz(a_) @ rx(b_ / 2)
    B = rx(-b_ / 2) @ rz(-(a_ + c_) / 2)
    C = rz((c_ - a_) / 2)
    return [QubitGate("single", target, (), C), c_iy(control, target), QubitGate("single", target, (), B),
            c_iy(control, target), QubitGate("single", target, (), A),
            QubitGate("single", control, (), phase_gate(phi + math.pi))]


def lower(circuit: QubitCircuit, level: str) -> QubitCircuit:
    """Expand to ``level``: two-qubit controlled-U gates, or CNOT + controlled-iY."""
    if level not in LEVELS:
        raise ValueError(f"unknown level {level!r}; choose from {LEVELS}")
    if level == LEVEL_NATIVE:
        return QubitCircuit(circuit.n_qubits, list(circuit.gates))
    out = QubitCircuit(circuit.n_qubits)
    for g in circuit.gates:
        if len(g.controls) >= 2:
            out.extend(gray_code_controlled(g.controls, g.target, g.matrix))
        else:
            out.append(g)
    if level == LEVEL_CU:
        return out
    final = QubitCircuit(circuit.n_qubits)
    for g in out.gates:
        if len(g.controls) == 1 and g.name != "c_iy" and g.matrix.shape == (2, 2):
            final.extend(controlled_u_to_c_iy(g.controls[0], g.target, g.matrix))
        else:
            final.append(g)
    return final


def toffoli_cost(n: int, level: str = LEVEL_CU) -> int:
    """Entangling gates in an ``n``-controlled X after lowering to ``level``."""
    if n not in (2, 3, 4):
        raise ValueError(f"unsupported number of controls {n}; expected 2, 3 or 4")
    if level == LEVEL_NATIVE:
        return 1
    return lower(QubitCircuit(n + 1, [mcx(range(n), n)]), level).n_entangling()


def count_entangling(program: str, level: str = LEVEL_CU) -> int:
    """Entangling-gate count of ``theta_gate`` or ``plaquette_trotter_step`` at ``level``."""
    if program == "theta_gate":
        return lower(theta_program(), level).n_entangling()
    if program == "plaquette_trotter_step":
        return lower(plaquette_qubit_circuit(ModelParams(1.0, 1.0), 0.1), level).n_entangling()
    raise ValueError(f"unknown program {program!r}; expected 'theta_gate' or 'plaquette_trotter_step'")


def count_report(program: str, level: str = LEVEL_CU) -> dict:
    return {"program": program, "level": level, "entangling_count": count_entangling(program, level)}


# ---------------------------------------------------------------------------
# noisy run
# ---------------------------------------------------------------------------

def entangled_benchmark_states() -> tuple[np.ndarray, np.ndarray]:
    """Encoded ``(psi0, psi1)``: controls uniform with target ``|1>``, and ``sum_g |g>|g>/sqrt(8)``."""
    e = Q8_ENCODING
    psi0 = np.zeros(64, dtype=complex)
    psi1 = np.zeros(64, dtype=complex)
    for g in range(8):
        psi0[e.index(g) * 8 + e.index(0)] = 1 / math.sqrt(8)
        psi1[e.index(g) * 8 + e.index(g)] = 1 / math.sqrt(8)
    return psi0, psi1


@dataclass
class QubitThetaResult:
    fidelity: float
    norm: float
    n_entangling: int
    gate_fidelity: float | None = None


def noisy_qubit_theta_sim(hw=None, bank=None, faulty_c_iy: np.ndarray | None = None) -> QubitThetaResult:
    """State fidelity of the lowered qubit ``Theta`` on the entangled benchmark.

    Every controlled-iY is replaced by the faulty ``(target, control)``
    matrix: ``faulty_c_iy`` if given, else ``bank["c_iy"]``, else a bank
    simulated from ``hw``.  Single-qubit gates are ideal.
    """
    from .pulse_hardware.fidelity import average_gate_fidelity

    if faulty_c_iy is None:
        if bank is None:
            if hw is None:
                raise ValueError("need hw, bank or faulty_c_iy")
            from .pulse_hardware.bank import build_qubit_bank
            bank = build_qubit_bank(hw)
        faulty_c_iy = bank["c_iy"]
    faulty_c_iy = np.asarray(faulty_c_iy, dtype=complex)
    prog = lower(theta_program(), LEVEL_CIY)
    psi0, psi1 = entangled_benchmark_states()
    out = apply_circuit(prog, psi0, faulty={"c_iy": faulty_c_iy})
    ideal = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]], dtype=complex)
    ideal[np.ix_([1, 3], [1, 3])] = IY       # (target, control) with control = 1 on odd indices
    return QubitThetaResult(fidelity=float(abs(np.vdot(psi1, out)) ** 2), norm=float(np.vdot(out, out).real),
                            n_entangling=prog.n_entangling(),
                            gate_fidelity=average_gate_fidelity(ideal, faulty_c_iy))
