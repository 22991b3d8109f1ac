"""Gate banks: labelled (possibly sub-unitary) matrices keyed to hardware parameters."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..group_core import FiniteGroup, make_q8, right_regular
from .blockade import controlled_unitary_pulse_sim
from .params import HardwareParams, TwoLevelRotation
from .schedules import q8_rotations


class StaleBankError(ValueError):
    """Bank was produced with different hardware parameters."""


def cperm_template(j0: int, h: int) -> str:
    """Key of the controlled permutation ``C_theta(h)(j0)``."""
    return f"cperm:{int(j0)}:{int(h)}"


def matrix_template(prefix: str, m: np.ndarray) -> str:
    data = np.round(np.asarray(m, dtype=complex), 12)
    return f"{prefix}:{hashlib.sha1(data.tobytes()).hexdigest()[:12]}"


@dataclass
class GateBank:
    """Template key -> matrix, plus the parameters that produced it.

    Two-qudit matrices act on ``(target, control)`` with the target as the
    slow index.
    """

    matrices: dict[str, np.ndarray] = field(default_factory=dict)
    hw: HardwareParams | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        for key, m in self.matrices.items():
            self._check(key, m)

    @staticmethod
    def _check(key: str, m: np.ndarray, tol: float = 1e-10) -> None:
        norm = np.linalg.norm(m, 2)
        if norm > 1 + tol:
            raise ValueError(f"bank matrix {key!r} has operator norm {norm:.12f} > 1")

    @property
    def digest(self) -> str | None:
        return None if self.hw is None else self.hw.digest()

    def __contains__(self, key: str) -> bool:
        return key in self.matrices

    def __getitem__(self, key: str) -> np.ndarray:
        return self.matrices[key]

    def add(self, key: str, m: np.ndarray) -> None:
        m = np.asarray(m, dtype=complex)
        self._check(key, m)
        self.matrices[key] = m

    def require(self, hw: HardwareParams) -> None:
        if self.hw is None or self.hw.digest() != hw.digest():
            raise StaleBankError(f"bank digest {self.digest} does not match parameters {hw.digest()}")

    def to_json(self) -> str:
        payload = {
            "hw": None if self.hw is None else self.hw.to_dict(),
            "hw_digest": self.digest,
            "meta": self.meta,
            "matrices": {k: {"shape": list(m.shape), "real": m.real.ravel().tolist(),
                             "imag": m.imag.ravel().tolist()} for k, m in sorted(self.matrices.items())},
        }
        return json.dumps(payload)

    def save(self, path: str | Path) -> Path:
        path = Path(path)
        path.write_text(self.to_json())
        return path

    @classmethod
    def from_json(cls, text: str) -> "GateBank":
        data = json.loads(text)
        hw = None if data.get("hw") is None else HardwareParams(**data["hw"])
        if hw is not None and data.get("hw_digest") not in (None, hw.digest()):
            raise StaleBankError("bank file digest does not match its stored parameters")
        mats = {k: (np.array(v["real"]) + 1j * np.array(v["imag"])).reshape(v["shape"])
                for k, v in data["matrices"].items()}
        return cls(matrices=mats, hw=hw, meta=data.get("meta", {}))

    @classmethod
    def load(cls, path: str | Path, hw: HardwareParams | None = None) -> "GateBank":
        bank = cls.from_json(Path(path).read_text())
        if hw is not None:
            bank.require(hw)
        return bank


def theta_gate_list(group: FiniteGroup, dagger: bool = False) -> list[tuple[int, int]]:
    """``(j0, h)`` of the controlled permutations making up ``Theta`` (or ``Theta^+``)."""
    return [(g, int(group.inverse[g]) if dagger else g) for g in range(group.order)]


def build_theta_bank(hw: HardwareParams, group: FiniteGroup | None = None, include_dagger: bool = True,
                     progress=None) -> GateBank:
    """Pulse-simulate every controlled permutation of ``Theta`` (and ``Theta^+``).

    Also stores the composites ``theta`` and ``theta_dag``.  Identity
    permutations are ideal (empty schedules).
    """
    group = group or make_q8()
    d = group.order
    bank = GateBank(hw=hw, meta={"d": d, "kind": "theta"})
    pairs = set(theta_gate_list(group)) | (set(theta_gate_list(group, True)) if include_dagger else set())
    stats = {}
    for j0, h in sorted(pairs):
        perm = right_regular(group, h).matrix()
        rots = q8_rotations(h) if d == 8 else None
        res = controlled_unitary_pulse_sim(hw, perm, j0, rotations=rots)
        bank.add(cperm_template(j0, h), res.operator)
        stats[cperm_template(j0, h)] = {"loss": res.loss, "leakage": res.leakage,
                                        "n_pulse_pairs": res.n_pulse_pairs}
        if progress is not None:
            progress(j0, h, res)
    bank.meta["gates"] = stats
    for name, dag in (("theta", False), ("theta_dag", True)):
        if dag and not include_dagger:
            continue
        total = np.eye(d * d, dtype=complex)
        for j0, h in theta_gate_list(group, dag):
            total = bank[cperm_template(j0, h)] @ total
        bank.add(name, total)
    return bank


def ideal_theta_bank(group: FiniteGroup | None = None) -> GateBank:
    """Bank holding the exact controlled permutations (for plumbing tests)."""
    from .blockade import controlled_ideal

    group = group or make_q8()
    bank = GateBank(meta={"d": group.order, "kind": "ideal"})
    for dag in (False, True):
        for j0, h in theta_gate_list(group, dag):
            bank.add(cperm_template(j0, h), controlled_ideal(right_regular(group, h).matrix(), j0))
    return bank


C_IY_ROTATION = TwoLevelRotation(0, 1, np.pi / 2, 0.0)   # iY = [[0, 1], [-1, 0]] = u(pi/2, 0)


def build_qubit_bank(hw: HardwareParams) -> GateBank:
    """Pulse-simulated controlled-iY on two qubit atoms (control level 1)."""
    iy = np.array([[0, 1], [-1, 0]], dtype=complex)
    res = controlled_unitary_pulse_sim(hw, iy, 1, rotations=[C_IY_ROTATION])
    bank = GateBank(hw=hw, meta={"d": 2, "kind": "qubit", "loss": res.loss,
                                 "n_pulse_pairs": res.n_pulse_pairs})
    bank.add("c_iy", res.operator)
    return bank
