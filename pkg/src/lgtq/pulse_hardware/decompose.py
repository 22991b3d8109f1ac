"""Two-level (Givens) decomposition of qudit unitaries into axis rotations."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .params import TwoLevelRotation

_TOL = 1e-12


@dataclass
class TwoLevelUnitary:
    """SU(2) block ``matrix`` acting on levels ``(i, j)``."""

    i: int
    j: int
    matrix: np.ndarray


@dataclass
class Decomposition:
    """``U = exp(i global_phase) * G_K ... G_1``; lists are in time order (first applied first)."""

    dim: int
    global_phase: float
    two_level: list[TwoLevelUnitary] = field(default_factory=list)
    rotations: list[TwoLevelRotation] = field(default_factory=list)

    def reconstruct(self) -> np.ndarray:
        return np.exp(1j * self.global_phase) * rotations_to_matrix(self.rotations, self.dim)

    def reconstruct_two_level(self) -> np.ndarray:
        out = np.eye(self.dim, dtype=complex)
        for g in self.two_level:
            idx = np.array([g.i, g.j])
            full = np.eye(self.dim, dtype=complex)
            full[np.ix_(idx, idx)] = g.matrix
            out = full @ out
        return np.exp(1j * self.global_phase) * out


def rotations_to_matrix(rotations, dim: int) -> np.ndarray:
    out = np.eye(dim, dtype=complex)
    for rot in rotations:
        idx = np.array([rot.i, rot.j])
        out[idx, :] = rot.block() @ out[idx, :]
    return out


def _is_zero_angle(angle: float, period: float = 4 * math.pi, tol: float = 1e-12) -> bool:
    r = math.remainder(angle, period)
    return abs(r) < tol


def _wrap(angle: float) -> float:
    # rotation angles are 4 pi periodic; keep them in (-2 pi, 2 pi]
    r = math.remainder(angle, 4 * math.pi)
    return 2 * math.pi if math.isclose(r, -2 * math.pi) else r


def su2_to_axis_rotations(w: np.ndarray, tol: float = 1e-12) -> list[tuple[str, float]]:
    """Split ``w`` in SU(2) into at most three ``R_x``/``R_y`` rotations.

    Returns ``[(axis, angle), ...]`` in time order.  Uses ``w = R_x(a) R_y(b) R_x(c)``,
    obtained from the ZYZ angles of the Hadamard-conjugated matrix.
    """
    h = np.array([[1, 1], [1, -1]]) / math.sqrt(2)
    v = h @ w @ h
    a, b = v[0, 0], v[0, 1]
    beta0 = 2.0 * math.atan2(abs(b), abs(a))
    best = None
    # v = Rz(al) Ry(be) Rz(ga) with a = e^{-i(al+ga)/2} cos(be/2), b = -e^{-i(al-ga)/2} sin(be/2);
    # both signs of be are valid, keep the shorter sequence
    for beta, b_sign in ((beta0, -1.0), (-beta0, 1.0)):
        s = -2.0 * np.angle(a) if abs(a) > tol else None
        dlt = -2.0 * np.angle(b_sign * b) if abs(b) > tol else None
        if s is None:
            s = dlt
        if dlt is None:
            dlt = s
        alpha, gamma = (s + dlt) / 2.0, (s - dlt) / 2.0
        # w = H v H = Rx(al) Ry(-be) Rx(ga)
        ops = [("x", gamma), ("y", -beta), ("x", alpha)]
        if _is_zero_angle(beta, tol=tol):
            ops = [("x", alpha + gamma)]
        ops = [(ax, _wrap(ang)) for ax, ang in ops if not _is_zero_angle(ang, tol=tol)]
        key = (len(ops), sum(abs(ang) for _, ang in ops))
        if best is None or key < best[0]:
            best = (key, ops)
    return best[1]


def _check_unitary(u: np.ndarray, tol: float) -> None:
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise ValueError("matrix must be square")
    err = np.abs(u.conj().T @ u - np.eye(u.shape[0])).max()
    if err > tol:
        raise ValueError(f"matrix is not unitary (deviation {err:.2e})")


def decompose_unitary(u: np.ndarray, connectivity: str = "all_to_all",
                      unitary_tol: float = 1e-10) -> Decomposition:
    """Decompose ``u`` into SU(2) two-level unitaries and axis rotations.

    Parameters
    ----------
    u : (d, d) array
        Unitary to decompose.
    connectivity : {"all_to_all", "consecutive"}
        ``consecutive`` only uses neighbouring level pairs ``(k, k+1)``.

    Notes
    -----
    Column-by-column Givens elimination with SU(2) blocks, after removing
    ``det(u)^(1/d)`` as a global phase.  The leftover diagonal is rebuilt from
    diagonal SU(2) blocks chained over the levels that carry a phase.
    """
    if connectivity not in ("all_to_all", "consecutive"):
        raise ValueError(f"unknown connectivity {connectivity!r}")
    u = np.asarray(u, dtype=complex)
    _check_unitary(u, unitary_tol)
    d = u.shape[0]
    phase = float(np.angle(np.linalg.det(u))) / d
    m = u * np.exp(-1j * phase)
    eliminations: list[TwoLevelUnitary] = []
    for c in range(d - 1):
        for r in range(d - 1, c, -1):
            a, b = (c, r) if connectivity == "all_to_all" else (r - 1, r)
            x, y = m[a, c], m[b, c]
            if abs(y) < _TOL:
                continue
            n = math.hypot(abs(x), abs(y))
            w = np.array([[np.conj(x) / n, np.conj(y) / n], [-y / n, x / n]])
            m[[a, b], :] = w @ m[[a, b], :]
            eliminations.append(TwoLevelUnitary(a, b, w))
    # u = exp(i phase) * W_1^+ ... W_K^+ * D ; in time order D first, then W_K^+, ..., W_1^+
    theta = np.angle(np.diag(m))
    diag_ops = _diagonal_chain(theta, connectivity)
    two_level = diag_ops + [TwoLevelUnitary(g.i, g.j, g.matrix.conj().T) for g in reversed(eliminations)]
    rotations = []
    for g in two_level:
        for axis, angle in su2_to_axis_rotations(g.matrix):
            rotations.append(TwoLevelRotation.axis(g.i, g.j, axis, angle))
    return Decomposition(dim=d, global_phase=phase, two_level=two_level, rotations=rotations)


def _diagonal_chain(theta: np.ndarray, connectivity: str) -> list[TwoLevelUnitary]:
    d = len(theta)
    if connectivity == "all_to_all":
        levels = [k for k in range(d) if abs(math.remainder(theta[k], 2 * math.pi)) > 1e-12]
    else:
        levels = list(range(d))
    out = []
    beta = 0.0
    for a, b in zip(levels[:-1], levels[1:]):
        beta += theta[a]
        if abs(math.remainder(beta, 2 * math.pi)) > 1e-12:
            out.append(TwoLevelUnitary(a, b, np.diag([np.exp(1j * beta), np.exp(-1j * beta)])))
    return out
