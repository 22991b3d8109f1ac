"""Hardware parameters, atomic level scheme, pulses and schedules.

Internally every pulse-level computation runs in units where ``Omega = 1``
(times in ``1/Omega``, rates in ``Omega``).  :class:`HardwareParams` stores SI
values and exposes the dimensionless ratios.
"""

from __future__ import annotations

import hashlib
import json
import math
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class HardwareParams:
    """Rydberg qudit hardware.

    Attributes
    ----------
    Omega : float
        Peak Rabi frequency in rad/s.
    Omega_p_ratio : float
        Constant auxiliary coupling ``Omega_p / Omega``.
    T : float
        Pulse window in seconds.
    gamma_e, gamma_r : float
        Decay rates (1/s) of the intermediate and Rydberg levels.
    V : float
        Rydberg interaction in rad/s.
    move_dead_time : float
        Atom-movement dead time in seconds, inserted before and after each
        entangling block.
    """

    Omega: float = TWO_PI * 100e6
    Omega_p_ratio: float = 1.0
    T: float = 300.0 / (TWO_PI * 100e6)
    gamma_e: float = 1e-6 * TWO_PI * 100e6
    gamma_r: float = 1e-6 * TWO_PI * 100e6
    V: float = 5.0 * TWO_PI * 100e6
    move_dead_time: float = 25e-6

    def __post_init__(self):
        for name, value in asdict(self).items():
            if not np.isfinite(value) or value < 0:
                raise ValueError(f"HardwareParams.{name} must be finite and non-negative, got {value}")
        if self.Omega <= 0 or self.T <= 0:
            raise ValueError("Omega and T must be positive")
        if self.omega_T < 50:
            warnings.warn(f"Omega*T = {self.omega_T:.1f} < 50: adiabatic gates will be poor",
                          RuntimeWarning, stacklevel=3)

    @classmethod
    def from_ratios(cls, omega_T: float = 300.0, gamma_e_ratio: float = 1e-6,
                    gamma_r_ratio: float | None = None, V_ratio: float = 5.0,
                    Omega_p_ratio: float = 1.0, Omega: float = TWO_PI * 100e6,
                    move_dead_time: float = 25e-6) -> "HardwareParams":
        if gamma_r_ratio is None:
            gamma_r_ratio = gamma_e_ratio
        return cls(Omega=Omega, Omega_p_ratio=Omega_p_ratio, T=omega_T / Omega,
                   gamma_e=gamma_e_ratio * Omega, gamma_r=gamma_r_ratio * Omega,
                   V=V_ratio * Omega, move_dead_time=move_dead_time)

    @property
    def omega_T(self) -> float:
        return self.Omega * self.T

    @property
    def gamma_e_ratio(self) -> float:
        return self.gamma_e / self.Omega

    @property
    def gamma_r_ratio(self) -> float:
        return self.gamma_r / self.Omega

    @property
    def V_ratio(self) -> float:
        return self.V / self.Omega

    def dimensionless(self) -> dict[str, float]:
        return {"omega_T": self.omega_T, "Omega_p_ratio": self.Omega_p_ratio,
                "gamma_e_ratio": self.gamma_e_ratio, "gamma_r_ratio": self.gamma_r_ratio,
                "V_ratio": self.V_ratio}

    def replace(self, **changes) -> "HardwareParams":
        data = asdict(self)
        data.update(changes)
        return HardwareParams(**data)

    def with_ratios(self, **changes) -> "HardwareParams":
        data = self.dimensionless()
        data.update(changes)
        return HardwareParams.from_ratios(Omega=self.Omega, move_dead_time=self.move_dead_time, **data)

    def to_dict(self) -> dict[str, float]:
        return asdict(self)

    def digest(self) -> str:
        """Stable hash used to key gate banks."""
        payload = json.dumps({k: float(f"{v:.12e}") for k, v in sorted(asdict(self).items())},
                             sort_keys=True)
        return hashlib.sha256(payload.encode()).hexdigest()[:16]


@dataclass(frozen=True)
class AtomLevelScheme:
    """Flat ``d + 3`` level atom: computational ``0..d-1`` then ``p``, ``e``, ``r``."""

    d: int

    def __post_init__(self):
        if self.d < 2:
            raise ValueError("qudit dimension must be at least 2")

    @property
    def p(self) -> int:
        return self.d

    @property
    def e(self) -> int:
        return self.d + 1

    @property
    def r(self) -> int:
        return self.d + 2

    @property
    def n_levels(self) -> int:
        return self.d + 3

    def decay_rates(self, gamma_e: float, gamma_r: float) -> np.ndarray:
        rates = np.zeros(self.n_levels)
        rates[self.e] = gamma_e
        rates[self.r] = gamma_r
        return rates


@dataclass(frozen=True)
class TwoLevelRotation:
    """``u(alpha, delta)`` on levels ``(i, j)``.

    ``u = [[cos a, e^{-i delta} sin a], [-e^{i delta} sin a, cos a]]`` in the
    ``(i, j)`` basis.  ``R_y(phi) = u(phi/2, pi)`` and ``R_x(phi) = u(phi/2, pi/2)``.
    """

    i: int
    j: int
    alpha: float
    delta: float

    def __post_init__(self):
        if self.i == self.j:
            raise ValueError("rotation needs two distinct levels")

    @classmethod
    def axis(cls, i: int, j: int, axis: str, angle: float) -> "TwoLevelRotation":
        if axis == "y":
            return cls(i, j, angle / 2.0, math.pi)
        if axis == "x":
            return cls(i, j, angle / 2.0, math.pi / 2.0)
        raise ValueError(f"unknown axis {axis!r}")

    def block(self) -> np.ndarray:
        return two_level_u(self.alpha, self.delta)

    def matrix(self, dim: int) -> np.ndarray:
        out = np.eye(dim, dtype=complex)
        idx = np.array([self.i, self.j])
        out[np.ix_(idx, idx)] = self.block()
        return out

    def inverse(self) -> "TwoLevelRotation":
        return TwoLevelRotation(self.i, self.j, -self.alpha, self.delta)


def two_level_u(alpha: float, delta: float) -> np.ndarray:
    c, s = math.cos(alpha), math.sin(alpha)
    return np.array([[c, np.exp(-1j * delta) * s], [-np.exp(1j * delta) * s, c]])


@dataclass(frozen=True)
class GaussianPulsePair:
    """Two Gaussian pulses on ``i -> e`` and ``j -> e`` inside one window.

    Times are dimensionless (units of ``1/Omega``).  Envelopes are
    ``exp(-(t - tau_a)^2 / w^2) exp(-i phi_a)`` with ``w = T / 10``.
    """

    i: int
    j: int
    tau0: float
    tau1: float
    phi0: float
    phi1: float
    window: float
    amplitude: float = 1.0

    def __post_init__(self):
        for tau in (self.tau0, self.tau1):
            if not 0.0 <= tau <= self.window:
                raise ValueError(f"pulse centre {tau} outside window [0, {self.window}]")

    @classmethod
    def centered(cls, i: int, j: int, tau: float, delta: float, window: float,
                 amplitude: float = 1.0) -> "GaussianPulsePair":
        return cls(i, j, window / 2 - tau / 2, window / 2 + tau / 2, 0.0, delta, window, amplitude)

    @property
    def width(self) -> float:
        return self.window / 10.0

    @property
    def tau(self) -> float:
        return self.tau1 - self.tau0

    @property
    def delta(self) -> float:
        return self.phi1 - self.phi0

    def envelopes(self, t) -> tuple[np.ndarray, np.ndarray]:
        t = np.asarray(t, dtype=float)
        w = self.width
        o0 = self.amplitude * np.exp(-((t - self.tau0) / w) ** 2) * np.exp(-1j * self.phi0)
        o1 = self.amplitude * np.exp(-((t - self.tau1) / w) ** 2) * np.exp(-1j * self.phi1)
        return o0, o1


@dataclass(frozen=True)
class PulseStep:
    """One pulse window: which atom, which pair, and a provenance tag."""

    atom: str
    pair: GaussianPulsePair
    tag: str = ""


@dataclass
class PulseSchedule:
    """Ordered pulse windows plus the nominal rotations they implement."""

    steps: list[PulseStep] = field(default_factory=list)
    rotations: list[tuple[str, TwoLevelRotation]] = field(default_factory=list)
    window: float = 0.0

    def __len__(self) -> int:
        return len(self.steps)

    @property
    def n_pulse_pairs(self) -> int:
        return len(self.steps)

    @property
    def duration(self) -> float:
        """Duration in units of ``1/Omega``."""
        return len(self.steps) * self.window

    def extend(self, other: "PulseSchedule") -> None:
        if other.window and self.window and not math.isclose(other.window, self.window):
            raise ValueError("schedules with different windows cannot be joined")
        self.window = self.window or other.window
        self.steps.extend(other.steps)
        self.rotations.extend(other.rotations)
