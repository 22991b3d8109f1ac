"""Delay calibration ``alpha(tau)`` for Gaussian pulse pairs.

Curves are computed without decay and cached per ``(Omega_p/Omega, Omega T)``.
``alpha`` is odd in ``tau`` and negative for positive delays; the central
branch ``|tau| <= tau_peak`` is monotone and is the one used for gates.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .holonomic import alpha_from_block, pair_propagator
from .params import HardwareParams


class CalibrationError(ValueError):
    """Requested rotation is outside the achievable range."""


@dataclass
class CalibrationCurve:
    """Calibration for one ``(Omega_p/Omega, Omega T)`` point."""

    omega_p_ratio: float
    omega_T: float
    tau_peak: float = field(init=False)
    alpha_max: float = field(init=False)
    _roots: dict = field(default_factory=dict, init=False, repr=False)

    def __post_init__(self):
        window = self.omega_T
        res = minimize_scalar(self.alpha, bounds=(0.01 * window, 0.3 * window), method="bounded",
                              options={"xatol": 1e-7 * window})
        self.tau_peak = float(res.x)
        self.alpha_max = float(-res.fun)

    def alpha(self, tau: float) -> float:
        """Rotation angle of a lossless centred pair with delay ``tau`` (units ``1/Omega``)."""
        u = pair_propagator(self.omega_T, float(tau), 0.0, self.omega_p_ratio)
        return alpha_from_block(u[:2, :2], 0.0)

    def tau_for(self, alpha: float, tol: float = 1e-10) -> float:
        """Delay on the central branch giving ``alpha`` (``|alpha| <= alpha_max``)."""
        if abs(alpha) > self.alpha_max + 1e-12:
            raise CalibrationError(f"|alpha| = {abs(alpha):.6f} exceeds alpha_max = {self.alpha_max:.6f}")
        if alpha == 0.0:
            return 0.0
        key = round(abs(alpha), 13)
        if key not in self._roots:
            target = -min(abs(alpha), self.alpha_max)
            if abs(target) >= self.alpha_max - 1e-12:
                self._roots[key] = self.tau_peak
            else:
                self._roots[key] = brentq(lambda t: self.alpha(t) - target, 0.0, self.tau_peak,
                                          xtol=tol * self.omega_T, rtol=4 * np.finfo(float).eps)
        tau = self._roots[key]
        return tau if alpha < 0 else -tau

    def sweep(self, taus) -> np.ndarray:
        return np.array([self.alpha(t) for t in taus])


@dataclass(frozen=True)
class CalibrationResult:
    """Delay ``tau`` per pair and number of identical pairs ``k``."""

    tau: float
    k: int
    alpha_per_pair: float
    alpha_max: float


_CACHE: dict[tuple[float, float], CalibrationCurve] = {}
_LOCK = threading.Lock()


def calibration_curve(omega_p_ratio: float, omega_T: float) -> CalibrationCurve:
    key = (round(float(omega_p_ratio), 12), round(float(omega_T), 9))
    curve = _CACHE.get(key)
    if curve is None:
        with _LOCK:
            curve = _CACHE.get(key)
            if curve is None:
                curve = CalibrationCurve(*key)
                _CACHE[key] = curve
    return curve


def clear_calibration_cache() -> None:
    with _LOCK:
        _CACHE.clear()


def calibrate_alpha(hw: HardwareParams, alpha_target: float, max_pairs: int = 64) -> CalibrationResult:
    """Delay and pair count realising ``u(alpha_target, delta)``.

    Angles beyond the single-pair maximum are split into ``k`` equal pairs,
    ``u(alpha/k, delta)^k = u(alpha, delta)``.
    """
    curve = calibration_curve(hw.Omega_p_ratio, hw.omega_T)
    a = float(alpha_target)
    k = max(1, math.ceil(abs(a) / curve.alpha_max - 1e-12))
    if k > max_pairs:
        raise CalibrationError(f"alpha = {a:.4f} needs {k} pairs (> {max_pairs})")
    per = a / k
    return CalibrationResult(tau=curve.tau_for(per), k=k, alpha_per_pair=per, alpha_max=curve.alpha_max)
