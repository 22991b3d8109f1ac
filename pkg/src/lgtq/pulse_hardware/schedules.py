"""Pulse schedules: rotation lists realised by calibrated Gaussian pulse pairs.

The Q8 permutation sequences are stored as written matrix products
``R_1 R_2 ... R_m`` of ``R_y(m pi)`` rotations, so ``R_m`` acts first in time.
"""

from __future__ import annotations

import math

import numpy as np

from ..group_core import Q8_LABELS
from .calibration import calibrate_alpha
from .params import GaussianPulsePair, HardwareParams, PulseSchedule, PulseStep, TwoLevelRotation

# (i, j, multiple of pi) in written (matrix-product) order
Q8_SEQUENCES_AS_LISTED: dict[str, tuple[tuple[int, int, int], ...]] = {
    "-1": ((0, 1, 2), (1, 2, 1), (2, 3, 1), (4, 5, 1), (5, 6, 2), (6, 7, 1)),
    "I": ((0, 2, 1), (2, 1, 1), (1, 3, 1), (3, 4, 2), (6, 7, 1), (4, 6, 1), (7, 5, 1)),
    "-I": ((0, 3, 1), (3, 1, 1), (1, 2, 1), (2, 4, 2), (4, 6, 1), (6, 5, 1), (5, 7, 1)),
    "J": ((0, 4, 1), (4, 1, 1), (1, 5, 1), (5, 2, 2), (2, 6, 1), (6, 3, 1), (3, 7, 1)),
    "-J": ((0, 5, 1), (5, 1, 1), (1, 4, 1), (4, 2, 2), (6, 7, 1), (2, 6, 1), (7, 3, 1)),
    "K": ((0, 6, 1), (6, 1, 1), (1, 7, 1), (7, 2, 2), (4, 5, 1), (2, 4, 1), (5, 3, 1)),
    "-K": ((0, 7, 1), (7, 1, 1), (1, 6, 1), (6, 2, 2), (2, 4, 1), (4, 3, 1), (3, 5, 1)),
}

# the listed -1 sequence is not a permutation matrix; moving the 2 pi rotation from
# (0, 1) to (1, 2) makes it exactly theta(-1)
Q8_SEQUENCES: dict[str, tuple[tuple[int, int, int], ...]] = dict(Q8_SEQUENCES_AS_LISTED)
Q8_SEQUENCES["-1"] = ((0, 1, 1), (1, 2, 2), (2, 3, 1), (4, 5, 1), (5, 6, 2), (6, 7, 1))


def sequence_rotations(seq) -> list[TwoLevelRotation]:
    """Time-ordered rotations of a written product ``R_1 ... R_m``."""
    return [TwoLevelRotation.axis(i, j, "y", m * math.pi) for i, j, m in reversed(seq)]


def q8_rotations(element: int | str, as_listed: bool = False) -> list[TwoLevelRotation]:
    """Time-ordered ``R_y`` rotations for ``theta(element)`` (empty for the identity)."""
    label = Q8_LABELS[element] if isinstance(element, (int, np.integer)) else element
    if label == "1":
        return []
    table = Q8_SEQUENCES_AS_LISTED if as_listed else Q8_SEQUENCES
    return sequence_rotations(table[label])


def rotations_schedule(rotations, hw: HardwareParams, atom: str = "target", tag: str = "") -> PulseSchedule:
    """Calibrated pulse pairs for a list of rotations on one atom."""
    window = hw.omega_T
    sched = PulseSchedule(window=window)
    for rot in rotations:
        cal = calibrate_alpha(hw, rot.alpha)
        pair = GaussianPulsePair.centered(rot.i, rot.j, cal.tau, rot.delta, window)
        sched.steps.extend(PulseStep(atom, pair, tag) for _ in range(cal.k))
        sched.rotations.append((atom, rot))
    return sched


def q8_permutation_schedule(element: int | str, hw: HardwareParams) -> PulseSchedule:
    """Pulse schedule implementing ``theta(element)`` on a single qudit."""
    return rotations_schedule(q8_rotations(element), hw, atom="single", tag=f"theta({element})")


def nominal_controlled_pulse_pairs(n_rotations: int) -> int:
    """Pairs for ``C_U`` with one pair per rotation: ``U``, conjugated ``U^+`` (3 each) and two ``S``."""
    return 4 * n_rotations + 2


def single_qudit_pulse_bound(d: int) -> int:
    """``3 d (d - 1) / 2`` pulse windows for a generic single-qudit gate."""
    return 3 * d * (d - 1) // 2


def controlled_pulse_bound(d: int) -> int:
    """``6 d (d - 1) + 2`` pulse windows for a generic controlled unitary."""
    return 6 * d * (d - 1) + 2


def theta_pulse_pair_formula(d: int) -> int:
    """``2 (2d - 1)(d - 1)``: ``d - 1`` controlled permutations of ``d - 1`` rotations each."""
    return 2 * (2 * d - 1) * (d - 1)


def theta_nominal_pulse_pairs() -> int:
    """Nominal pairs of the Q8 group-multiplication gate from the explicit sequences."""
    return sum(nominal_controlled_pulse_pairs(len(seq)) for seq in Q8_SEQUENCES.values())
