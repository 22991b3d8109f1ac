"""Pulse-level model of the Rydberg qudit processor."""

from .bank import (GateBank, StaleBankError, build_qubit_bank, build_theta_bank, cperm_template,
                   ideal_theta_bank)
from .blockade import (ControlledGateResult, controlled_ideal, controlled_unitary_pulse_sim,
                       direct_two_atom_operator)
from .calibration import CalibrationError, calibrate_alpha, calibration_curve
from .decompose import decompose_unitary, rotations_to_matrix, su2_to_axis_rotations
from .fidelity import (ErrorSurface, average_gate_fidelity, gate_error_scan, single_qudit_pulse_sim,
                       state_fidelity)
from .holonomic import holonomic_hamiltonian, simulate_two_level_pulse
from .integrate import IntegrationError, integrate_lossy_tdse
from .params import (AtomLevelScheme, GaussianPulsePair, HardwareParams, PulseSchedule, PulseStep,
                     TwoLevelRotation, two_level_u)
from .schedules import (q8_permutation_schedule, q8_rotations, theta_nominal_pulse_pairs,
                        theta_pulse_pair_formula)

__all__ = [
    "AtomLevelScheme", "CalibrationError", "ControlledGateResult", "ErrorSurface", "GateBank",
    "GaussianPulsePair", "HardwareParams", "IntegrationError", "PulseSchedule", "PulseStep",
    "StaleBankError", "TwoLevelRotation", "average_gate_fidelity", "build_qubit_bank",
    "build_theta_bank", "calibrate_alpha", "calibration_curve", "controlled_ideal",
    "controlled_unitary_pulse_sim", "cperm_template", "decompose_unitary", "direct_two_atom_operator",
    "gate_error_scan", "holonomic_hamiltonian", "ideal_theta_bank", "integrate_lossy_tdse",
    "q8_permutation_schedule", "q8_rotations", "rotations_to_matrix", "simulate_two_level_pulse",
    "single_qudit_pulse_sim", "state_fidelity", "su2_to_axis_rotations", "theta_nominal_pulse_pairs",
    "theta_pulse_pair_formula", "two_level_u",
]
