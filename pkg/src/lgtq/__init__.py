"""Finite-group lattice gauge theory on Rydberg-atom qudits.

Subpackages and modules
-----------------------
group_core        finite groups, regular representations, validation
lgt_model         Kogut-Susskind Hamiltonian, exact evolution, observables
circuit_engine    native qudit circuits, Trotter steps, gate-bank substitution
pulse_hardware    pulse-level holonomic and blockade gate simulation
qubit_baseline    three-qubit encoding, Toffoli lowering, qubit comparison
cli               command-line runner (``lgtq``)
"""

__version__ = "0.1.0"

from .group_core import FiniteGroup, load_group, make_cyclic, make_q8, right_regular, validate_group  # noqa: E402
from .lgt_model import LatticeGeometry, ModelParams, exact_hamiltonian, single_plaquette  # noqa: E402

__all__ = [
    "FiniteGroup", "LatticeGeometry", "ModelParams", "__version__", "exact_hamiltonian", "load_group",
    "make_cyclic", "make_q8", "right_regular", "single_plaquette", "validate_group",
]
