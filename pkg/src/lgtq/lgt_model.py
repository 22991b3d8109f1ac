"""Finite-group Kogut-Susskind model on small lattices.

The electric term is defined through the transfer matrix
``T[g', g] = exp(2 chi(g' g^-1) / (lambda_E a_t))`` with effective single-link
Hamiltonian ``h_E = -log T`` (so ``exp(-i h_E dt) = exp(i dt log T)``).  The
magnetic term is diagonal in the group basis with entries
``sum_plaquettes 2 lambda_B chi(g1 g2 g3^-1 g4^-1)``.

Register states are complex vectors of length ``d ** n_links``; link 0 is the
slowest-varying digit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import expm_multiply

from .group_core import FiniteGroup

MAX_QUBITS_WORTH = 16
MAX_DENSE_DIM = 4096


class TransferMatrixError(ArithmeticError):
    """The electric transfer matrix has a non-positive eigenvalue."""


class DimensionError(ValueError):
    """Register too large for the requested dense operation."""


@dataclass(frozen=True)
class ModelParams:
    """Couplings in lattice units (``a = a_t = 1`` by default)."""

    lambda_E: float
    lambda_B: float
    a_t: float = 1.0
    a: float = 1.0

    def __post_init__(self):
        if self.lambda_E == 0:
            raise ValueError("lambda_E must be non-zero")
        if self.a_t <= 0 or self.a <= 0:
            raise ValueError("lattice spacings must be positive")


@dataclass(frozen=True)
class LatticeGeometry:
    """Links and oriented plaquettes.

    Each plaquette ``(l1, l2, l3, l4)`` stands for ``tr[U_l1 U_l2 U_l3^+ U_l4^+]``.
    ``link_ends`` optionally records ``(start_vertex, end_vertex)`` per link and
    is only needed for gauge transformations.
    """

    n_links: int
    plaquettes: tuple[tuple[int, int, int, int], ...]
    link_ends: tuple[tuple[int, int], ...] | None = None

    def __post_init__(self):
        plaqs = tuple(tuple(int(x) for x in p) for p in self.plaquettes)
        for p in plaqs:
            if len(p) != 4:
                raise ValueError(f"plaquette {p} must have four links")
            if len(set(p)) != 4:
                raise ValueError(f"plaquette {p} has repeated links")
            if min(p) < 0 or max(p) >= self.n_links:
                raise ValueError(f"plaquette {p} references a link outside 0..{self.n_links - 1}")
        object.__setattr__(self, "plaquettes", plaqs)
        if self.link_ends is not None:
            ends = tuple((int(a), int(b)) for a, b in self.link_ends)
            if len(ends) != self.n_links:
                raise ValueError("link_ends must list one (start, end) pair per link")
            object.__setattr__(self, "link_ends", ends)

    @property
    def vertices(self) -> list[int]:
        if self.link_ends is None:
            return []
        return sorted({v for e in self.link_ends for v in e})

    def to_dict(self) -> dict:
        return {"n_links": self.n_links, "plaquettes": [list(p) for p in self.plaquettes],
                "link_ends": None if self.link_ends is None else [list(e) for e in self.link_ends]}

    @classmethod
    def from_dict(cls, data: dict) -> "LatticeGeometry":
        ends = data.get("link_ends")
        return cls(n_links=int(data["n_links"]), plaquettes=tuple(tuple(p) for p in data["plaquettes"]),
                   link_ends=None if ends is None else tuple(tuple(e) for e in ends))


def single_plaquette() -> LatticeGeometry:
    # v0 -l0-> v1 -l1-> v2 <-l2- v3 <-l3- v0 : tr[U0 U1 U2^+ U3^+]
    return LatticeGeometry(n_links=4, plaquettes=((0, 1, 2, 3),),
                           link_ends=((0, 1), (1, 2), (3, 2), (0, 3)))


# ---------------------------------------------------------------------------
# register helpers
# ---------------------------------------------------------------------------

def register_dim(d: int, n_links: int) -> int:
    return d ** n_links


def basis_index(config, d: int) -> int:
    """Flat index of the basis state ``|g_0, g_1, ...>`` (link 0 most significant)."""
    idx = 0
    for g in config:
        idx = idx * d + int(g)
    return idx


def basis_state(config, d: int) -> np.ndarray:
    psi = np.zeros(d ** len(config), dtype=complex)
    psi[basis_index(config, d)] = 1.0
    return psi


def configurations(d: int, n_links: int) -> np.ndarray:
    """``(d**n, n)`` array of link labels for every basis state, in index order."""
    grids = np.indices((d,) * n_links).reshape(n_links, -1)
    return grids.T.copy()


def apply_link_operator(psi: np.ndarray, op: np.ndarray, link: int, d: int, n_links: int) -> np.ndarray:
    """Apply a ``d x d`` matrix to one link of a register state."""
    t = psi.reshape((d,) * n_links)
    t = np.tensordot(op, t, axes=([1], [link]))
    return np.moveaxis(t, 0, link).reshape(-1)


def apply_two_link_operator(psi: np.ndarray, op: np.ndarray, links: tuple[int, int], d: int,
                            n_links: int) -> np.ndarray:
    """Apply a ``d^2 x d^2`` matrix on ``links = (a, b)``; ``a`` is the slow index of ``op``."""
    a, b = links
    if a == b:
        raise ValueError("two-link operator needs distinct links")
    t = psi.reshape((d,) * n_links)
    op4 = op.reshape(d, d, d, d)
    t = np.tensordot(op4, t, axes=([2, 3], [a, b]))
    return np.moveaxis(t, [0, 1], [a, b]).reshape(-1)


def check_dimension(d: int, n_links: int) -> int:
    if n_links * math.log2(d) > MAX_QUBITS_WORTH + 1e-9:
        raise DimensionError(f"{n_links} links of dimension {d} exceed the {MAX_QUBITS_WORTH}-qubit guard")
    return d ** n_links


# ---------------------------------------------------------------------------
# electric and magnetic building blocks
# ---------------------------------------------------------------------------

def electric_transfer_matrix(group: FiniteGroup, params: ModelParams) -> np.ndarray:
    c = group.cayley
    # element g' g^-1 for every (g', g)
    quotient = c[:, group.inverse]
    return np.exp((2.0 / (params.lambda_E * params.a_t)) * group.char_fund[quotient])


def _transfer_spectrum(group: FiniteGroup, params: ModelParams) -> tuple[np.ndarray, np.ndarray]:
    tmat = electric_transfer_matrix(group, params)
    if not np.allclose(tmat, tmat.T, atol=1e-12 * np.abs(tmat).max()):
        raise TransferMatrixError("transfer matrix is not symmetric")
    evals, evecs = np.linalg.eigh(tmat)
    if evals.min() <= 1e-14:
        raise TransferMatrixError(
            f"transfer matrix eigenvalue {evals.min():.3e} is not positive; log T undefined")
    return evals, evecs


def electric_hamiltonian(group: FiniteGroup, params: ModelParams) -> np.ndarray:
    """Single-link ``h_E = -log T`` (real symmetric)."""
    evals, evecs = _transfer_spectrum(group, params)
    return -(evecs * np.log(evals)) @ evecs.T


def electric_gate(group: FiniteGroup, params: ModelParams, dt: float) -> np.ndarray:
    """``U_E(dt) = exp(i dt log T)``."""
    evals, evecs = _transfer_spectrum(group, params)
    return (evecs * np.exp(1j * dt * np.log(evals))) @ evecs.T


def magnetic_phase(group: FiniteGroup, params: ModelParams, g: int, dt: float) -> complex:
    """``f_B(g) = exp(-2 i lambda_B chi(g) dt)``."""
    return complex(np.exp(-2j * params.lambda_B * group.char_fund[g] * dt))


def magnetic_gate(group: FiniteGroup, params: ModelParams, dt: float) -> np.ndarray:
    """Diagonal single-qudit gate ``diag(f_B(g, dt))``."""
    return np.diag(np.exp(-2j * params.lambda_B * group.char_fund * dt))


def plaquette_holonomy(group: FiniteGroup, configs: np.ndarray, plaquette) -> np.ndarray:
    """Element ``g1 g2 g3^-1 g4^-1`` for each row of ``configs``."""
    c, inv = group.cayley, group.inverse
    l1, l2, l3, l4 = plaquette
    x = c[configs[:, l1], configs[:, l2]]
    x = c[x, inv[configs[:, l3]]]
    return c[x, inv[configs[:, l4]]]


def magnetic_diagonal(group: FiniteGroup, params: ModelParams, geom: LatticeGeometry) -> np.ndarray:
    """Diagonal of ``H_B`` over the register basis."""
    check_dimension(group.order, geom.n_links)
    configs = configurations(group.order, geom.n_links)
    out = np.zeros(len(configs))
    for p in geom.plaquettes:
        out += 2.0 * params.lambda_B * group.char_fund[plaquette_holonomy(group, configs, p)]
    return out


def _embed(op: np.ndarray, link: int, d: int, n_links: int, sparse: bool):
    left = d ** link
    right = d ** (n_links - link - 1)
    if sparse:
        return sp.kron(sp.kron(sp.identity(left, format="csr"), sp.csr_matrix(op)),
                       sp.identity(right, format="csr"), format="csr")
    return np.kron(np.kron(np.eye(left), op), np.eye(right))


def exact_hamiltonian(group: FiniteGroup, params: ModelParams, geom: LatticeGeometry,
                      sparse: bool = False):
    """Full register Hamiltonian ``sum_l h_E(l) + H_B``.

    Returns a dense real symmetric array, or a CSR matrix when ``sparse`` is
    set.  Dense output is limited to dimension 4096.
    """
    d = group.order
    dim = check_dimension(d, geom.n_links)
    if not sparse and dim > MAX_DENSE_DIM:
        raise DimensionError(f"dense Hamiltonian of dimension {dim} exceeds {MAX_DENSE_DIM}; use sparse=True")
    h_e = electric_hamiltonian(group, params)
    diag = magnetic_diagonal(group, params, geom)
    if sparse:
        ham = sp.diags(diag, format="csr")
        for link in range(geom.n_links):
            ham = ham + _embed(h_e, link, d, geom.n_links, sparse=True)
        return ham.tocsr()
    ham = np.diag(diag)
    for link in range(geom.n_links):
        ham += _embed(h_e, link, d, geom.n_links, sparse=False)
    return ham


@dataclass
class SpectralPropagator:
    """Cached eigendecomposition of a dense Hermitian ``H`` for repeated ``exp(-iHt)``."""

    hamiltonian: np.ndarray
    evals: np.ndarray = field(init=False, repr=False)
    evecs: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        h = np.asarray(self.hamiltonian)
        if h.ndim != 2 or h.shape[0] != h.shape[1]:
            raise ValueError("Hamiltonian must be square")
        if not np.allclose(h, h.conj().T, atol=1e-10):
            raise ValueError("Hamiltonian is not Hermitian")
        self.evals, self.evecs = np.linalg.eigh(h)

    @property
    def dim(self) -> int:
        return len(self.evals)

    def evolve(self, psi0: np.ndarray, t: float) -> np.ndarray:
        psi0 = np.asarray(psi0, dtype=complex)
        if psi0.shape != (self.dim,):
            raise ValueError(f"state of length {psi0.shape} does not match dimension {self.dim}")
        coeff = self.evecs.conj().T @ psi0
        return self.evecs @ (np.exp(-1j * self.evals * t) * coeff)

    def evolve_many(self, psi0: np.ndarray, times) -> np.ndarray:
        coeff = self.evecs.conj().T @ np.asarray(psi0, dtype=complex)
        phases = np.exp(-1j * np.outer(np.asarray(times, dtype=float), self.evals))
        return (phases * coeff) @ self.evecs.T


def exact_evolve(hamiltonian, psi0: np.ndarray, t: float) -> np.ndarray:
    """``exp(-i H t) psi0``.

    ``hamiltonian`` may be a dense array, a :class:`SpectralPropagator` (reused
    eigendecomposition) or a scipy sparse matrix (Krylov action).
    """
    if isinstance(hamiltonian, SpectralPropagator):
        return hamiltonian.evolve(psi0, t)
    if sp.issparse(hamiltonian):
        if hamiltonian.shape[0] != len(psi0):
            raise ValueError("dimension mismatch between Hamiltonian and state")
        return expm_multiply(-1j * t * hamiltonian, np.asarray(psi0, dtype=complex))
    return SpectralPropagator(np.asarray(hamiltonian)).evolve(psi0, t)


# ---------------------------------------------------------------------------
# observables and gauge transformations
# ---------------------------------------------------------------------------

def observables(state: np.ndarray, group: FiniteGroup, params: ModelParams,
                geom: LatticeGeometry) -> dict[str, float]:
    """Norm-corrected electric and magnetic energies plus the raw norm."""
    d, n = group.order, geom.n_links
    psi = np.asarray(state, dtype=complex)
    if psi.shape != (d ** n,):
        raise ValueError(f"state length {psi.shape} does not match {d}**{n}")
    norm = float(np.vdot(psi, psi).real)
    if norm <= 0.0:
        raise ValueError("zero-norm state")
    h_e = electric_hamiltonian(group, params)
    e_energy = 0.0
    for link in range(n):
        e_energy += np.vdot(psi, apply_link_operator(psi, h_e, link, d, n)).real
    b_energy = float(np.dot(np.abs(psi) ** 2, magnetic_diagonal(group, params, geom)))
    return {"E_energy": float(e_energy) / norm, "B_energy": b_energy / norm, "norm": norm}


def gauge_transformation(group: FiniteGroup, geom: LatticeGeometry, vertex: int, h: int) -> np.ndarray:
    """Index permutation implementing the gauge transformation ``h`` at ``vertex``.

    Links starting at the vertex are left-multiplied by ``h``; links ending
    there are right-multiplied by ``h^-1``.  Returns ``perm`` with
    ``(G psi)[perm[i]] = psi[i]``.
    """
    if geom.link_ends is None:
        raise ValueError("geometry has no link_ends; gauge transformations undefined")
    d, n = group.order, geom.n_links
    configs = configurations(d, n)
    new = configs.copy()
    h_inv = group.inverse[h]
    for link, (start, end) in enumerate(geom.link_ends):
        if start == vertex:
            new[:, link] = group.cayley[h, new[:, link]]
        if end == vertex:
            new[:, link] = group.cayley[new[:, link], h_inv]
    weights = d ** np.arange(n - 1, -1, -1)
    return new @ weights


def apply_gauge_transformation(psi: np.ndarray, perm: np.ndarray) -> np.ndarray:
    out = np.empty_like(psi)
    out[perm] = psi
    return out
