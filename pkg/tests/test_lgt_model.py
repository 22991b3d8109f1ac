"""Kogut-Susskind model on a single plaquette against brute-force oracles."""

from __future__ import annotations

import itertools

import numpy as np
import pytest
import scipy.linalg as sla
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import random_state, su2_q8
from lgtq.group_core import make_cyclic, make_q8
from lgtq.lgt_model import (DimensionError, LatticeGeometry, ModelParams, SpectralPropagator,
                            TransferMatrixError, apply_gauge_transformation, apply_link_operator, basis_index,
                            basis_state, check_dimension, configurations, electric_gate,
                            electric_hamiltonian, electric_transfer_matrix, exact_evolve, exact_hamiltonian,
                            gauge_transformation, magnetic_diagonal, magnetic_gate, observables,
                            single_plaquette)

PARAMS = ModelParams(lambda_E=2.88, lambda_B=1.0)


def test_transfer_matrix_entries(q8):
    t = electric_transfer_matrix(q8, PARAMS)
    for gp, g in itertools.product(range(8), repeat=2):
        x = q8.cayley[gp, q8.inverse[g]]
        assert t[gp, g] == pytest.approx(np.exp(2 * q8.char_fund[x] / 2.88), rel=1e-14)


def test_electric_gate_matches_matrix_log(q8):
    t = electric_transfer_matrix(q8, PARAMS)
    dt = 0.37
    oracle = sla.expm(1j * dt * sla.logm(t))
    assert np.allclose(electric_gate(q8, PARAMS, dt), oracle, atol=1e-12)
    assert np.allclose(electric_hamiltonian(q8, PARAMS), -sla.logm(t).real, atol=1e-12)


@given(dt=st.floats(-2.0, 2.0))
@settings(max_examples=25, deadline=None)
def test_electric_gate_unitary_and_group_property(dt):
    q8 = make_q8()
    u = electric_gate(q8, PARAMS, dt)
    assert np.allclose(u.conj().T @ u, np.eye(8), atol=1e-12)
    assert np.allclose(electric_gate(q8, PARAMS, dt / 2) @ electric_gate(q8, PARAMS, dt / 2), u, atol=1e-12)


def test_transfer_matrix_error_when_not_positive(q8):
    with pytest.raises(TransferMatrixError):
        electric_hamiltonian(q8, ModelParams(lambda_E=-2.88, lambda_B=1.0))


def test_magnetic_gate_phases(q8):
    dt = 0.1
    diag = np.diag(magnetic_gate(q8, PARAMS, dt))
    assert diag[0] == pytest.approx(np.exp(-4j * dt))
    assert diag[1] == pytest.approx(np.exp(4j * dt))
    assert np.allclose(diag[2:], 1.0)


def test_magnetic_diagonal_bruteforce(q8):
    """Oracle: trace of SU(2) products for every configuration."""
    mats = su2_q8()
    diag = magnetic_diagonal(q8, PARAMS, single_plaquette())
    for idx, (g1, g2, g3, g4) in enumerate(itertools.product(range(8), repeat=4)):
        u = mats[g1] @ mats[g2] @ mats[g3].conj().T @ mats[g4].conj().T
        assert diag[idx] == pytest.approx(2 * np.trace(u).real, abs=1e-12)


def test_register_helpers():
    assert basis_index([1, 2, 3, 4], 8) == ((1 * 8 + 2) * 8 + 3) * 8 + 4
    cfgs = configurations(3, 2)
    assert cfgs.shape == (9, 2) and list(cfgs[5]) == [1, 2]
    psi = basis_state([0, 1], 2)
    assert psi[1] == 1


def test_apply_link_operator_matches_kron(rng):
    d, n = 3, 3
    op = rng.normal(size=(d, d))
    psi = random_state(rng, d ** n)
    for link in range(n):
        full = np.kron(np.kron(np.eye(d ** link), op), np.eye(d ** (n - link - 1)))
        assert np.allclose(apply_link_operator(psi, op, link, d, n), full @ psi)


def test_exact_hamiltonian_sparse_equals_dense():
    z3 = make_cyclic(3)
    dense = exact_hamiltonian(z3, PARAMS, single_plaquette())
    sparse = exact_hamiltonian(z3, PARAMS, single_plaquette(), sparse=True)
    assert np.allclose(sparse.toarray(), dense, atol=1e-13)
    assert np.allclose(dense, dense.T)


def test_exact_evolution_backends_agree(rng):
    z3 = make_cyclic(3)
    h = exact_hamiltonian(z3, PARAMS, single_plaquette())
    psi0 = random_state(rng, 81)
    ref = sla.expm(-1j * 0.7 * h) @ psi0
    assert np.allclose(exact_evolve(h, psi0, 0.7), ref, atol=1e-12)
    assert np.allclose(exact_evolve(exact_hamiltonian(z3, PARAMS, single_plaquette(), sparse=True), psi0, 0.7),
                       ref, atol=1e-10)
    prop = SpectralPropagator(h)
    assert np.allclose(prop.evolve_many(psi0, [0.0, 0.7])[1], ref, atol=1e-12)


def test_spectral_propagator_rejects_non_hermitian():
    with pytest.raises(ValueError):
        SpectralPropagator(np.array([[0, 1], [0, 0]]))


@pytest.mark.parametrize("vertex, h", [(0, 2), (1, 4), (2, 7), (3, 1)])
def test_gauge_invariance(q8, vertex, h):
    geom = single_plaquette()
    perm = gauge_transformation(q8, geom, vertex, h)
    assert sorted(perm) == list(range(8 ** 4))
    diag = magnetic_diagonal(q8, PARAMS, geom)
    moved = np.empty_like(diag)
    moved[perm] = diag
    assert np.allclose(moved, diag)


def test_gauge_invariance_of_full_hamiltonian():
    z3 = make_cyclic(3)
    geom = single_plaquette()
    h = exact_hamiltonian(z3, PARAMS, geom)
    perm = gauge_transformation(z3, geom, 1, 1)
    g = np.zeros_like(h)
    g[perm, np.arange(len(perm))] = 1.0
    assert np.allclose(g @ h @ g.T, h, atol=1e-12)


def test_apply_gauge_transformation_roundtrip(q8, rng):
    geom = single_plaquette()
    perm = gauge_transformation(q8, geom, 2, 3)
    psi = random_state(rng, 8 ** 4)
    back = gauge_transformation(q8, geom, 2, int(q8.inverse[3]))
    assert np.allclose(apply_gauge_transformation(apply_gauge_transformation(psi, perm), back), psi)


def test_observables_norm_corrected(q8, rng):
    geom = single_plaquette()
    psi = random_state(rng, 8 ** 4)
    a = observables(psi, q8, PARAMS, geom)
    b = observables(0.5 * psi, q8, PARAMS, geom)
    assert b["norm"] == pytest.approx(0.25 * a["norm"])
    assert b["E_energy"] == pytest.approx(a["E_energy"])
    assert b["B_energy"] == pytest.approx(a["B_energy"])


def test_identity_state_energies(q8):
    obs = observables(basis_state([0, 0, 0, 0], 8), q8, PARAMS, single_plaquette())
    assert obs["B_energy"] == pytest.approx(4.0)
    assert obs["E_energy"] == pytest.approx(4 * electric_hamiltonian(q8, PARAMS)[0, 0])


def test_dimension_guard():
    with pytest.raises(DimensionError):
        check_dimension(8, 6)
    assert check_dimension(8, 4) == 4096


@pytest.mark.parametrize("plaq", [(0, 0, 1, 2), (0, 1, 2, 9), (0, 1, 2)])
def test_geometry_validation(plaq):
    with pytest.raises(ValueError):
        LatticeGeometry(n_links=4, plaquettes=(plaq,))


def test_geometry_dict_roundtrip():
    geom = single_plaquette()
    assert LatticeGeometry.from_dict(geom.to_dict()) == geom
    assert geom.vertices == [0, 1, 2, 3]


def test_model_params_validation():
    with pytest.raises(ValueError):
        ModelParams(lambda_E=0.0, lambda_B=1.0)
    with pytest.raises(ValueError):
        ModelParams(lambda_E=1.0, lambda_B=1.0, a_t=0.0)
