"""Native qudit circuits against dense oracles."""

from __future__ import annotations

import itertools

import numpy as np
import pytest
import scipy.linalg as sla
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import random_state
from lgtq.circuit_engine import (CPERM, Circuit, GateOp, TrotterConfig, apply, controlled_permutation,
                                 duration_estimate, entangling_blocks, plaquette_circuit, run_quench,
                                 theta_circuit, theta_pulse_pairs, trotter_infidelity, trotter_step_circuit)
from lgtq.group_core import make_cyclic, make_q8, right_regular
from lgtq.lgt_model import (ModelParams, SpectralPropagator, basis_index, basis_state, electric_gate,
                            exact_hamiltonian, magnetic_diagonal, single_plaquette)
from lgtq.pulse_hardware.bank import GateBank, cperm_template, ideal_theta_bank
from lgtq.pulse_hardware.params import HardwareParams

PARAMS = ModelParams(lambda_E=2.88, lambda_B=1.0)


@given(gt=st.integers(0, 7), gc=st.integers(0, 7), dagger=st.booleans())
@settings(max_examples=40, deadline=None)
def test_theta_action_on_basis(gt, gc, dagger):
    q8 = make_q8()
    circ = theta_circuit(q8, control=1, target=0, dagger=dagger)
    out = apply(circ, basis_state([gt, gc], 8))
    h = q8.inverse[gc] if dagger else gc
    assert np.allclose(out, basis_state([q8.cayley[gt, h], gc], 8))


def test_theta_structure(q8):
    circ = theta_circuit(q8, 1, 0)
    assert len(circ) == 8 and circ.n_entangling == 8
    assert [op.control_element for op in circ] == list(range(8))
    with pytest.raises(ValueError):
        theta_circuit(q8, 0, 0)


def test_gate_operator_matches_application(q8, rng):
    op = controlled_permutation(q8, 0, 1, 3, 5)
    psi = random_state(rng, 64)
    circ = Circuit(8, 2, [op])
    assert np.allclose(apply(circ, psi), op.operator() @ psi)
    # reversed link order exercises the other tensor axis
    op2 = controlled_permutation(q8, 1, 0, 3, 5)
    out = apply(Circuit(8, 2, [op2]), psi).reshape(8, 8)
    ref = (op.operator() @ psi.reshape(8, 8).T.reshape(-1)).reshape(8, 8).T
    assert np.allclose(out, ref)


def test_plaquette_circuit_equals_diagonal_all_basis_states(q8):
    dt = 0.3
    circ = plaquette_circuit(q8, PARAMS, dt, (0, 1, 2, 3))
    phases = np.exp(-1j * dt * magnetic_diagonal(q8, PARAMS, single_plaquette()))
    for start in range(0, 4096, 512):
        cols = np.eye(4096, dtype=complex)[:, start:start + 512]
        out = apply(circ, cols)
        assert np.max(np.abs(out - phases[:, None] * cols)) < 1e-10


@pytest.mark.parametrize("plaq", [(1, 2, 3, 0), (3, 0, 2, 1)])
def test_plaquette_circuit_other_orientations(q8, plaq, rng):
    from lgtq.lgt_model import LatticeGeometry

    geom = LatticeGeometry(4, (plaq,))
    dt = 0.2
    psi = random_state(rng, 4096)
    ref = np.exp(-1j * dt * magnetic_diagonal(q8, PARAMS, geom)) * psi
    assert np.allclose(apply(plaquette_circuit(q8, PARAMS, dt, plaq), psi), ref, atol=1e-12)


def test_trotter_step_matches_split_operator():
    z3 = make_cyclic(3)
    geom = single_plaquette()
    dt = 0.25
    he = electric_gate(z3, PARAMS, dt / 2)
    ue = he
    for _ in range(3):
        ue = np.kron(ue, he)
    ub = np.diag(np.exp(-1j * dt * magnetic_diagonal(z3, PARAMS, geom)))
    oracle = ue @ ub @ ue
    circ = trotter_step_circuit(z3, PARAMS, geom, TrotterConfig(dt=dt, order=2))
    assert np.allclose(apply(circ, np.eye(81, dtype=complex)), oracle, atol=1e-12)


@pytest.mark.parametrize("order, expected", [(1, 2.0), (2, 4.0)])
def test_trotter_error_scaling_small_group(order, expected):
    z3 = make_cyclic(3)
    geom = single_plaquette()
    prop = SpectralPropagator(exact_hamiltonian(z3, PARAMS, geom))
    psi0 = basis_state([0, 0, 0, 0], 3)
    dts = np.array([1 / 8, 1 / 16, 1 / 32])
    eps = [trotter_infidelity(z3, PARAMS, geom, dt, 1.0, order, psi0, prop) for dt in dts]
    slope = np.polyfit(np.log(dts), np.log(eps), 1)[0]
    assert abs(slope - expected) < 0.3


def test_trotter_infidelity_requires_commensurate_time(q8):
    z2 = make_cyclic(2)
    prop = SpectralPropagator(exact_hamiltonian(z2, PARAMS, single_plaquette()))
    with pytest.raises(ValueError):
        trotter_infidelity(z2, PARAMS, single_plaquette(), 0.3, 1.0, 2, basis_state([0] * 4, 2), prop)


def test_ideal_bank_reproduces_ideal_run(q8, rng):
    circ = plaquette_circuit(q8, PARAMS, 0.1, (0, 1, 2, 3))
    psi = random_state(rng, 4096)
    assert np.allclose(apply(circ, psi, ideal_theta_bank(q8)), apply(circ, psi), atol=1e-12)


def test_faulty_bank_loses_norm(q8):
    bank = ideal_theta_bank(q8)
    key = cperm_template(2, 2)
    bank.matrices[key] = 0.9 * bank.matrices[key]
    psi = np.zeros(64, dtype=complex)
    psi[basis_index([0, 2], 8)] = 1.0
    trace: list = []
    out = apply(theta_circuit(q8, 1, 0), psi, bank, norm_trace=trace)
    assert np.vdot(out, out).real == pytest.approx(0.81)
    assert len(trace) == 8 and trace[-1] == pytest.approx(0.81)


def test_missing_bank_entry_raises(q8):
    with pytest.raises(KeyError):
        apply(theta_circuit(q8, 1, 0), basis_state([0, 1], 8), GateBank())


def test_gate_validation(q8):
    with pytest.raises(ValueError):
        GateOp(kind="single", links=(0,), matrix=np.array([[1, 1], [0, 1]]))
    with pytest.raises(ValueError):
        GateOp(kind=CPERM, links=(0, 0), control_element=0, perm=right_regular(q8, 1))
    with pytest.raises(ValueError):
        Circuit(8, 2).append(controlled_permutation(q8, 0, 2, 0, 1))
    with pytest.raises(ValueError):
        TrotterConfig(dt=0.1, order=3)


def test_run_quench_ideal_keeps_norm_and_tracks(q8, plaquette_propagator):
    cfg = TrotterConfig(dt=1 / 8, order=2, n_steps=8)
    traj = run_quench(q8, PARAMS, single_plaquette(), cfg, basis_state([0] * 4, 8),
                      propagator=plaquette_propagator, with_exact_observables=True)
    assert np.allclose(traj.norm, 1.0)
    assert np.all(1 - traj.fidelity < 1e-3)
    assert traj.exact_E[0] == pytest.approx(traj.E_energy[0])
    lines = traj.to_csv().splitlines()
    assert lines[0] == "step,t,E_energy,B_energy,norm,fidelity" and len(lines) == 10


def test_pulse_simulated_needs_bank(q8, plaquette_propagator):
    with pytest.raises(ValueError):
        run_quench(q8, PARAMS, single_plaquette(), TrotterConfig(dt=0.5, gate_source="pulse_simulated"),
                   basis_state([0] * 4, 8), propagator=plaquette_propagator)


def test_theta_pulse_pairs_and_blocks(q8):
    assert theta_pulse_pairs(theta_circuit(q8, 1, 0)) == 206
    step = trotter_step_circuit(q8, PARAMS, single_plaquette(), TrotterConfig(dt=1 / 3))
    assert len(entangling_blocks(step)) == 6
    assert step.n_entangling == 48


def test_duration_estimate(q8):
    hw = HardwareParams()
    step = trotter_step_circuit(q8, PARAMS, single_plaquette(), TrotterConfig(dt=1 / 3))
    rep = duration_estimate(step, hw)
    assert rep.n_entangling_blocks == 6
    assert rep.dead_time_seconds == pytest.approx(12 * 25e-6)
    assert rep.count_seconds == pytest.approx(rep.count_T * hw.T + rep.dead_time_seconds, rel=1e-12)
    assert rep.count_T <= rep.bound_T
    assert 0.5e-3 <= rep.count_seconds <= 2e-3


def test_batched_and_single_application_agree(q8, rng):
    circ = theta_circuit(q8, 1, 0)
    cols = np.stack([random_state(rng, 64) for _ in range(3)], axis=1)
    out = apply(circ, cols)
    for k in range(3):
        assert np.allclose(out[:, k], apply(circ, cols[:, k]))


def test_electric_layer_is_kron_product(q8):
    z2 = make_cyclic(2)
    geom = single_plaquette()
    dt = 0.4
    circ = trotter_step_circuit(z2, ModelParams(2.0, 0.0), geom, TrotterConfig(dt=dt, order=1))
    u = electric_gate(z2, ModelParams(2.0, 0.0), dt)
    oracle = u
    for _ in range(3):
        oracle = np.kron(oracle, u)
    assert np.allclose(apply(circ, np.eye(16, dtype=complex)), oracle, atol=1e-12)
    # lambda_B = 0 makes the exact evolution the same product
    h = exact_hamiltonian(z2, ModelParams(2.0, 0.0), geom)
    assert np.allclose(sla.expm(-1j * dt * h), oracle, atol=1e-12)


def test_all_controlled_permutations_are_block_permutations(q8):
    for j0, h in itertools.product(range(8), repeat=2):
        m = controlled_permutation(q8, 0, 1, j0, h).operator()
        assert np.allclose(m @ m.conj().T, np.eye(64))
