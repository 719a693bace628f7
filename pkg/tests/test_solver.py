import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from dicke_qfi.errors import ConvergenceError
from dicke_qfi.model import (
    BasisIndexer,
    ModelParams,
    build_boson_ops,
    build_hamiltonian,
    build_parity,
    build_spin_ops,
)
from dicke_qfi.solver import converge_cutoff, expectation, ground_state, initial_cutoff
from dicke_qfi.states import partial_trace_atoms


def _product_op(boson_op, spin_op, indexer):
    return np.kron(boson_op, spin_op)


def test_decoupled_ground_state():
    params = ModelParams(1.0, 1.0, 0.0, 4)
    gs = ground_state(params, 10)
    assert_allclose(gs.energy, -params.omega0 * params.n_atoms / 2, atol=1e-14)
    expected = np.zeros(gs.indexer.dimension)
    expected[0] = 1.0  # |n=0>|j,-j>
    assert_allclose(gs.vector.real, expected, atol=1e-14)
    parity = build_parity(params, gs.indexer)
    assert abs(expectation(gs, parity).real - 1.0) < 1e-12
    assert gs.convergence.tail_population == 0.0


def test_ground_state_norm_and_phase():
    params = ModelParams(1.0, 1.0, 0.6, 3)
    gs = ground_state(params, 24)
    assert abs(np.linalg.norm(gs.vector) - 1.0) < 1e-12
    pivot = np.argmax(np.abs(gs.vector))
    assert gs.vector[pivot].real > 0
    assert abs(gs.vector[pivot].imag) < 1e-14


def test_vanishing_coherence_from_parity():
    params = ModelParams(1.0, 1.0, 0.3, 2)
    gs = ground_state(params, 30)
    indexer = gs.indexer
    b, _ = build_boson_ops(indexer.n_cutoff)
    spin = build_spin_ops(params.n_atoms)
    b_full = _product_op(b, np.eye(indexer.spin_dim), indexer)
    jx_full = _product_op(np.eye(indexer.boson_dim), spin.jx, indexer)
    assert abs(expectation(gs, b_full)) < 1e-10
    assert abs(expectation(gs, jx_full)) < 1e-10


def test_energy_against_full_space_oracle():
    # dense eigensolve at doubled cutoff without any parity reduction
    params = ModelParams(1.0, 1.0, 0.54, 6)
    gs = ground_state(params, 40)
    oracle = np.linalg.eigvalsh(build_hamiltonian(params, BasisIndexer(80, 6)).matrix)[0]
    assert abs(gs.energy - oracle) < 1e-9


def test_variational_monotonicity():
    params = ModelParams(1.0, 1.0, 0.8, 3)
    energies = [ground_state(params, n).energy for n in (10, 20, 40, 80)]
    assert all(e2 <= e1 + 1e-12 for e1, e2 in zip(energies, energies[1:]))


@pytest.mark.parametrize("lam,n_atoms", [(0.2, 2), (0.54, 6), (0.9, 4)])
def test_parity_purity(lam, n_atoms):
    params = ModelParams(1.0, 1.0, lam, n_atoms)
    _, gs = converge_cutoff(params, 1e-10)
    parity = build_parity(params, gs.indexer)
    assert abs(expectation(gs, parity).real - 1.0) < 1e-8


def test_initial_cutoff_heuristic():
    assert initial_cutoff(ModelParams(1.0, 1.0, 0.0, 2)) == 20
    assert initial_cutoff(ModelParams(1.0, 1.0, 0.1, 2)) == 20
    assert initial_cutoff(ModelParams(1.0, 1.0, 1.0, 20)) == 170


def test_converge_decoupled_returns_at_start():
    params = ModelParams(1.0, 1.0, 0.0, 3)
    n_cutoff, gs = converge_cutoff(params, 1e-10)
    assert n_cutoff == 20
    assert gs.convergence.tail_population == 0.0
    assert len(gs.convergence.steps) == 1


def test_converge_records_doubling_trajectory():
    params = ModelParams(1.0, 1.0, 0.5, 4)
    n_cutoff, gs = converge_cutoff(params, 1e-10)
    steps = gs.convergence.steps
    assert steps[-1].n_cutoff == n_cutoff
    assert len(steps) >= 2
    assert gs.convergence.energy_shift is not None
    assert gs.convergence.energy_shift < 1e-10 * max(1.0, abs(gs.energy))
    assert gs.convergence.tail_population < 1e-10


def test_converge_hard_cap_raises_with_steps():
    params = ModelParams(1.0, 1.0, 2.0, 6)  # needs n_cutoff ~ 200
    with pytest.raises(ConvergenceError) as excinfo:
        converge_cutoff(params, 1e-10, n_start=20, hard_cap=40)
    assert len(excinfo.value.steps) >= 1


def test_converged_nbar_stable_under_further_doubling():
    # self-consistency oracle: one more doubling moves nbar by < 1e-8
    params = ModelParams(1.0, 1.0, 1.0, 20)
    n_cutoff, gs = converge_cutoff(params, 1e-10)
    nbar = expectation(partial_trace_atoms(gs), np.diag(np.arange(n_cutoff + 1.0))).real
    gs2 = ground_state(params, 2 * n_cutoff)
    nbar2 = expectation(
        partial_trace_atoms(gs2), np.diag(np.arange(2 * n_cutoff + 1.0))
    ).real
    assert abs(nbar - nbar2) < 1e-8


def test_nbar_scaling_across_phases():
    # below threshold nbar stays O(1); above it grows roughly with N
    def nbar(n_atoms, lam, n_cutoff):
        gs = ground_state(ModelParams(1.0, 1.0, lam, n_atoms), n_cutoff)
        rho = partial_trace_atoms(gs)
        return expectation(rho, np.diag(np.arange(n_cutoff + 1.0))).real

    assert nbar(10, 0.25, 40) < 0.5
    assert nbar(20, 0.25, 40) < 0.5
    low, high = nbar(10, 1.0, 120), nbar(20, 1.0, 240)
    assert high > 1.5 * low


def test_expectation_forms_and_validation():
    params = ModelParams(1.0, 1.0, 0.0, 4)
    gs = ground_state(params, 8)
    spin = build_spin_ops(params.n_atoms)
    jz_full = np.kron(np.eye(gs.indexer.boson_dim), spin.jz)
    assert_allclose(expectation(gs, jz_full).real, -params.n_atoms / 2, atol=1e-13)
    rho = partial_trace_atoms(gs)
    number = np.diag(np.arange(gs.indexer.boson_dim, dtype=float))
    assert abs(expectation(rho, number)) < 1e-14
    with pytest.raises(ValueError):
        expectation(gs, np.eye(3))
    with pytest.raises(ValueError):
        expectation(rho, np.eye(3))


def test_expectation_nbar_against_doubled_cutoff():
    params = ModelParams(1.0, 1.0, 0.54, 20)
    n_cutoff, gs = converge_cutoff(params, 1e-10)
    number = np.diag(np.arange(n_cutoff + 1.0))
    nbar = expectation(partial_trace_atoms(gs), number).real
    gs2 = ground_state(params, 2 * n_cutoff)
    nbar2 = expectation(
        partial_trace_atoms(gs2), np.diag(np.arange(2 * n_cutoff + 1.0))
    ).real
    assert abs(nbar - nbar2) < 1e-8
