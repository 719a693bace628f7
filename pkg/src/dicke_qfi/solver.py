"""Ground state of the parity-reduced Dicke Hamiltonian with cutoff control.

The finite-N ground state lives in the even n+m+j sector, so only that
block is diagonalized; this halves the matrix and avoids the near-degenerate
even/odd mixing a full-space eigensolver produces deep in the superradiant
regime.  Cutoff convergence doubles n_cutoff until the Fock tail population
and the energy shift across one doubling both drop below tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import ConvergenceError, SolverError
from .model import BasisIndexer, HermitianOperator, ModelParams, build_hamiltonian_block, parity_block_indices

#: default tolerance for both the tail-population and energy-shift tests
DEFAULT_TOL = 1e-10

#: largest Fock cutoff converge_cutoff will attempt
HARD_CAP = 2**14


@dataclass(frozen=True)
class CutoffStep:
    """One solve of the cutoff-doubling trajectory."""

    n_cutoff: int
    energy: float
    tail_population: float


@dataclass(frozen=True)
class ConvergenceInfo:
    """Tail population of the final state and energy shift over the last doubling."""

    tail_population: float
    energy_shift: float | None
    steps: tuple[CutoffStep, ...] = ()


@dataclass(frozen=True)
class GroundState:
    """Ground energy and unit-norm state vector on the full product basis."""

    energy: float
    vector: np.ndarray
    params: ModelParams
    n_cutoff: int
    convergence: ConvergenceInfo

    @property
    def indexer(self) -> BasisIndexer:
        return BasisIndexer(self.n_cutoff, self.params.n_atoms)


def tail_population(vector: np.ndarray, indexer: BasisIndexer) -> float:
    """Total probability in the top 10% of Fock levels."""
    start = math.ceil(0.9 * indexer.boson_dim)
    psi = np.asarray(vector).reshape(indexer.boson_dim, indexer.spin_dim)
    return float(np.sum(np.abs(psi[start:, :]) ** 2))


def ground_state(params: ModelParams, n_cutoff: int) -> GroundState:
    """Lowest eigenpair of H restricted to the even-parity block.

    The block eigenvector is embedded back into the product basis and
    phase-fixed so the largest-magnitude amplitude is real positive.
    """
    if n_cutoff < 1:
        raise ValueError("n_cutoff must be >= 1")
    indexer = BasisIndexer(n_cutoff, params.n_atoms)
    even, _ = parity_block_indices(indexer)
    block = build_hamiltonian_block(params, indexer, even)
    try:
        energies, vecs = scipy.linalg.eigh(block, subset_by_index=[0, 0])
    except scipy.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise SolverError(f"eigensolver failed at n_cutoff={n_cutoff}: {exc}") from exc
    vector = np.zeros(indexer.dimension, dtype=complex)
    vector[even] = vecs[:, 0]
    vector /= np.linalg.norm(vector)
    pivot = int(np.argmax(np.abs(vector)))
    phase = vector[pivot] / abs(vector[pivot])
    vector = vector * phase.conjugate()
    tail = tail_population(vector, indexer)
    return GroundState(
        energy=float(energies[0]),
        vector=vector,
        params=params,
        n_cutoff=n_cutoff,
        convergence=ConvergenceInfo(tail_population=tail, energy_shift=None),
    )


def initial_cutoff(params: ModelParams) -> int:
    """Doubling start point: max(20, ceil(8*lam^2*N/omega^2) + 10).

    The mean-field boson number scales as lam^2*N/omega^2, so 8x that plus
    margin comfortably covers the fluctuations; the doubling loop makes this
    heuristic safe rather than load-bearing.
    """
    scale = 8 * params.lam**2 * params.n_atoms / params.omega**2
    return max(20, math.ceil(scale) + 10)


def converge_cutoff(
    params: ModelParams,
    tol: float = DEFAULT_TOL,
    *,
    n_start: int | None = None,
    hard_cap: int | None = None,
) -> tuple[int, GroundState]:
    """Double the Fock cutoff until the ground state is converged.

    Convergence requires tail_population < tol and an energy shift below
    tol * max(1, |E|) across the last doubling.  A state whose tail is
    exactly zero (decoupled limit) is accepted at the starting cutoff.
    Raises ConvergenceError if the cutoff would exceed ``hard_cap``
    (module-level HARD_CAP when not given).
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if hard_cap is None:
        hard_cap = HARD_CAP
    n_cutoff = initial_cutoff(params) if n_start is None else int(n_start)
    if n_cutoff < 1:
        raise ValueError("starting cutoff must be >= 1")

    gs = ground_state(params, n_cutoff)
    steps = [CutoffStep(n_cutoff, gs.energy, gs.convergence.tail_population)]
    if gs.convergence.tail_population == 0.0:
        info = ConvergenceInfo(0.0, None, tuple(steps))
        return n_cutoff, GroundState(gs.energy, gs.vector, params, n_cutoff, info)

    while True:
        doubled = 2 * n_cutoff
        if doubled > hard_cap:
            raise ConvergenceError(
                f"Fock cutoff would exceed the hard cap {hard_cap} "
                f"(lam={params.lam}, N={params.n_atoms}, tol={tol})",
                steps=steps,
            )
        nxt = ground_state(params, doubled)
        shift = abs(nxt.energy - gs.energy)
        steps.append(CutoffStep(doubled, nxt.energy, nxt.convergence.tail_population))
        n_cutoff, gs = doubled, nxt
        if gs.convergence.tail_population < tol and shift < tol * max(1.0, abs(gs.energy)):
            info = ConvergenceInfo(gs.convergence.tail_population, shift, tuple(steps))
            return n_cutoff, GroundState(gs.energy, gs.vector, params, n_cutoff, info)


def expectation(state, op) -> complex:
    """<psi|A|psi> for a state vector or Tr(rho A) for a density matrix.

    Accepts a GroundState, a DensityMatrix, or a bare ndarray (1-D vector /
    2-D density matrix); ``op`` may be a HermitianOperator or a bare matrix.
    The full complex value is returned so callers can monitor the imaginary
    part as a diagnostic.
    """
    matrix = op.matrix if isinstance(op, HermitianOperator) else np.asarray(op)
    if hasattr(state, "vector"):
        array = np.asarray(state.vector)
    elif hasattr(state, "matrix"):
        array = np.asarray(state.matrix)
    else:
        array = np.asarray(state)
    if array.ndim == 1:
        if array.shape[0] != matrix.shape[0]:
            raise ValueError("state and operator dimensions do not match")
        return complex(np.vdot(array, matrix @ array))
    if array.ndim == 2:
        if array.shape != matrix.shape:
            raise ValueError("state and operator dimensions do not match")
        return complex(np.trace(array @ matrix))
    raise ValueError("state must be a vector or a density matrix")
