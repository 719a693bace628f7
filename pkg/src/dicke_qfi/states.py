"""Reduced density matrices of the ground state and their spectral form.

The boson-major basis ordering makes both partial traces plain reshaped
matrix products.  Spectral decompositions drop eigenvalues at or below a
weight floor and report the discarded mass so downstream QFI errors can
be bounded.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import SolverError
from .model import Space
from .solver import GroundState

#: eigenvalues at or below this floor are dropped from spectral decompositions
DEFAULT_WEIGHT_FLOOR = 1e-12

_TRACE_TOL = 1e-8
_HERM_TOL = 1e-10


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian positive-semidefinite matrix with unit trace on one subsystem."""

    matrix: np.ndarray
    space: Space
    trace: float = field(init=False)

    def __post_init__(self) -> None:
        mat = np.asarray(self.matrix)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValueError("density matrix must be square")
        if np.max(np.abs(mat - mat.conj().T)) > _HERM_TOL:
            raise ValueError("density matrix is not Hermitian")
        tr = float(np.trace(mat).real)
        if abs(tr - 1.0) > _TRACE_TOL:
            raise ValueError(f"density matrix trace {tr} is not 1")
        object.__setattr__(self, "matrix", mat)
        object.__setattr__(self, "trace", tr)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenvalues above the weight floor, descending, with matching eigenvectors."""

    weights: np.ndarray
    vectors: np.ndarray  # column k is the eigenvector of weights[k]
    weight_floor: float
    discarded_mass: float

    @property
    def dim(self) -> int:
        return self.vectors.shape[0]

    @property
    def rank(self) -> int:
        return self.weights.size


def _amplitude_grid(gs: GroundState) -> np.ndarray:
    indexer = gs.indexer
    return np.asarray(gs.vector).reshape(indexer.boson_dim, indexer.spin_dim)


def partial_trace_atoms(gs: GroundState) -> DensityMatrix:
    """Field state rho_B: (rho_B)_{n,n'} = sum_m psi(n,m) psi*(n',m)."""
    psi = _amplitude_grid(gs)
    rho = psi @ psi.conj().T
    rho = (rho + rho.conj().T) / 2
    return DensityMatrix(rho, "boson")


def partial_trace_field(gs: GroundState) -> DensityMatrix:
    """Atomic state rho_A: (rho_A)_{m,m'} = sum_n psi(n,m) psi*(n,m')."""
    psi = _amplitude_grid(gs)
    rho = psi.T @ psi.conj()
    rho = (rho + rho.conj().T) / 2
    return DensityMatrix(rho, "spin")


def spectral_decompose(
    rho: DensityMatrix, weight_floor: float = DEFAULT_WEIGHT_FLOOR
) -> SpectralDecomposition:
    """Eigenpairs of a density matrix with weights above ``weight_floor``."""
    if weight_floor < 0:
        raise ValueError("weight_floor must be >= 0")
    try:
        evals, evecs = scipy.linalg.eigh(rho.matrix)
    except scipy.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise SolverError(f"density-matrix eigensolver failed: {exc}") from exc
    order = np.argsort(evals)[::-1]
    evals = evals[order]
    evecs = evecs[:, order]
    keep = evals > weight_floor
    discarded = float(np.sum(evals[~keep]))
    return SpectralDecomposition(
        weights=evals[keep].copy(),
        vectors=evecs[:, keep].copy(),
        weight_floor=float(weight_floor),
        discarded_mass=discarded,
    )
