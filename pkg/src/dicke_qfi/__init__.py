"""Ground-state metrology of the single-mode Dicke model.

Exact diagonalization of N two-level atoms collectively coupled to one
bosonic mode in a truncated Fock space, reduced-state quantum Fisher
information and squeezing for both subsystems, Husimi quasi-probability
distributions, and the closed-form thermodynamic-limit observables with
their critical scaling at the superradiant transition.
"""

__version__ = "0.1.0"

from .errors import ConvergenceError, SolverError
from .model import (
    BasisIndexer,
    HermitianOperator,
    ModelParams,
    build_boson_ops,
    build_hamiltonian,
    build_parity,
    build_spin_ops,
    parity_block_indices,
)
from .solver import GroundState, converge_cutoff, expectation, ground_state
from .states import (
    DensityMatrix,
    SpectralDecomposition,
    partial_trace_atoms,
    partial_trace_field,
    spectral_decompose,
)
from .metrology import (
    QfiResult,
    SqueezingResult,
    husimi_atoms,
    husimi_field,
    optimal_quadrature,
    qfi_atoms,
    qfi_field,
    qfi_mixed,
    quadrature_variance,
    sld_qfi_oracle,
    spin_squeezing_xi2,
    spin_variance,
)
from .thermo import (
    ThermoPoint,
    critical_scaling_probe,
    nbar_thermo,
    qfi_atoms_thermo,
    qfi_field_scaled_limit,
    qfi_field_thermo,
    quad_variance_thermo,
    thermo_point,
    ultrastrong_reference,
    xi2_thermo,
)

__all__ = [
    "BasisIndexer",
    "ConvergenceError",
    "DensityMatrix",
    "GroundState",
    "HermitianOperator",
    "ModelParams",
    "QfiResult",
    "SolverError",
    "SpectralDecomposition",
    "SqueezingResult",
    "ThermoPoint",
    "build_boson_ops",
    "build_hamiltonian",
    "build_parity",
    "build_spin_ops",
    "converge_cutoff",
    "critical_scaling_probe",
    "expectation",
    "ground_state",
    "husimi_atoms",
    "husimi_field",
    "nbar_thermo",
    "optimal_quadrature",
    "parity_block_indices",
    "partial_trace_atoms",
    "partial_trace_field",
    "qfi_atoms",
    "qfi_atoms_thermo",
    "qfi_field",
    "qfi_field_scaled_limit",
    "qfi_field_thermo",
    "qfi_mixed",
    "quad_variance_thermo",
    "quadrature_variance",
    "sld_qfi_oracle",
    "spectral_decompose",
    "spin_squeezing_xi2",
    "spin_variance",
    "thermo_point",
    "ultrastrong_reference",
    "xi2_thermo",
]
