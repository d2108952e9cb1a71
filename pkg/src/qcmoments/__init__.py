"""Moment-based ground-state energy estimation for spin-lattice models.

The pipeline: expand powers of a lattice Hamiltonian into Pauli strings,
partition each power's strings into qubit-wise-commuting measurement
groups, evaluate string expectations in a one-parameter pair-product trial
state (exactly or from simulated shots), and turn the resulting moments
into cumulant-corrected ground-state energy estimates — cross-checked
against exact diagonalization at small sizes.
"""

from .engine import (
    MeasurementStore,
    PairProductState,
    apply_damping_noise,
    expectation_exact,
    expectation_statevector,
    expectations_exact,
    expectations_from_counts,
    measure_group,
    pair_product_statevector,
    trial_state,
)
from .ensemble import (
    EnsembleRecord,
    EnsembleResult,
    ExpectationBasis,
    build_expectation_basis,
    recycle_estimate,
    run_ensemble,
)
from .errors import (
    ConvergenceError,
    EstimateUndefinedError,
    ImaginaryResidueError,
    IncompatibleMemberError,
    MissingExpectationError,
    QcmError,
    QubitMismatchError,
    ResourceGuardError,
)
from .estimator import (
    BootstrapSummary,
    CumulantVector,
    EnergyEstimate,
    MomentVector,
    assemble_moments,
    bootstrap_estimates,
    cumulants,
    infinum_estimate,
    infinum_numeric_z,
    moments_from_state,
    variational_estimate,
)
from .grouping import TPBGroup, group_tpb, qwc, scaling_report
from .kernels import active_backend, available_backends, use_backend
from .models import (
    CouplingSet,
    LatticeGraph,
    TrialStateSpec,
    build_hamiltonian,
    build_lattice,
    sample_couplings,
)
from .oracle import (
    SparseHamiltonian,
    dense_matrix,
    exact_ground_energy,
    exact_moments,
)
from .pauli import (
    PauliString,
    WeightedPauliSum,
    hamiltonian_power,
    hamiltonian_powers,
    pauli_mul,
    sum_compress,
)

__version__ = "0.1.0"

__all__ = [
    "MeasurementStore",
    "PairProductState",
    "apply_damping_noise",
    "expectation_exact",
    "expectation_statevector",
    "expectations_exact",
    "expectations_from_counts",
    "measure_group",
    "pair_product_statevector",
    "trial_state",
    "EnsembleRecord",
    "EnsembleResult",
    "ExpectationBasis",
    "build_expectation_basis",
    "recycle_estimate",
    "run_ensemble",
    "ConvergenceError",
    "EstimateUndefinedError",
    "ImaginaryResidueError",
    "IncompatibleMemberError",
    "MissingExpectationError",
    "QcmError",
    "QubitMismatchError",
    "ResourceGuardError",
    "BootstrapSummary",
    "CumulantVector",
    "EnergyEstimate",
    "MomentVector",
    "assemble_moments",
    "bootstrap_estimates",
    "cumulants",
    "infinum_estimate",
    "infinum_numeric_z",
    "moments_from_state",
    "variational_estimate",
    "TPBGroup",
    "group_tpb",
    "qwc",
    "scaling_report",
    "active_backend",
    "available_backends",
    "use_backend",
    "CouplingSet",
    "LatticeGraph",
    "TrialStateSpec",
    "build_hamiltonian",
    "build_lattice",
    "sample_couplings",
    "SparseHamiltonian",
    "dense_matrix",
    "exact_ground_energy",
    "exact_moments",
    "PauliString",
    "WeightedPauliSum",
    "hamiltonian_power",
    "hamiltonian_powers",
    "pauli_mul",
    "sum_compress",
    "__version__",
]
