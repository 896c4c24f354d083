"""Deterministic single-photon adder/subtractor simulations.

A cavity mode coupled to a three-level atom realizes deterministic
single-photon addition (atom |e⟩ emits into the cavity, then decays
|s⟩ → |g⟩) and subtraction (atom |s⟩ absorbs from the cavity, then decays
|e⟩ → |g⟩).  The package provides the ideal Kraus channels, Lindblad
master-equation dynamics with an optional rectangular control pulse,
phase-space observables, and fidelity-driven pulse optimization.
"""

from .channels import KrausKind, KrausSet, apply_channel, build_kraus, ladder_defect
from .dynamics import (
    AsymptoticMap,
    DeviceKind,
    PulseParams,
    Scenario,
    Trajectory,
    asymptotic_state,
    build_hamiltonian,
    closed_subspace_oracle,
    integrate,
    lindblad_rhs,
    steady_state,
)
from .errors import (
    ConfigError,
    DimensionMismatchError,
    GridSearchError,
    InvariantViolationError,
    LeakageError,
    NotConvergedError,
    PhotonOpsError,
)
from .hilbert import (
    AtomLevel,
    SpaceLayout,
    annihilation,
    atomic_sigma,
    check_density_matrix,
    creation,
    embed,
    expectation,
    number_operator,
)
from .observables import (
    QGrid,
    QGridSpec,
    QuadratureStats,
    husimi_q,
    quadrature_stats,
    trace_out_atom,
    uhlmann_fidelity,
)
from .optimizer import FidelitySurface, GridSpec, fidelity_at, grid_search, target_state
from .states import (
    BuiltState,
    Coherent,
    FockSuperposition,
    InitialStateSpec,
    SqueezedVacuum,
    build_cavity_state,
    joint_initial,
)

__version__ = "0.1.0"
