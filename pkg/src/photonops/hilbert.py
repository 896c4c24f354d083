"""Dense operator algebra on the truncated cavity ⊗ three-level-atom space.

Everything is a plain ``numpy`` complex array; this module fixes the basis
conventions and provides the ladder/atomic operators the rest of the package
builds on.  Units are ħ = 1 with the atomic decay rate γ as the frequency
unit, so all operators are dimensionless.

Basis conventions
-----------------
Atom levels are ordered (g, s, e) = (0, 1, 2).  The joint basis is
cavity-major: joint index = n * 3 + atom_level, i.e. the joint space is
``cavity ⊗ atom`` under ``numpy.kron``.  This keeps each closed subspace
{|n,e⟩, |n+1,s⟩, |n+1,g⟩} in a predictable index pattern for every module.

Truncation policy: operators act on the truncated space with no
renormalization.  ``annihilation`` satisfies â|n⟩ = √n|n−1⟩ exactly for all
retained n; the commutator [â, â†] equals 1 except for the (N_max, N_max)
entry, which is −N_max (the standard truncation artifact).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum

import numpy as np

from .errors import DimensionMismatchError, InvariantViolationError

__all__ = [
    "AtomLevel",
    "SpaceLayout",
    "annihilation",
    "creation",
    "number_operator",
    "atomic_sigma",
    "embed",
    "expectation",
    "check_density_matrix",
]

ATOM_DIM = 3


class AtomLevel(IntEnum):
    """Three-level atom basis order: ground, metastable/lower excited, excited."""

    G = 0
    S = 1
    E = 2


@dataclass(frozen=True)
class SpaceLayout:
    """Dimensions and index ordering of the joint cavity ⊗ atom space.

    Parameters
    ----------
    cavity_cutoff : int
        Highest retained Fock index N_max (cavity dimension is N_max + 1).
    """

    cavity_cutoff: int

    def __post_init__(self):
        if self.cavity_cutoff < 1:
            raise ValueError(f"cavity_cutoff must be >= 1, got {self.cavity_cutoff}")

    @property
    def atom_dim(self) -> int:
        return ATOM_DIM

    @property
    def cavity_dim(self) -> int:
        return self.cavity_cutoff + 1

    @property
    def joint_dim(self) -> int:
        return self.cavity_dim * ATOM_DIM

    def index(self, n: int, level: AtomLevel | int) -> int:
        """Joint basis index of |n, level⟩ (cavity-major ordering)."""
        if not 0 <= n <= self.cavity_cutoff:
            raise ValueError(f"Fock index {n} outside [0, {self.cavity_cutoff}]")
        return n * ATOM_DIM + int(level)


def annihilation(layout: SpaceLayout) -> np.ndarray:
    """Cavity annihilation operator â with ⟨n−1|â|n⟩ = √n (cavity-only)."""
    return np.diag(np.sqrt(np.arange(1, layout.cavity_dim)), 1).astype(np.complex128)


def creation(layout: SpaceLayout) -> np.ndarray:
    """Cavity creation operator â† (daggered :func:`annihilation`)."""
    return annihilation(layout).conj().T


def number_operator(layout: SpaceLayout) -> np.ndarray:
    """â†â, diagonal (0, 1, ..., N_max) by construction."""
    return np.diag(np.arange(layout.cavity_dim, dtype=np.complex128))


def atomic_sigma(i: AtomLevel | int, j: AtomLevel | int) -> np.ndarray:
    """Atomic transition operator σ̂_ij = |i⟩⟨j| on the 3-level atom."""
    m = np.zeros((ATOM_DIM, ATOM_DIM), dtype=np.complex128)
    m[int(i), int(j)] = 1.0
    return m


def embed(op: np.ndarray, which: str, layout: SpaceLayout) -> np.ndarray:
    """Embed a subsystem operator into the joint space.

    Parameters
    ----------
    op : ndarray
        Square operator on the cavity (``which="cavity"``) or atom
        (``which="atom"``) subspace.
    which : {"cavity", "atom"}
    """
    if which == "cavity":
        if op.shape != (layout.cavity_dim, layout.cavity_dim):
            raise DimensionMismatchError(
                f"cavity operator is {op.shape}, expected {(layout.cavity_dim,) * 2}"
            )
        return np.kron(op, np.eye(ATOM_DIM, dtype=np.complex128))
    if which == "atom":
        if op.shape != (ATOM_DIM, ATOM_DIM):
            raise DimensionMismatchError(f"atom operator is {op.shape}, expected (3, 3)")
        return np.kron(np.eye(layout.cavity_dim, dtype=np.complex128), op)
    raise ValueError(f"which must be 'cavity' or 'atom', got {which!r}")


def expectation(rho: np.ndarray, op: np.ndarray) -> complex:
    """Tr(ρ · op)."""
    if rho.shape != op.shape:
        raise DimensionMismatchError(f"state is {rho.shape}, operator is {op.shape}")
    # trace of a product without forming it
    return complex(np.sum(rho.T * op))


def check_density_matrix(
    rho: np.ndarray,
    herm_tol: float = 1e-10,
    trace_tol: float = 1e-9,
    psd_tol: float = 1e-9,
) -> None:
    """Raise :class:`InvariantViolationError` unless rho is a valid density matrix.

    Checks hermiticity (max-norm), unit trace, and positive semidefiniteness
    (smallest eigenvalue ≥ −psd_tol).
    """
    herm = np.abs(rho - rho.conj().T).max()
    if herm > herm_tol:
        raise InvariantViolationError(f"hermiticity defect {herm:.3e} > {herm_tol:.1e}")
    tr = np.trace(rho)
    if abs(tr - 1.0) > trace_tol:
        raise InvariantViolationError(f"trace {tr:.12f} deviates from 1 by more than {trace_tol:.1e}")
    lo = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min()
    if lo < -psd_tol:
        raise InvariantViolationError(f"smallest eigenvalue {lo:.3e} < -{psd_tol:.1e}")
