"""Initial cavity states on the truncated Fock space.

Three families are supported: finite Fock superpositions Σ C_n|n⟩, coherent
states with C_n = e^{−|α|²/2} αⁿ/√(n!), and squeezed vacuum with

    C_2n = (sech r)^{1/2} · √((2n)!)/n! · (−e^{iθ} tanh r / 2)ⁿ,

odd amplitudes zero.  For the analytic families the pre-truncation tail mass
Σ_{n>N_max} |C_n|² is computed in closed form and compared against a leakage
threshold before the state is built; the truncated vector is renormalized and
the renormalization factor reported.  Factorial ratios go through ``lgamma``
so cutoffs up to ~100 photons stay in range.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatchError, LeakageError
from .hilbert import ATOM_DIM, AtomLevel, SpaceLayout

__all__ = [
    "FockSuperposition",
    "Coherent",
    "SqueezedVacuum",
    "InitialStateSpec",
    "BuiltState",
    "coherent_tail_mass",
    "squeezed_tail_mass",
    "build_cavity_state",
    "joint_initial",
]

NORM_TOL = 1e-12
DEFAULT_LEAK_TOL = 1e-8


@dataclass(frozen=True)
class FockSuperposition:
    """Finite superposition Σ C_n |n⟩; coefficients as (n, C_n) pairs."""

    coefficients: tuple[tuple[int, complex], ...]

    def __post_init__(self):
        total = sum(abs(c) ** 2 for _, c in self.coefficients)
        if abs(total - 1.0) > NORM_TOL:
            raise ValueError(f"Fock coefficients not normalized: sum |C_n|^2 = {total!r}")


@dataclass(frozen=True)
class Coherent:
    alpha: complex


@dataclass(frozen=True)
class SqueezedVacuum:
    r: float
    theta: float = 0.0

    def __post_init__(self):
        if self.r < 0:
            raise ValueError("squeeze factor r must be >= 0")


InitialStateSpec = FockSuperposition | Coherent | SqueezedVacuum


@dataclass(frozen=True)
class BuiltState:
    """Truncated, renormalized cavity state plus truncation bookkeeping."""

    amplitudes: np.ndarray = field(repr=False)
    renorm_factor: float
    tail_mass: float


def coherent_tail_mass(alpha: complex, cutoff: int) -> float:
    """Σ_{n>cutoff} |C_n|² for a coherent state (Poisson tail), exact."""
    lam = abs(alpha) ** 2
    if lam == 0.0:
        return 0.0
    # accumulate e^{-lam} lam^n / n! up to the cutoff
    log_term = -lam
    total = math.exp(log_term)
    for n in range(1, cutoff + 1):
        log_term += math.log(lam) - math.log(n)
        total += math.exp(log_term)
    return max(0.0, 1.0 - total)


def squeezed_tail_mass(r: float, cutoff: int) -> float:
    """Σ_{n>cutoff} |C_n|² for squeezed vacuum, summed until terms vanish."""
    if r == 0.0:
        return 0.0
    tail = 0.0
    n = cutoff + 1 if (cutoff + 1) % 2 == 0 else cutoff + 2
    while True:
        p = _squeezed_population(r, n)
        tail += p
        if p < 1e-22 and n > cutoff + 40:
            break
        n += 2
    return tail


def _squeezed_population(r: float, n: int) -> float:
    # |C_n|^2 for even n = 2m: sech r * (2m)!/(m!)^2 * (tanh r / 2)^(2m)
    if n % 2 == 1:
        return 0.0
    m = n // 2
    log_p = (
        math.log(1.0 / math.cosh(r))
        + math.lgamma(2 * m + 1)
        - 2 * math.lgamma(m + 1)
        + 2 * m * math.log(math.tanh(r) / 2.0)
    )
    return math.exp(log_p)


def _coherent_amplitudes(alpha: complex, dim: int) -> np.ndarray:
    n = np.arange(dim)
    mag = abs(alpha)
    if mag == 0.0:
        amps = np.zeros(dim, dtype=np.complex128)
        amps[0] = 1.0
        return amps
    log_mag = -0.5 * mag**2 + n * math.log(mag) - 0.5 * np.array([math.lgamma(k + 1) for k in n])
    phase = np.exp(1j * n * np.angle(alpha))
    return np.exp(log_mag) * phase


def _squeezed_amplitudes(r: float, theta: float, dim: int) -> np.ndarray:
    amps = np.zeros(dim, dtype=np.complex128)
    if r == 0.0:
        amps[0] = 1.0
        return amps
    for n in range(0, dim, 2):
        m = n // 2
        log_mag = (
            0.5 * math.log(1.0 / math.cosh(r))
            + 0.5 * math.lgamma(n + 1)
            - math.lgamma(m + 1)
            + m * math.log(math.tanh(r) / 2.0)
        )
        amps[n] = math.exp(log_mag) * (-np.exp(1j * theta)) ** m
    return amps


def build_cavity_state(
    spec: InitialStateSpec,
    layout: SpaceLayout,
    leak_tol: float = DEFAULT_LEAK_TOL,
) -> BuiltState:
    """Construct the truncated cavity state for `spec`.

    Raises
    ------
    LeakageError
        If the closed-form pre-truncation tail mass exceeds ``leak_tol``.
    """
    dim = layout.cavity_dim
    if isinstance(spec, FockSuperposition):
        amps = np.zeros(dim, dtype=np.complex128)
        for n, c in spec.coefficients:
            if not 0 <= n <= layout.cavity_cutoff:
                raise LeakageError(
                    f"Fock index {n} exceeds the cavity cutoff {layout.cavity_cutoff}"
                )
            amps[n] += c
        tail = 0.0
    elif isinstance(spec, Coherent):
        tail = coherent_tail_mass(spec.alpha, layout.cavity_cutoff)
        if tail > leak_tol:
            raise LeakageError(
                f"coherent state tail mass {tail:.3e} above cutoff "
                f"{layout.cavity_cutoff} exceeds leak_tol={leak_tol:.1e}"
            )
        amps = _coherent_amplitudes(spec.alpha, dim)
    elif isinstance(spec, SqueezedVacuum):
        tail = squeezed_tail_mass(spec.r, layout.cavity_cutoff)
        if tail > leak_tol:
            raise LeakageError(
                f"squeezed vacuum tail mass {tail:.3e} above cutoff "
                f"{layout.cavity_cutoff} exceeds leak_tol={leak_tol:.1e}"
            )
        amps = _squeezed_amplitudes(spec.r, spec.theta, dim)
    else:
        raise TypeError(f"unknown state spec {type(spec).__name__}")

    norm = float(np.linalg.norm(amps))
    return BuiltState(amplitudes=amps / norm, renorm_factor=1.0 / norm, tail_mass=tail)


def joint_initial(
    cavity: np.ndarray, atom_level: AtomLevel | int, layout: SpaceLayout
) -> np.ndarray:
    """Joint density matrix |ψ_c⟩⟨ψ_c| ⊗ |atom⟩⟨atom| in cavity-major order."""
    if cavity.shape != (layout.cavity_dim,):
        raise DimensionMismatchError(
            f"cavity state has shape {cavity.shape}, expected ({layout.cavity_dim},)"
        )
    psi = np.zeros(layout.joint_dim, dtype=np.complex128)
    psi[np.arange(layout.cavity_dim) * ATOM_DIM + int(atom_level)] = cavity
    return np.outer(psi, psi.conj())
