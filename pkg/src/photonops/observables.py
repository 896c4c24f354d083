"""Partial trace, photon-number/quadrature statistics, Husimi Q, fidelity.

Quadratures follow the dimensionless convention X̂₁ = (â† + â)/2,
X̂₂ = (â† − â)/(2i), for which ΔX₁·ΔX₂ ≥ 1/4.  The Husimi function is
Q(α) = ⟨α|ρ|α⟩/π, evaluated with truncated (unnormalized) coherent probes:
for a state supported on the truncated space this is exact, bounded by 1/π,
and integrates to at most 1.  The Uhlmann fidelity is the unsquared
convention F = Tr √(√ρ σ √ρ).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatchError, InvariantViolationError, LeakageError
from .hilbert import ATOM_DIM, SpaceLayout, annihilation
from .states import coherent_tail_mass

__all__ = [
    "QuadratureStats",
    "QGridSpec",
    "QGrid",
    "trace_out_atom",
    "atom_populations",
    "quadrature_stats",
    "husimi_q",
    "uhlmann_fidelity",
]

PSD_CLAMP = 1e-9


def trace_out_atom(rho: np.ndarray, layout: SpaceLayout) -> np.ndarray:
    """Reduce a joint density matrix to the cavity: (ρ_c)_mn = Σ_k ρ_(m,k),(n,k)."""
    d = layout.joint_dim
    if rho.shape != (d, d):
        raise DimensionMismatchError(f"joint state is {rho.shape}, expected {(d, d)}")
    nc = layout.cavity_dim
    return rho.reshape(nc, ATOM_DIM, nc, ATOM_DIM).trace(axis1=1, axis2=3)


def atom_populations(rho: np.ndarray, layout: SpaceLayout) -> tuple[float, float, float]:
    """(p_g, p_s, p_e) of a joint state."""
    d = layout.joint_dim
    if rho.shape != (d, d):
        raise DimensionMismatchError(f"joint state is {rho.shape}, expected {(d, d)}")
    diag = np.diagonal(rho).real
    return tuple(float(diag[k::ATOM_DIM].sum()) for k in range(ATOM_DIM))


@dataclass(frozen=True)
class QuadratureStats:
    mean_n: float
    std_n: float
    std_x1: float
    std_x2: float


def quadrature_stats(rho_c: np.ndarray) -> QuadratureStats:
    """Mean photon number and standard deviations of n̂, X̂₁, X̂₂."""
    dim = rho_c.shape[0]
    a = annihilation(SpaceLayout(dim - 1))
    n_op = a.conj().T @ a
    x1 = 0.5 * (a.conj().T + a)
    x2 = (a.conj().T - a) / 2j

    def _moments(op):
        mean = float(np.trace(rho_c @ op).real)
        second = float(np.trace(rho_c @ (op @ op)).real)
        return mean, math.sqrt(max(second - mean**2, 0.0))

    mean_n, std_n = _moments(n_op)
    _, std_x1 = _moments(x1)
    _, std_x2 = _moments(x2)
    return QuadratureStats(mean_n=mean_n, std_n=std_n, std_x1=std_x1, std_x2=std_x2)


@dataclass(frozen=True)
class QGridSpec:
    """Phase-space grid: Re α and Im α sampled uniformly, endpoints included."""

    re_min: float = -3.0
    re_max: float = 3.0
    im_min: float = -3.0
    im_max: float = 3.0
    resolution: int = 121

    def __post_init__(self):
        if self.re_min >= self.re_max or self.im_min >= self.im_max:
            raise ValueError("grid ranges must be increasing intervals")
        if self.resolution < 2:
            raise ValueError("resolution must be >= 2")

    @property
    def re_points(self) -> np.ndarray:
        return np.linspace(self.re_min, self.re_max, self.resolution)

    @property
    def im_points(self) -> np.ndarray:
        return np.linspace(self.im_min, self.im_max, self.resolution)

    @property
    def cell_area(self) -> float:
        dre = (self.re_max - self.re_min) / (self.resolution - 1)
        dim = (self.im_max - self.im_min) / (self.resolution - 1)
        return dre * dim

    def corner_radius_sq(self) -> float:
        re = max(abs(self.re_min), abs(self.re_max))
        im = max(abs(self.im_min), abs(self.im_max))
        return re**2 + im**2


@dataclass(frozen=True)
class QGrid:
    """Q values on a grid; ``values[i, j]`` = Q(re_points[i] + 1j·im_points[j])."""

    spec: QGridSpec
    values: np.ndarray = field(repr=False)

    def riemann_sum(self) -> float:
        return float(self.values.sum() * self.spec.cell_area)


def _probe_amplitudes(alphas: np.ndarray, dim: int) -> np.ndarray:
    """Truncated coherent amplitudes, one row per α, NOT renormalized."""
    n = np.arange(dim)
    half_lgamma = 0.5 * np.array([math.lgamma(k + 1) for k in n])
    mag = np.abs(alphas)[:, None]
    ang = np.angle(alphas)[:, None]
    with np.errstate(divide="ignore"):
        log_mag = np.where(mag > 0, n[None, :] * np.log(np.where(mag > 0, mag, 1.0)), 0.0)
    log_mag = log_mag - 0.5 * np.abs(alphas[:, None]) ** 2 - half_lgamma[None, :]
    amps = np.exp(log_mag) * np.exp(1j * n[None, :] * ang)
    amps[np.abs(alphas) == 0] = 0.0
    amps[np.abs(alphas) == 0, 0] = 1.0
    return amps


def husimi_q(
    rho_c: np.ndarray, grid: QGridSpec | None = None, corner_tol: float = 1e-4
) -> QGrid:
    """Husimi Q-function of a cavity state over a phase-space grid.

    The corner guard estimates the error of probing a truncated state near
    the grid edge as 2·sqrt(tail_probe · p_top) + p_top, where tail_probe is
    the probe's pre-truncation tail at the farthest corner and p_top the
    state's top-Fock population; it rejects grids that extend beyond what the
    cutoff can support.
    """
    if grid is None:
        grid = QGridSpec()
    dim = rho_c.shape[0]
    cutoff = dim - 1
    tail = coherent_tail_mass(math.sqrt(grid.corner_radius_sq()), cutoff)
    p_top = max(float(rho_c[cutoff, cutoff].real), 0.0)
    corner_err = 2.0 * math.sqrt(tail * p_top) + p_top
    if corner_err > corner_tol:
        raise LeakageError(
            f"estimated corner Q error {corner_err:.3e} > {corner_tol:.1e} "
            f"(probe tail {tail:.3e}, top-level population {p_top:.3e}); "
            "grid extends beyond truncation validity"
        )
    re = grid.re_points
    im = grid.im_points
    alphas = (re[:, None] + 1j * im[None, :]).ravel()
    probes = _probe_amplitudes(alphas, dim)
    tmp = probes.conj() @ rho_c
    q = np.einsum("gi,gi->g", tmp, probes).real / math.pi
    # round-off from tiny negative eigenvalues of rho may push Q below zero
    if q.min() < -PSD_CLAMP:
        raise InvariantViolationError(f"Q-function value {q.min():.3e} below -{PSD_CLAMP:.1e}")
    q = np.clip(q, 0.0, None)
    return QGrid(spec=grid, values=q.reshape(len(re), len(im)))


def _psd_sqrt(rho: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(0.5 * (rho + rho.conj().T))
    if w.min() < -PSD_CLAMP:
        raise InvariantViolationError(f"eigenvalue {w.min():.3e} below -{PSD_CLAMP:.1e}")
    w = np.clip(w, 0.0, None)
    return (v * np.sqrt(w)) @ v.conj().T


def uhlmann_fidelity(rho: np.ndarray, sigma: np.ndarray) -> float:
    """F(ρ, σ) = Tr √(√ρ σ √ρ)  (unsquared convention)."""
    if rho.shape != sigma.shape:
        raise DimensionMismatchError(f"shapes differ: {rho.shape} vs {sigma.shape}")
    sq = _psd_sqrt(rho)
    mid = sq @ sigma @ sq
    w = np.linalg.eigvalsh(0.5 * (mid + mid.conj().T))
    if w.min() < -PSD_CLAMP:
        raise InvariantViolationError(f"inner eigenvalue {w.min():.3e} below -{PSD_CLAMP:.1e}")
    # zero out round-off eigenvalues: sqrt amplifies 1e-17 noise to 3e-9
    floor = 1e-14 * max(float(w.max()), 0.0)
    w = np.where(w > floor, w, 0.0)
    return float(np.sqrt(w).sum())
