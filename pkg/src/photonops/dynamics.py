"""Rotating-frame Hamiltonians, Lindblad integration, and steady states.

The simulation frame is the interaction picture with respect to the free
cavity and atom Hamiltonians.  On resonance (cavity matched to the
|e⟩ ↔ |s⟩ transition, drive matched to the control transition) every term
becomes time independent and only two frequencies survive: the coupling g
and the decay rate γ (= 1, the frequency unit).

Adder: H = g(â σ̂_se† + â† σ̂_se) + Ω(t)(σ̂_gs + σ̂_gs†), collapse σ̂_gs at
rate γ; the atom starts in |e⟩.  Subtractor: same interaction, control on
the |e⟩ → |g⟩ transition, collapse σ̂_ge; the atom starts in |s⟩.  Ω(t) is a
rectangular pulse: Ω for t ∈ [0, τ], 0 after.  Spontaneous |e⟩ → |s⟩ decay
and cavity leakage are neglected throughout.

`integrate` is a classical fixed-step RK4 on the density matrix with the
pulse switch-off aligned to a step boundary; each step re-Hermitizes and
trace-renormalizes.  `closed_subspace_oracle` integrates the decoupled
three-state subsystems (e.g. {|n,e⟩, |n+1,s⟩, |n+1,g⟩} for the adder) with
the same stepper, serving as an independent cross-check of the full master
equation.  `asymptotic_state`/`AsymptoticMap` (re-exported from
:mod:`photonops.asymptotic`) give the algebraically exact t → ∞ limit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import _integrator
from .asymptotic import AsymptoticMap, asymptotic_state  # noqa: F401  (re-export)
from .errors import DimensionMismatchError, InvariantViolationError, NotConvergedError
from .hilbert import ATOM_DIM, AtomLevel, SpaceLayout, annihilation, atomic_sigma
from .states import DEFAULT_LEAK_TOL, InitialStateSpec, build_cavity_state, joint_initial

__all__ = [
    "DeviceKind",
    "PulseParams",
    "Scenario",
    "Trajectory",
    "build_hamiltonian",
    "lindblad_rhs",
    "integrate",
    "steady_state",
    "closed_subspace_oracle",
    "evolve_pulse_window",
    "AsymptoticMap",
    "asymptotic_state",
]


class DeviceKind(Enum):
    ADDER = "adder"
    SUBTRACTOR = "subtractor"

    @property
    def collapse_source(self) -> AtomLevel:
        """Upper level of the spontaneous decay to |g⟩."""
        return AtomLevel.S if self is DeviceKind.ADDER else AtomLevel.E

    @property
    def control_level(self) -> AtomLevel:
        """Level driven against |g⟩ by the control pulse."""
        return AtomLevel.S if self is DeviceKind.ADDER else AtomLevel.E

    @property
    def initial_atom_level(self) -> AtomLevel:
        return AtomLevel.E if self is DeviceKind.ADDER else AtomLevel.S


@dataclass(frozen=True)
class PulseParams:
    """Rectangular control pulse: strength Ω (units of γ) on t ∈ [0, τ]."""

    omega: float
    tau: float

    def __post_init__(self):
        if self.omega < 0 or self.tau < 0:
            raise ValueError("pulse strength and duration must be non-negative")

    @property
    def active(self) -> bool:
        return self.omega > 0 and self.tau > 0


@dataclass(frozen=True)
class Scenario:
    """Complete description of one master-equation experiment (γ = 1 units)."""

    device: DeviceKind
    initial: InitialStateSpec
    layout: SpaceLayout
    g: float = 10.0
    gamma: float = 1.0
    pulse: PulseParams | None = None
    t_end: float = 20.0
    dt: float = 2e-4
    steady_tol: float = 1e-3
    sample_every: int = 50
    leak_tol: float = DEFAULT_LEAK_TOL

    def __post_init__(self):
        if self.g <= 0:
            raise ValueError("coupling g must be positive")
        if self.gamma <= 0:
            raise ValueError("gamma must be positive")
        if self.t_end <= 0 or self.dt <= 0:
            raise ValueError("t_end and dt must be positive")
        # resolve the fastest Rabi scale 2g sqrt(N_max+1)
        if self.dt * self.g * math.sqrt(self.layout.cavity_dim) > 0.05 + 1e-12:
            raise ValueError(
                f"dt={self.dt} too coarse: dt*g*sqrt(N_max+1) = "
                f"{self.dt * self.g * math.sqrt(self.layout.cavity_dim):.4f} > 0.05"
            )
        if self.pulse is not None and self.pulse.active and self.dt > self.pulse.tau / 20:
            raise ValueError("dt must not exceed tau/20 for pulsed scenarios")
        if self.sample_every < 1:
            raise ValueError("sample_every must be >= 1")

    @property
    def pulse_tau(self) -> float:
        return self.pulse.tau if (self.pulse is not None and self.pulse.active) else 0.0


@dataclass
class Trajectory:
    """Sampled states of one integration, with steady-state diagnostics.

    ``residuals[k]`` is ‖dρ/dt‖_max at ``states[k]`` evaluated with the pulse
    off; ``converged_at`` is the first sample time past pulse-off where it
    drops below the scenario's ``steady_tol`` (None if never).
    """

    times: np.ndarray
    states: list[np.ndarray] = field(repr=False)
    residuals: np.ndarray
    converged_at: float | None
    correction: float
    pulse_off_time: float
    scenario: Scenario

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]


def build_hamiltonian(
    device: DeviceKind, g: float, omega_now: float, layout: SpaceLayout
) -> np.ndarray:
    """Joint rotating-frame Hamiltonian g(â σ̂_se† + h.c.) + Ω(σ̂_g,ctrl + h.c.)."""
    if omega_now < 0:
        raise ValueError("omega_now must be non-negative")
    a = annihilation(layout)
    s_se = atomic_sigma(AtomLevel.S, AtomLevel.E)
    h = g * (np.kron(a, s_se.conj().T) + np.kron(a.conj().T, s_se))
    if omega_now != 0.0:
        ctrl = atomic_sigma(AtomLevel.G, device.control_level)
        eye_c = np.eye(layout.cavity_dim, dtype=np.complex128)
        h += omega_now * (np.kron(eye_c, ctrl) + np.kron(eye_c, ctrl.conj().T))
    return h


def lindblad_rhs(
    rho: np.ndarray, h: np.ndarray, device: DeviceKind, gamma: float = 1.0
) -> np.ndarray:
    """dρ/dt = −i[H,ρ] + (γ/2)(2LρL† − L†Lρ − ρL†L), L = σ̂_g,src embedded.

    Reference implementation (the integrator kernel is tested against it).
    Assumes Hermitian ρ, which makes −i(Hρ − (Hρ)†) the exact commutator.
    """
    if rho.shape != h.shape:
        raise DimensionMismatchError(f"state {rho.shape} vs hamiltonian {h.shape}")
    n_cav = rho.shape[0] // ATOM_DIM
    src = int(device.collapse_source)
    hr = h @ rho
    out = -1j * (hr - hr.conj().T)
    idx_src = np.arange(n_cav) * ATOM_DIM + src
    idx_g = np.arange(n_cav) * ATOM_DIM + AtomLevel.G
    out[np.ix_(idx_g, idx_g)] += gamma * rho[np.ix_(idx_src, idx_src)]
    out[idx_src, :] -= 0.5 * gamma * rho[idx_src, :]
    out[:, idx_src] -= 0.5 * gamma * rho[:, idx_src]
    return out


def _kernel_operands(scenario: Scenario):
    """COO Hamiltonian data with a pulse-independent sparsity pattern."""
    layout = scenario.layout
    pattern = build_hamiltonian(scenario.device, scenario.g, 1.0, layout)
    rows, cols = np.nonzero(pattern)
    h_off = build_hamiltonian(scenario.device, scenario.g, 0.0, layout)
    vals_off = np.ascontiguousarray(h_off[rows, cols])
    if scenario.pulse_tau > 0:
        h_on = build_hamiltonian(scenario.device, scenario.g, scenario.pulse.omega, layout)
        vals_on = np.ascontiguousarray(h_on[rows, cols])
    else:
        vals_on = vals_off
    return rows.astype(np.int64), cols.astype(np.int64), vals_on, vals_off


def _time_grid(scenario: Scenario) -> tuple[float, int, int]:
    """(dt_eff, n_on, n_total): dt aligned so the pulse ends on a step."""
    tau = scenario.pulse_tau
    if tau > 0:
        n_on = math.ceil(tau / scenario.dt - 1e-12)
        dt_eff = tau / n_on
    else:
        n_on = 0
        dt_eff = scenario.dt
    n_total = max(n_on, math.ceil(scenario.t_end / dt_eff - 1e-9))
    return dt_eff, n_on, n_total


def _initial_joint(scenario: Scenario) -> np.ndarray:
    built = build_cavity_state(scenario.initial, scenario.layout, scenario.leak_tol)
    return joint_initial(built.amplitudes, scenario.device.initial_atom_level, scenario.layout)


def integrate(scenario: Scenario) -> Trajectory:
    """Integrate the master equation over [0, t_end]; see module docstring."""
    layout = scenario.layout
    rho = _initial_joint(scenario)
    rows, cols, vals_on, vals_off = _kernel_operands(scenario)
    dt_eff, n_on, n_total = _time_grid(scenario)
    d = layout.joint_dim
    every = scenario.sample_every

    max_samples = n_total // every + 2
    samples = np.empty((max_samples, d, d), dtype=np.complex128)
    times = [0.0]
    states = [rho.copy()]

    n_cav = layout.cavity_dim
    src = int(scenario.device.collapse_source)
    correction = 0.0
    rec = 0
    if n_on > 0:
        rec, corr = _integrator.evolve(
            rho, rows, cols, vals_on, dt_eff, n_on, 0, every,
            n_cav, src, scenario.gamma, samples, rec,
        )
        correction += corr
    if n_total > n_on:
        rec, corr = _integrator.evolve(
            rho, rows, cols, vals_off, dt_eff, n_total - n_on, n_on, every,
            n_cav, src, scenario.gamma, samples, rec,
        )
        correction += corr

    for k in range(rec):
        states.append(samples[k].copy())
        times.append((k + 1) * every * dt_eff)
    if n_total % every != 0:
        states.append(rho.copy())
        times.append(n_total * dt_eff)
    times = np.asarray(times)

    if correction > 1e-6:
        raise InvariantViolationError(
            f"cumulative trace correction {correction:.3e} exceeds 1e-6"
        )
    h_off = build_hamiltonian(scenario.device, scenario.g, 0.0, layout)
    residuals = np.array(
        [np.abs(lindblad_rhs(s, h_off, scenario.device, scenario.gamma)).max() for s in states]
    )
    for k, s in enumerate(states):
        lo = np.linalg.eigvalsh(s).min()
        if lo < -1e-9:
            raise InvariantViolationError(
                f"state at t={times[k]:.4f} has eigenvalue {lo:.3e} < -1e-9"
            )

    tau = scenario.pulse_tau
    converged_at = None
    for k in range(len(times)):
        if times[k] >= tau - 1e-12 and residuals[k] < scenario.steady_tol:
            converged_at = float(times[k])
            break
    return Trajectory(
        times=times,
        states=states,
        residuals=residuals,
        converged_at=converged_at,
        correction=correction,
        pulse_off_time=tau,
        scenario=scenario,
    )


def steady_state(traj: Trajectory, tol: float = 1e-7) -> np.ndarray:
    """First sampled state with pulse off and ‖dρ/dt‖_max < tol.

    Raises :class:`NotConvergedError` (carrying the final residual) if the
    trajectory never meets the tolerance.
    """
    if len(traj.states) == 0:
        raise ValueError("empty trajectory")
    for t, state, res in zip(traj.times, traj.states, traj.residuals):
        if t >= traj.pulse_off_time - 1e-12 and res < tol:
            return state.copy()
    raise NotConvergedError(
        f"residual never dropped below {tol:.1e} "
        f"(final {traj.residuals[-1]:.3e} at t={traj.times[-1]:.3f})",
        residual=float(traj.residuals[-1]),
    )


def evolve_pulse_window(scenario: Scenario) -> np.ndarray:
    """State at pulse-off time τ (the initial state if there is no pulse)."""
    rho = _initial_joint(scenario)
    if scenario.pulse_tau == 0:
        return rho
    rows, cols, vals_on, _ = _kernel_operands(scenario)
    dt_eff, n_on, _ = _time_grid(scenario)
    dummy = np.empty((1, rho.shape[0], rho.shape[0]), dtype=np.complex128)
    _integrator.evolve(
        rho, rows, cols, vals_on, dt_eff, n_on, 0, n_on + 1,
        scenario.layout.cavity_dim, int(scenario.device.collapse_source),
        scenario.gamma, dummy, 0,
    )
    return rho


def closed_subspace_oracle(
    device: DeviceKind,
    n: int,
    g: float,
    t_end: float,
    dt: float,
    gamma: float = 1.0,
    sample_every: int = 1,
) -> tuple[np.ndarray, np.ndarray]:
    """Integrate the decoupled 5-variable subspace system for Fock input |n⟩.

    Returns (times, populations) where the population columns follow the
    subspace order {|n,e⟩, |n+1,s⟩, |n+1,g⟩} for the adder and
    {|n,s⟩, |n−1,e⟩, |n−1,g⟩} for the subtractor.  The initial condition
    puts all weight on the first state.

    The system couples the top population p_t, the coherence c (and its
    conjugate), the intermediate population p_m, and the ground population:

        ṗ_t = −iG(c − c̄)            G = g√(n+1)  (adder)  or g√n (subtractor)
        ċ   = −iG(p_t − p_m) − (γ/2)c
        ṗ_m = −iG(c̄ − c) − γ p_m
        ṗ_g = γ p_m
    """
    if device is DeviceKind.SUBTRACTOR and n < 1:
        raise ValueError("subtractor oracle needs n >= 1")
    if device is DeviceKind.ADDER:
        big_g = g * math.sqrt(n + 1)
    else:
        big_g = g * math.sqrt(n)

    def rhs(y):
        p_t, c, cbar, p_m, p_g = y
        return np.array(
            [
                -1j * big_g * (c - cbar),
                -1j * big_g * (p_t - p_m) - 0.5 * gamma * c,
                -1j * big_g * (p_m - p_t) - 0.5 * gamma * cbar,
                -1j * big_g * (cbar - c) - gamma * p_m,
                gamma * p_m,
            ],
            dtype=np.complex128,
        )

    y = np.array([1.0, 0.0, 0.0, 0.0, 0.0], dtype=np.complex128)
    n_steps = math.ceil(t_end / dt - 1e-9)
    times = [0.0]
    pops = [[1.0, 0.0, 0.0]]
    for step in range(n_steps):
        k1 = rhs(y)
        k2 = rhs(y + 0.5 * dt * k1)
        k3 = rhs(y + 0.5 * dt * k2)
        k4 = rhs(y + dt * k3)
        y = y + (dt / 6.0) * (k1 + 2.0 * (k2 + k3) + k4)
        if (step + 1) % sample_every == 0 or step == n_steps - 1:
            times.append((step + 1) * dt)
            pops.append([y[0].real, y[3].real, y[4].real])
    return np.asarray(times), np.asarray(pops)
