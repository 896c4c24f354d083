"""Grid search over rectangular-pulse parameters (Ω, τ).

The objective is the squared Uhlmann fidelity F² between the steady cavity
state of the pulsed master equation and the ideal coherent-channel output of
the same initial state (the convention under which the optimization
landscapes are reported; the unsquared measure lives in
:func:`photonops.observables.uhlmann_fidelity`).

Each grid point is an independent pure computation: RK4 over the pulse
window, the exact pulse-off asymptotic map, an atom trace, and a fidelity.
Points are evaluated in parallel worker processes and written into the
surface by index, so results are identical to a sequential scan.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .asymptotic import AsymptoticMap
from .channels import KrausKind, apply_channel, build_kraus
from .dynamics import DeviceKind, PulseParams, Scenario, evolve_pulse_window
from .errors import GridSearchError, NotConvergedError, PhotonOpsError
from .observables import trace_out_atom, uhlmann_fidelity
from .states import build_cavity_state

__all__ = ["GridSpec", "FidelitySurface", "target_state", "fidelity_at", "grid_search"]

MAX_MISSING_FRACTION = 0.05


@dataclass(frozen=True)
class GridSpec:
    """Cartesian (Ω, τ) grid; defaults bracket all six reference optima."""

    omega_min: float = 5.0
    omega_max: float = 30.0
    tau_min: float = 0.05
    tau_max: float = 0.30
    n_omega: int = 26
    n_tau: int = 26

    def __post_init__(self):
        if not (self.omega_min < self.omega_max and self.tau_min < self.tau_max):
            raise ValueError("grid minima must be strictly below maxima")
        if self.n_omega < 2 or self.n_tau < 2:
            raise ValueError("grid needs at least 2 points per axis")

    @property
    def omegas(self) -> np.ndarray:
        return np.linspace(self.omega_min, self.omega_max, self.n_omega)

    @property
    def taus(self) -> np.ndarray:
        return np.linspace(self.tau_min, self.tau_max, self.n_tau)


@dataclass
class FidelitySurface:
    """F²(Ω, τ) on the grid; ``values[i, j]`` pairs omegas[i] with taus[j]."""

    grid: GridSpec
    values: np.ndarray = field(repr=False)
    argmax: tuple[float, float, float]
    n_missing: int

    @property
    def best_omega(self) -> float:
        return self.argmax[0]

    @property
    def best_tau(self) -> float:
        return self.argmax[1]

    @property
    def best_fidelity(self) -> float:
        return self.argmax[2]


def target_state(scenario: Scenario) -> np.ndarray:
    """Ideal coherent-channel output of the scenario's initial cavity state."""
    built = build_cavity_state(scenario.initial, scenario.layout, scenario.leak_tol)
    rho_c = np.outer(built.amplitudes, built.amplitudes.conj())
    kind = (
        KrausKind.SPA_COHERENT
        if scenario.device is DeviceKind.ADDER
        else KrausKind.SPS_COHERENT
    )
    kraus = build_kraus(kind, scenario.layout)
    out, _ = apply_channel(kraus, rho_c, top_tol=max(scenario.leak_tol, 1e-8))
    return out


def _steady_cavity(scenario: Scenario, asym: AsymptoticMap) -> np.ndarray:
    rho_tau = evolve_pulse_window(scenario)
    return trace_out_atom(asym.apply(rho_tau), scenario.layout)


def fidelity_at(
    scenario: Scenario, pulse: PulseParams, _ctx: tuple | None = None
) -> float:
    """Squared Uhlmann fidelity of the pulsed steady state against the target."""
    if _ctx is None:
        asym = AsymptoticMap(scenario.device, scenario.g, scenario.layout, scenario.gamma)
        target = target_state(scenario)
    else:
        asym, target = _ctx
    pulsed = replace(scenario, pulse=pulse)
    rho_c = _steady_cavity(pulsed, asym)
    return uhlmann_fidelity(rho_c, target) ** 2


# worker-process context, set once per process by the pool initializer
_CTX: dict = {}


def _init_worker(scenario: Scenario) -> None:
    _CTX["scenario"] = scenario
    _CTX["asym"] = AsymptoticMap(scenario.device, scenario.g, scenario.layout, scenario.gamma)
    _CTX["target"] = target_state(scenario)


def _eval_point(point: tuple[int, int, float, float]):
    i, j, omega, tau = point
    scenario = _CTX["scenario"]
    try:
        f = fidelity_at(scenario, PulseParams(omega, tau), (_CTX["asym"], _CTX["target"]))
        return i, j, f, None
    except (NotConvergedError, PhotonOpsError, ValueError) as exc:  # record as missing
        return i, j, math.nan, str(exc)


def grid_search(scenario: Scenario, grid: GridSpec, threads: int = 0) -> FidelitySurface:
    """Evaluate F² on the full grid; deterministic argmax (smallest Ω, then τ).

    Individual point failures are recorded as missing values; more than
    5% missing raises :class:`GridSearchError`.
    """
    omegas, taus = grid.omegas, grid.taus
    points = [
        (i, j, float(om), float(ta))
        for i, om in enumerate(omegas)
        for j, ta in enumerate(taus)
    ]
    values = np.full((grid.n_omega, grid.n_tau), np.nan)
    failures: list[str] = []

    if threads == 1:
        _init_worker(scenario)
        results = map(_eval_point, points)
        for i, j, f, err in results:
            values[i, j] = f
            if err is not None:
                failures.append(err)
        _CTX.clear()
    else:
        workers = threads if threads > 0 else (os.cpu_count() or 1)
        with ProcessPoolExecutor(
            max_workers=workers, initializer=_init_worker, initargs=(scenario,)
        ) as pool:
            for i, j, f, err in pool.map(_eval_point, points, chunksize=8):
                values[i, j] = f
                if err is not None:
                    failures.append(err)

    n_missing = int(np.isnan(values).sum())
    if n_missing > MAX_MISSING_FRACTION * values.size:
        raise GridSearchError(
            f"{n_missing}/{values.size} grid points failed "
            f"(first failure: {failures[0] if failures else 'unknown'})"
        )
    flat = np.nanargmax(values)
    i, j = np.unravel_index(flat, values.shape)
    argmax = (float(omegas[i]), float(taus[j]), float(values[i, j]))
    return FidelitySurface(grid=grid, values=values, argmax=argmax, n_missing=n_missing)
