import math

import numpy as np
import pytest

from photonops import (
    Coherent,
    DeviceKind,
    FockSuperposition,
    GridSpec,
    PulseParams,
    Scenario,
    SpaceLayout,
    build_cavity_state,
    fidelity_at,
    grid_search,
    target_state,
)
from photonops import optimizer as opt_mod


def _fock_scenario(device, **kw):
    return Scenario(
        device=device,
        initial=FockSuperposition(((1, 2**-0.5), (2, 2**-0.5))),
        layout=SpaceLayout(6),
        **kw,
    )


def _pure(amps):
    return np.outer(amps, np.conj(amps))


def test_target_state_adder_shifts_up(fock12):
    sc = _fock_scenario(DeviceKind.ADDER)
    amps = build_cavity_state(fock12, sc.layout).amplitudes
    assert np.allclose(target_state(sc), _pure(np.roll(amps, 1)), atol=1e-14)


def test_target_state_subtractor_shifts_down(fock12):
    sc = _fock_scenario(DeviceKind.SUBTRACTOR)
    amps = build_cavity_state(fock12, sc.layout).amplitudes
    assert np.allclose(target_state(sc), _pure(np.roll(amps, -1)), atol=1e-14)


def test_target_state_subtractor_coherent_mixture():
    layout = SpaceLayout(15)
    sc = Scenario(device=DeviceKind.SUBTRACTOR, initial=Coherent(1.0), layout=layout)
    amps = build_cavity_state(Coherent(1.0), layout).amplitudes
    lowered = np.zeros_like(amps)
    lowered[:-1] = amps[1:]
    expected = _pure(lowered)
    expected[0, 0] += abs(amps[0]) ** 2
    assert np.allclose(target_state(sc), expected, atol=1e-14)


def test_no_pulse_fidelity_reference(fock12):
    # mixed vs pure closed form sqrt(1/2); residual coherence shifts it a little
    sc = _fock_scenario(DeviceKind.ADDER)
    f_sq = fidelity_at(sc, PulseParams(0.0, 0.1))
    assert math.sqrt(f_sq) == pytest.approx(math.sqrt(0.5), abs=0.01)


def test_zero_duration_equals_zero_strength(fock12):
    sc = _fock_scenario(DeviceKind.ADDER)
    assert fidelity_at(sc, PulseParams(0.0, 0.2)) == fidelity_at(sc, PulseParams(9.0, 0.0))


def test_fidelity_at_reference_optimum():
    sc = _fock_scenario(DeviceKind.ADDER)
    assert fidelity_at(sc, PulseParams(16.0, 0.14)) == pytest.approx(0.977, abs=0.01)


def test_grid_search_brackets_optimum():
    sc = _fock_scenario(DeviceKind.ADDER)
    grid = GridSpec(omega_min=14, omega_max=18, tau_min=0.12, tau_max=0.16, n_omega=5, n_tau=5)
    surface = grid_search(sc, grid, threads=1)
    assert surface.values.shape == (5, 5)
    assert np.all((surface.values >= 0) & (surface.values <= 1))
    assert surface.best_omega == pytest.approx(16.0, abs=1.0)
    assert surface.best_tau == pytest.approx(0.14, abs=0.01)
    assert surface.best_fidelity >= fidelity_at(sc, PulseParams(0.0, 0.1))
    assert surface.n_missing == 0


def test_grid_search_parallel_matches_serial():
    sc = _fock_scenario(DeviceKind.ADDER)
    grid = GridSpec(omega_min=15, omega_max=17, tau_min=0.13, tau_max=0.15, n_omega=2, n_tau=2)
    serial = grid_search(sc, grid, threads=1)
    parallel = grid_search(sc, grid, threads=2)
    assert np.array_equal(serial.values, parallel.values)
    rerun = grid_search(sc, grid, threads=1)
    assert np.array_equal(serial.values, rerun.values)


def test_degenerate_grid_tie_breaks_to_lowest_corner(monkeypatch):
    sc = _fock_scenario(DeviceKind.ADDER)
    monkeypatch.setattr(opt_mod, "fidelity_at", lambda *a, **k: 0.5)
    grid = GridSpec(omega_min=3, omega_max=9, tau_min=0.1, tau_max=0.2, n_omega=2, n_tau=2)
    surface = grid_search(sc, grid, threads=1)
    assert np.all(surface.values == 0.5)
    assert (surface.best_omega, surface.best_tau) == (3.0, 0.1)


def test_grid_rejects_degenerate_ranges():
    with pytest.raises(ValueError):
        GridSpec(omega_min=5, omega_max=5, tau_min=0.1, tau_max=0.2)
    with pytest.raises(ValueError):
        GridSpec(n_omega=1)
