import math

import numpy as np
import pytest

from photonops import (
    AtomLevel,
    AsymptoticMap,
    Coherent,
    DeviceKind,
    FockSuperposition,
    NotConvergedError,
    PulseParams,
    Scenario,
    SpaceLayout,
    asymptotic_state,
    build_hamiltonian,
    check_density_matrix,
    closed_subspace_oracle,
    expectation,
    integrate,
    joint_initial,
    lindblad_rhs,
    number_operator,
    steady_state,
    trace_out_atom,
)
from photonops.dynamics import _kernel_operands, _time_grid, evolve_pulse_window
from photonops import _integrator
from photonops.hilbert import embed
from conftest import random_density_matrix


def _scenario(device, initial, cutoff, **kw):
    return Scenario(device=device, initial=initial, layout=SpaceLayout(cutoff), **kw)


def _mean_n(joint, layout):
    n_full = embed(number_operator(layout).astype(complex), "cavity", layout)
    return expectation(joint, n_full).real


# ------------------------------------------------------------- hamiltonian


def test_adder_jc_matrix_element():
    layout = SpaceLayout(4)
    h = build_hamiltonian(DeviceKind.ADDER, 10.0, 0.0, layout)
    assert h[layout.index(1, AtomLevel.S), layout.index(0, AtomLevel.E)] == pytest.approx(10.0)
    assert np.abs(h - h.conj().T).max() == 0.0


def test_adder_control_is_cavity_diagonal():
    layout = SpaceLayout(4)
    h = build_hamiltonian(DeviceKind.ADDER, 10.0, 16.0, layout)
    for n in range(5):
        assert h[layout.index(n, AtomLevel.G), layout.index(n, AtomLevel.S)] == pytest.approx(16.0)


def test_subtractor_jc_matrix_element():
    layout = SpaceLayout(4)
    h = build_hamiltonian(DeviceKind.SUBTRACTOR, 10.0, 0.0, layout)
    assert h[layout.index(0, AtomLevel.E), layout.index(1, AtomLevel.S)] == pytest.approx(10.0)


def test_subtractor_control_couples_g_e():
    layout = SpaceLayout(3)
    h = build_hamiltonian(DeviceKind.SUBTRACTOR, 10.0, 12.0, layout)
    for n in range(4):
        assert h[layout.index(n, AtomLevel.G), layout.index(n, AtomLevel.E)] == pytest.approx(12.0)


# ---------------------------------------------------------------- lindblad


def test_rhs_dark_ground_state():
    layout = SpaceLayout(2)
    h = build_hamiltonian(DeviceKind.ADDER, 10.0, 0.0, layout)
    rho = np.zeros((9, 9), complex)
    rho[layout.index(0, AtomLevel.G), layout.index(0, AtomLevel.G)] = 1.0
    assert np.abs(lindblad_rhs(rho, h, DeviceKind.ADDER)).max() == 0.0


def test_rhs_decay_rate_of_s_population():
    layout = SpaceLayout(3)
    h = build_hamiltonian(DeviceKind.ADDER, 10.0, 0.0, layout)
    idx = layout.index(1, AtomLevel.S)
    rho = np.zeros((12, 12), complex)
    rho[idx, idx] = 1.0
    out = lindblad_rhs(rho, h, DeviceKind.ADDER, gamma=1.0)
    assert out[idx, idx].real == pytest.approx(-1.0, abs=1e-14)


@pytest.mark.parametrize("device", [DeviceKind.ADDER, DeviceKind.SUBTRACTOR])
def test_rhs_traceless_and_hermitian(device, rng):
    layout = SpaceLayout(4)
    h = build_hamiltonian(device, 10.0, 7.0, layout)
    for _ in range(100):
        rho = random_density_matrix(rng, layout.joint_dim)
        out = lindblad_rhs(rho, h, device)
        assert abs(np.trace(out)) <= 1e-12
        assert np.abs(out - out.conj().T).max() <= 1e-12


@pytest.mark.parametrize("device", [DeviceKind.ADDER, DeviceKind.SUBTRACTOR])
@pytest.mark.parametrize("omega", [0.0, 16.0])
def test_kernel_matches_reference_rhs(device, omega, rng):
    """The numba kernel must reproduce the numpy RK4 step for step."""
    initial = FockSuperposition(((1, 2**-0.5), (2, 2**-0.5)))
    pulse = PulseParams(omega, 0.1) if omega else None
    sc = _scenario(device, initial, 5, pulse=pulse)
    layout = sc.layout

    rho = random_density_matrix(rng, layout.joint_dim)
    rho = 0.5 * (rho + rho.conj().T)
    rows, cols, vals_on, vals_off = _kernel_operands(sc)
    vals = vals_on if omega else vals_off
    h = build_hamiltonian(device, sc.g, omega, layout)

    dt = 2e-4
    n_steps = 25
    rho_kernel = rho.copy()
    dummy = np.empty((1, layout.joint_dim, layout.joint_dim), complex)
    _integrator.evolve(
        rho_kernel, rows, cols, vals, dt, n_steps, 0, n_steps + 1,
        layout.cavity_dim, int(device.collapse_source), 1.0, dummy, 0,
    )

    rho_ref = rho.copy()
    for _ in range(n_steps):
        k1 = lindblad_rhs(rho_ref, h, device)
        k2 = lindblad_rhs(rho_ref + 0.5 * dt * k1, h, device)
        k3 = lindblad_rhs(rho_ref + 0.5 * dt * k2, h, device)
        k4 = lindblad_rhs(rho_ref + dt * k3, h, device)
        rho_ref = rho_ref + (dt / 6) * (k1 + 2 * (k2 + k3) + k4)
        rho_ref = 0.5 * (rho_ref + rho_ref.conj().T)
        rho_ref /= np.trace(rho_ref).real
    assert np.abs(rho_kernel - rho_ref).max() <= 1e-13


# --------------------------------------------------------------- integrate


def test_adder_fock_steady_mean(fock12):
    sc = _scenario(DeviceKind.ADDER, fock12, 6)
    traj = integrate(sc)
    ss = steady_state(traj, tol=1e-3)
    assert _mean_n(ss, sc.layout) == pytest.approx(2.5, abs=0.005)
    # trajectory steady state agrees with the algebraic limit
    alg = asymptotic_state(traj.states[0], DeviceKind.ADDER, sc.g, sc.layout)
    assert np.abs(ss - alg).max() <= 2e-4


def test_subtractor_fock_steady_mean(fock12):
    sc = _scenario(DeviceKind.SUBTRACTOR, fock12, 6)
    traj = integrate(sc)
    ss = steady_state(traj, tol=1e-3)
    assert _mean_n(ss, sc.layout) == pytest.approx(0.5, abs=0.005)


def test_adder_vacuum_gains_exactly_one_photon():
    sc = _scenario(DeviceKind.ADDER, FockSuperposition(((0, 1.0),)), 3)
    rho0 = joint_initial(
        np.array([1, 0, 0, 0], complex), AtomLevel.E, sc.layout
    )
    ss = asymptotic_state(rho0, DeviceKind.ADDER, sc.g, sc.layout)
    assert _mean_n(ss, sc.layout) == pytest.approx(1.0, abs=1e-6)


def test_steady_state_not_converged_for_short_run(fock12):
    sc = _scenario(DeviceKind.ADDER, fock12, 6, t_end=0.1, steady_tol=1e-3)
    traj = integrate(sc)
    with pytest.raises(NotConvergedError) as err:
        steady_state(traj, tol=1e-3)
    assert err.value.residual > 1e-3


def test_steady_state_atom_fully_grounded(fock12):
    sc = _scenario(DeviceKind.ADDER, fock12, 6)
    rho0 = integrate(_scenario(DeviceKind.ADDER, fock12, 6, t_end=0.01)).states[0]
    ss = asymptotic_state(rho0, DeviceKind.ADDER, sc.g, sc.layout)
    pop_g = sum(
        ss[sc.layout.index(n, AtomLevel.G), sc.layout.index(n, AtomLevel.G)].real
        for n in range(sc.layout.cavity_dim)
    )
    assert pop_g == pytest.approx(1.0, abs=1e-6)


def test_trajectory_states_are_valid_density_matrices(fock12):
    sc = _scenario(DeviceKind.ADDER, fock12, 6, t_end=2.0)
    traj = integrate(sc)
    assert traj.correction <= 1e-6
    for state in traj.states[:: max(1, len(traj.states) // 10)]:
        check_density_matrix(state)
    assert np.all(np.diff(traj.times) > 0)


def test_halving_dt_leaves_steady_mean(fock12):
    base = _scenario(DeviceKind.ADDER, fock12, 6, sample_every=100000)
    fine = _scenario(DeviceKind.ADDER, fock12, 6, dt=1e-4, sample_every=200000)
    n_a = _mean_n(integrate(base).final_state, base.layout)
    n_b = _mean_n(integrate(fine).final_state, fine.layout)
    assert abs(n_a - n_b) < 1e-7


def test_pulse_grid_aligns_switch_off(fock12):
    sc = _scenario(DeviceKind.ADDER, fock12, 6, pulse=PulseParams(16.0, 0.14), dt=3e-4)
    dt_eff, n_on, n_total = _time_grid(sc)
    assert n_on * dt_eff == pytest.approx(0.14, abs=1e-15)
    assert dt_eff <= sc.dt
    assert n_total * dt_eff >= sc.t_end - 1e-9


def test_scenario_validation_rejects_coarse_dt(fock12):
    with pytest.raises(ValueError):
        _scenario(DeviceKind.ADDER, fock12, 6, dt=5e-3)
    with pytest.raises(ValueError):
        _scenario(DeviceKind.ADDER, fock12, 6, pulse=PulseParams(16.0, 0.001))


# ------------------------------------------------------------------ oracle


@pytest.mark.parametrize("n", [0, 1])
def test_oracle_adder_adds_deterministically(n):
    times, pops = closed_subspace_oracle(DeviceKind.ADDER, n, 10.0, t_end=30.0, dt=2e-4)
    assert pops[-1, 2] == pytest.approx(1.0, abs=1e-6)
    assert np.abs(pops.sum(axis=1) - 1.0).max() <= 1e-9


def test_oracle_subtractor_subtracts_deterministically():
    _, pops = closed_subspace_oracle(DeviceKind.SUBTRACTOR, 1, 10.0, t_end=30.0, dt=2e-4)
    assert pops[-1, 2] == pytest.approx(1.0, abs=1e-6)


def test_oracle_rejects_subtractor_vacuum():
    with pytest.raises(ValueError):
        closed_subspace_oracle(DeviceKind.SUBTRACTOR, 0, 10.0, 1.0, 1e-3)


@pytest.mark.parametrize(
    "device,n",
    [(DeviceKind.ADDER, 0), (DeviceKind.ADDER, 2), (DeviceKind.SUBTRACTOR, 1)],
)
def test_oracle_matches_master_equation(device, n):
    layout = SpaceLayout(7)
    amps = np.zeros(8, complex)
    amps[n] = 1.0
    sc = Scenario(
        device=device,
        initial=FockSuperposition(((n, 1.0),)),
        layout=layout,
        t_end=6.0,
        sample_every=200,
    )
    traj = integrate(sc)
    times, pops = closed_subspace_oracle(device, n, sc.g, t_end=6.0, dt=sc.dt, sample_every=200)
    if device is DeviceKind.ADDER:
        idx = [layout.index(n, AtomLevel.E), layout.index(n + 1, AtomLevel.S),
               layout.index(n + 1, AtomLevel.G)]
    else:
        idx = [layout.index(n, AtomLevel.S), layout.index(n - 1, AtomLevel.E),
               layout.index(n - 1, AtomLevel.G)]
    assert len(times) == len(traj.times)
    for k, state in enumerate(traj.states):
        got = np.array([state[i, i].real for i in idx])
        assert np.abs(got - pops[k]).max() <= 1e-8


def test_subtractor_dark_state_is_stationary():
    sc = _scenario(DeviceKind.SUBTRACTOR, FockSuperposition(((0, 1.0),)), 3, t_end=2.0)
    traj = integrate(sc)
    for state in traj.states:
        assert np.abs(state - traj.states[0]).max() <= 1e-9


# -------------------------------------------------------------- asymptotic


@pytest.mark.parametrize(
    "device,omega,tau",
    [
        (DeviceKind.ADDER, 0.0, 0.0),
        (DeviceKind.ADDER, 16.0, 0.14),
        (DeviceKind.SUBTRACTOR, 12.0, 0.18),
    ],
)
def test_asymptotic_matches_long_integration(device, omega, tau, fock12):
    pulse = PulseParams(omega, tau) if omega else None
    sc = _scenario(device, fock12, 6, pulse=pulse, t_end=60.0, sample_every=20000)
    traj = integrate(sc)
    rho_tau = evolve_pulse_window(sc)
    alg = asymptotic_state(rho_tau, device, sc.g, sc.layout)
    assert np.abs(traj.final_state - alg).max() <= 1e-7
    assert np.trace(alg).real == pytest.approx(1.0, abs=1e-12)
    check_density_matrix(alg)


def test_asymptotic_functional_is_conserved(fock12, rng):
    # applying the map at any pulse-off time gives the same limit
    sc = _scenario(DeviceKind.ADDER, fock12, 6, t_end=1.5, sample_every=1000)
    traj = integrate(sc)
    amap = AsymptoticMap(DeviceKind.ADDER, sc.g, sc.layout)
    ref = amap.apply(traj.states[0])
    for state in traj.states[1:]:
        assert np.abs(amap.apply(state) - ref).max() <= 1e-10


def test_asymptotic_random_state(rng):
    layout = SpaceLayout(5)
    rho = random_density_matrix(rng, layout.joint_dim)
    for device in (DeviceKind.ADDER, DeviceKind.SUBTRACTOR):
        sc = Scenario(
            device=device,
            initial=FockSuperposition(((0, 1.0),)),
            layout=layout,
            t_end=60.0,
            sample_every=100000,
        )
        rows, cols, _, vals_off = _kernel_operands(sc)
        rho_num = rho.copy()
        dummy = np.empty((1, layout.joint_dim, layout.joint_dim), complex)
        _integrator.evolve(
            rho_num, rows, cols, vals_off, 2e-4, 300000, 0, 400000,
            layout.cavity_dim, int(device.collapse_source), 1.0, dummy, 0,
        )
        alg = asymptotic_state(rho, device, sc.g, layout)
        assert np.abs(rho_num - alg).max() <= 1e-7
