"""Fixed-step RK4 kernel for the Lindblad equation, numba-compiled.

The Hamiltonian is stored as COO triplets (it has at most a handful of
nonzeros per row: the Jaynes-Cummings ladder plus the control transition),
so each right-hand side costs O(nnz·d + d²) instead of the dense d³ matmul.
The dissipator is hard-coded for a single collapse operator of the form
I_cavity ⊗ |g⟩⟨src⟩: the sandwich term is an index-shifted copy and the
anticommutator a row/column scaling.

The kernel assumes (and preserves) Hermitian ρ: the commutator is assembled
as −i(Hρ − (Hρ)†), and each step ends with an explicit re-Hermitization and
trace renormalization whose cumulative size is returned to the caller.
``fastmath`` only licenses re-association here; results are deterministic
for a fixed build, which the reproducibility contract relies on.
"""

import numba as nb
import numpy as np

LEVEL_G = 0  # must match hilbert.AtomLevel.G


@nb.njit(cache=True, fastmath=True)
def _rhs_into(rho, out, hr, rows, cols, vals, n_cav, atom_src, gamma):
    d = rho.shape[0]
    nnz = rows.shape[0]
    for i in range(d):
        for j in range(d):
            hr[i, j] = 0.0 + 0.0j
    for k in range(nnz):
        r = rows[k]
        c = cols[k]
        v = vals[k]
        for j in range(d):
            hr[r, j] += v * rho[c, j]
    for i in range(d):
        for j in range(d):
            out[i, j] = -1j * (hr[i, j] - np.conj(hr[j, i]))
    half = 0.5 * gamma
    for i in range(n_cav):
        si = 3 * i + atom_src
        for j in range(d):
            out[si, j] -= half * rho[si, j]
            out[j, si] -= half * rho[j, si]
    for i in range(n_cav):
        gi = 3 * i + LEVEL_G
        for j in range(n_cav):
            out[gi, 3 * j + LEVEL_G] += gamma * rho[3 * i + atom_src, 3 * j + atom_src]


@nb.njit(cache=True, fastmath=True)
def evolve(
    rho,
    rows,
    cols,
    vals,
    dt,
    n_steps,
    step_offset,
    sample_every,
    n_cav,
    atom_src,
    gamma,
    samples,
    n_recorded,
):
    """Advance `rho` in place by `n_steps` RK4 steps under a fixed generator.

    Records a snapshot into ``samples`` whenever the global step counter
    (``step_offset`` + local step) is a multiple of ``sample_every``.
    Returns (number of samples recorded, cumulative |trace − 1| correction).
    """
    d = rho.shape[0]
    k1 = np.empty((d, d), np.complex128)
    k2 = np.empty((d, d), np.complex128)
    k3 = np.empty((d, d), np.complex128)
    k4 = np.empty((d, d), np.complex128)
    tmp = np.empty((d, d), np.complex128)
    hr = np.empty((d, d), np.complex128)
    corr = 0.0
    rec = n_recorded
    for step in range(n_steps):
        _rhs_into(rho, k1, hr, rows, cols, vals, n_cav, atom_src, gamma)
        for i in range(d):
            for j in range(d):
                tmp[i, j] = rho[i, j] + 0.5 * dt * k1[i, j]
        _rhs_into(tmp, k2, hr, rows, cols, vals, n_cav, atom_src, gamma)
        for i in range(d):
            for j in range(d):
                tmp[i, j] = rho[i, j] + 0.5 * dt * k2[i, j]
        _rhs_into(tmp, k3, hr, rows, cols, vals, n_cav, atom_src, gamma)
        for i in range(d):
            for j in range(d):
                tmp[i, j] = rho[i, j] + dt * k3[i, j]
        _rhs_into(tmp, k4, hr, rows, cols, vals, n_cav, atom_src, gamma)
        c6 = dt / 6.0
        tr = 0.0
        for i in range(d):
            for j in range(i, d):
                val = rho[i, j] + c6 * (k1[i, j] + 2.0 * (k2[i, j] + k3[i, j]) + k4[i, j])
                valt = rho[j, i] + c6 * (k1[j, i] + 2.0 * (k2[j, i] + k3[j, i]) + k4[j, i])
                h = 0.5 * (val + np.conj(valt))
                rho[i, j] = h
                rho[j, i] = np.conj(h)
            tr += rho[i, i].real
        corr += abs(tr - 1.0)
        inv = 1.0 / tr
        for i in range(d):
            for j in range(d):
                rho[i, j] *= inv
        if (step_offset + step + 1) % sample_every == 0:
            for i in range(d):
                for j in range(d):
                    samples[rec, i, j] = rho[i, j]
            rec += 1
    return rec, corr
