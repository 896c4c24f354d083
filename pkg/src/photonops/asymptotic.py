"""Exact steady-state limit of the pulse-off Lindbladian.

With the control off, both devices conserve the excitation charge
Q = â†â + |e⟩⟨e| under the coherent dynamics, so the Liouvillian decomposes
over sector pairs (Q_L, Q_R) with sectors {|Q,g⟩, |Q,s⟩, |Q−1,e⟩} of size at
most three.  Every decaying mode inside a block has Re λ ≤ −γ/4, and the
t → ∞ limit of each surviving matrix element is a *conserved linear
functional* of the block, obtained from a ≤4×4 adjoint null-vector solve
(adder, where |s⟩ → |g⟩ decay stays inside a sector) or a ≤4×4 resolvent
solve (subtractor, where |e⟩ → |g⟩ decay hops one sector down — a depth-one
cascade).

Because these functionals are conserved along the pulse-off flow, applying
the map at pulse-off time already yields the exact steady state; no long
relaxation integration is needed.  The map is precomputed as a sparse list
of (target, source, weight) triples and applied with two `bincount` passes.

Surviving elements: for the adder, the atom-ground block |m,g⟩⟨n,g| (plus
the truncation-edge artifact |N,e⟩, which the truncated ladder leaves
uncoupled); for the subtractor, the ground block together with the dark
state |0,s⟩ and its coherences to the ground block.
"""

from __future__ import annotations

import numpy as np

from .hilbert import AtomLevel, SpaceLayout

__all__ = ["AsymptoticMap", "asymptotic_state"]

_PARTNER = {"s": "e", "e": "s"}


def _sector_members(q: int, n_cav: int) -> dict[str, int]:
    """Joint indices of sector Q members, keyed by atom label."""
    members = {}
    if q < n_cav:
        members["g"] = 3 * q + AtomLevel.G
        members["s"] = 3 * q + AtomLevel.S
    if 1 <= q <= n_cav:
        members["e"] = 3 * (q - 1) + AtomLevel.E
    return members


class AsymptoticMap:
    """Precomputed linear map ρ(t_off) → ρ(∞) for a fixed device/g/γ/layout."""

    def __init__(self, device, g: float, layout: SpaceLayout, gamma: float = 1.0):
        from .dynamics import DeviceKind  # local import to avoid a cycle

        self.layout = layout
        d = layout.joint_dim
        targets: list[int] = []
        sources: list[int] = []
        weights: list[complex] = []

        def add(t_row, t_col, s_row, s_col, w):
            targets.append(t_row * d + t_col)
            sources.append(s_row * d + s_col)
            weights.append(w)

        if device is DeviceKind.ADDER:
            self._build_adder(g, gamma, add)
        elif device is DeviceKind.SUBTRACTOR:
            self._build_subtractor(g, gamma, add)
        else:
            raise ValueError(f"unknown device {device!r}")

        self._t = np.asarray(targets, dtype=np.int64)
        self._s = np.asarray(sources, dtype=np.int64)
        self._w = np.asarray(weights, dtype=np.complex128)
        self._d = d

    # -- adder: decay σ_gs acts inside each sector ---------------------------

    def _build_adder(self, g: float, gamma: float, add) -> None:
        n_cav = self.layout.cavity_dim
        for ql in range(n_cav + 1):
            mem_l = _sector_members(ql, n_cav)
            gl = g * np.sqrt(ql)
            for qr in range(n_cav + 1):
                mem_r = _sector_members(qr, n_cav)
                gr = g * np.sqrt(qr)
                dark_l = ["g"] if "g" in mem_l else ["e"]
                dark_r = ["g"] if "g" in mem_r else ["e"]
                for u in dark_l:
                    for v in dark_r:
                        add(mem_l[u], mem_r[v], mem_l[u], mem_r[v], 1.0)
                if "g" not in mem_l or "g" not in mem_r:
                    continue
                # conserved functional tr(W†B) with W_gg = 1, solved from the
                # adjoint equation G†W = 0 on the live (non-g) entries
                live = [
                    (u, v)
                    for u in mem_l
                    for v in mem_r
                    if u != "g" and v != "g"
                ]
                if not live:
                    continue
                pos = {p: k for k, p in enumerate(live)}
                a = np.zeros((len(live), len(live)), dtype=np.complex128)
                b = np.zeros(len(live), dtype=np.complex128)
                for k, (u, v) in enumerate(live):
                    pu = _PARTNER[u]
                    if (pu, v) in pos:
                        a[k, pos[(pu, v)]] += 1j * gl
                    pv = _PARTNER[v]
                    if (u, pv) in pos:
                        a[k, pos[(u, pv)]] += -1j * gr
                    if u == "s":
                        a[k, k] += -0.5 * gamma
                    if v == "s":
                        a[k, k] += -0.5 * gamma
                    if u == "s" and v == "s":
                        b[k] -= gamma  # source from W_gg = 1
                w = np.linalg.solve(a, b)
                for k, (u, v) in enumerate(live):
                    add(mem_l["g"], mem_r["g"], mem_l[u], mem_r[v], np.conj(w[k]))

    # -- subtractor: decay σ_ge hops (Q_L, Q_R) → (Q_L−1, Q_R−1) -------------

    def _build_subtractor(self, g: float, gamma: float, add) -> None:
        n_cav = self.layout.cavity_dim

        def dark(q, mem):
            labels = []
            if "g" in mem:
                labels.append("g")
            if q == 0:
                labels.append("s")  # |0,s⟩ has no ladder partner and no decay
            return labels

        for ql in range(n_cav + 1):
            mem_l = _sector_members(ql, n_cav)
            for qr in range(n_cav + 1):
                mem_r = _sector_members(qr, n_cav)
                for u in dark(ql, mem_l):
                    for v in dark(qr, mem_r):
                        add(mem_l[u], mem_r[v], mem_l[u], mem_r[v], 1.0)

        # integrated decay feed: ρ∞[(k,g),(l,g)] += −γ (e_ee^T G⁻¹ vec B₀)
        # over the live entries of block (k+1, l+1)
        for k in range(n_cav):
            ql = k + 1
            mem_l = _sector_members(ql, n_cav)
            gl = g * np.sqrt(ql)
            live_l = (["s"] if "s" in mem_l else []) + ["e"]
            for l in range(n_cav):
                qr = l + 1
                mem_r = _sector_members(qr, n_cav)
                gr = g * np.sqrt(qr)
                live_r = (["s"] if "s" in mem_r else []) + ["e"]
                live = [(u, v) for u in live_l for v in live_r]
                pos = {p: i for i, p in enumerate(live)}
                gm = np.zeros((len(live), len(live)), dtype=np.complex128)
                for i, (u, v) in enumerate(live):
                    pu = _PARTNER[u]
                    if (pu, v) in pos:
                        gm[i, pos[(pu, v)]] += -1j * gl
                    pv = _PARTNER[v]
                    if (u, pv) in pos:
                        gm[i, pos[(u, pv)]] += 1j * gr
                    if u == "e":
                        gm[i, i] += -0.5 * gamma
                    if v == "e":
                        gm[i, i] += -0.5 * gamma
                y = np.linalg.solve(gm.T, _unit(len(live), pos[("e", "e")]))
                for i, (u, v) in enumerate(live):
                    add(3 * k + AtomLevel.G, 3 * l + AtomLevel.G,
                        mem_l[u], mem_r[v], -gamma * y[i])

    def apply(self, rho: np.ndarray) -> np.ndarray:
        flat = rho.ravel()
        contrib = self._w * flat[self._s]
        out = np.bincount(self._t, weights=contrib.real, minlength=self._d * self._d) + 1j * np.bincount(
            self._t, weights=contrib.imag, minlength=self._d * self._d
        )
        out = out.reshape(self._d, self._d)
        return 0.5 * (out + out.conj().T)


def _unit(n: int, k: int) -> np.ndarray:
    e = np.zeros(n, dtype=np.complex128)
    e[k] = 1.0
    return e


def asymptotic_state(rho, device, g: float, layout: SpaceLayout, gamma: float = 1.0):
    """One-shot convenience wrapper around :class:`AsymptoticMap`."""
    return AsymptoticMap(device, g, layout, gamma).apply(rho)
