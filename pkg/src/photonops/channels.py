"""Ideal Kraus channels for single-photon addition and subtraction.

The coherent adder is the single isometry Â† = Σ_n |n+1⟩⟨n|; the correct
subtractor set is {Â₀ = |0⟩⟨0|, Â = Σ_{n≥1} |n−1⟩⟨n|}, complete by
construction (Â₀†Â₀ + Â†Â = I).  The incoherent variants apply the rank-1
pieces |n±1⟩⟨n| individually, which wipes Fock-basis coherences.  A
post-selected subtractor variant conditions on an emitted photon:
ρ → ÂρÂ†/Tr(ÂρÂ†).

`ladder_defect` quantifies why bare ladder operators misrepresent these
operations: normalizing â†|α⟩ raises the photon number by
1 + |α|²/(|α|²+1) > 1 instead of exactly one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import DimensionMismatchError, LeakageError
from .hilbert import SpaceLayout, creation, number_operator
from .states import Coherent, build_cavity_state

__all__ = ["KrausKind", "KrausSet", "build_kraus", "apply_channel", "ladder_defect"]

TOP_LEVEL_TOL = 1e-8


class KrausKind(Enum):
    SPA_COHERENT = "spa_coherent"
    SPA_INCOHERENT = "spa_incoherent"
    SPS_COHERENT = "sps_coherent"
    SPS_INCOHERENT = "sps_incoherent"
    SPS_POST_SELECTED = "sps_post_selected"


@dataclass(frozen=True)
class KrausSet:
    """A concrete set of cavity-only Kraus operators.

    ``clips_top_level`` flags the truncation edge of the adder kinds: Â† maps
    |N_max⟩ to the zero vector, so inputs must carry negligible top-level
    population (enforced by :func:`apply_channel`).
    """

    kind: KrausKind
    operators: tuple[np.ndarray, ...] = field(repr=False)
    clips_top_level: bool

    @property
    def is_adder(self) -> bool:
        return self.kind in (KrausKind.SPA_COHERENT, KrausKind.SPA_INCOHERENT)


def _raise_op(dim: int) -> np.ndarray:
    """Σ_{n<N_max} |n+1⟩⟨n| (unit superdiagonal shifted down)."""
    return np.eye(dim, k=-1, dtype=np.complex128)


def _lower_op(dim: int) -> np.ndarray:
    """Σ_{n≥1} |n−1⟩⟨n|."""
    return np.eye(dim, k=1, dtype=np.complex128)


def build_kraus(kind: KrausKind, layout: SpaceLayout) -> KrausSet:
    dim = layout.cavity_dim
    if kind is KrausKind.SPA_COHERENT:
        ops = (_raise_op(dim),)
        clips = True
    elif kind is KrausKind.SPA_INCOHERENT:
        ops = tuple(_rank_one(dim, n + 1, n) for n in range(dim - 1))
        clips = True
    elif kind is KrausKind.SPS_COHERENT:
        a0 = np.zeros((dim, dim), dtype=np.complex128)
        a0[0, 0] = 1.0
        ops = (a0, _lower_op(dim))
        clips = False
    elif kind is KrausKind.SPS_INCOHERENT:
        a0 = np.zeros((dim, dim), dtype=np.complex128)
        a0[0, 0] = 1.0
        ops = (a0,) + tuple(_rank_one(dim, n - 1, n) for n in range(1, dim))
        clips = False
    elif kind is KrausKind.SPS_POST_SELECTED:
        ops = (_lower_op(dim),)
        clips = False
    else:
        raise ValueError(f"unknown Kraus kind {kind!r}")
    return KrausSet(kind=kind, operators=ops, clips_top_level=clips)


def _rank_one(dim: int, i: int, j: int) -> np.ndarray:
    m = np.zeros((dim, dim), dtype=np.complex128)
    m[i, j] = 1.0
    return m


def apply_channel(
    kraus: KrausSet, rho: np.ndarray, top_tol: float = TOP_LEVEL_TOL
) -> tuple[np.ndarray, float]:
    """Apply ρ → Σ K ρ K†, renormalize, and report the pre-normalization trace.

    For adder kinds the top-Fock population must not exceed ``top_tol``, so
    that the truncated Â† loses nothing.  The subtractor sets are complete and
    the pre-normalization trace equals 1 up to round-off for any valid input.
    """
    dim = kraus.operators[0].shape[0]
    if rho.shape != (dim, dim):
        raise DimensionMismatchError(f"state is {rho.shape}, channel dimension is {dim}")
    if kraus.is_adder:
        top = float(rho[dim - 1, dim - 1].real)
        if top > top_tol:
            raise LeakageError(
                f"top Fock level holds population {top:.3e} > {top_tol:.1e}; "
                "the truncated adder would clip it"
            )
    out = np.zeros_like(rho)
    for k in kraus.operators:
        out += k @ rho @ k.conj().T
    pre_trace = float(np.trace(out).real)
    if pre_trace <= 0.0:
        raise LeakageError(f"channel output trace {pre_trace:.3e} is not positive")
    return out / pre_trace, pre_trace


def default_defect_cutoff(alpha: complex) -> int:
    lam = abs(alpha) ** 2
    return max(25, math.ceil(lam + 10.0 * math.sqrt(lam) + 25.0))


def ladder_defect(alpha: complex, layout: SpaceLayout | None = None) -> float:
    """Photon-number increase of the normalized state â†|α⟩ over |α|².

    Computed numerically on the truncated space; equals
    1 + |α|²/(|α|²+1) up to truncation error.
    """
    if layout is None:
        layout = SpaceLayout(default_defect_cutoff(alpha))
    built = build_cavity_state(Coherent(alpha), layout)  # raises on leakage
    amps = built.amplitudes
    raised = creation(layout) @ amps
    raised /= np.linalg.norm(raised)
    n_op = number_operator(layout)
    n_raised = float(np.real(raised.conj() @ n_op @ raised))
    n_coh = float(np.real(amps.conj() @ n_op @ amps))
    return n_raised - n_coh
