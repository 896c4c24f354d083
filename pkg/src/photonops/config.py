"""Plain-text run configuration files.

INI-style sections ``[scenario]``, ``[pulse]``, ``[grid]``, ``[outputs]``
(plus ``[channel]`` for the channel command); all physical values in γ = 1
units.  See docs/config_reference.md for the full schema and
``configs/`` for one worked example per reference figure.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from pathlib import Path

from .channels import KrausKind
from .dynamics import DeviceKind, PulseParams, Scenario
from .errors import ConfigError
from .hilbert import SpaceLayout
from .observables import QGridSpec
from .optimizer import GridSpec
from .states import (
    DEFAULT_LEAK_TOL,
    Coherent,
    FockSuperposition,
    InitialStateSpec,
    SqueezedVacuum,
)

__all__ = ["OutputSpec", "ParsedConfig", "load_config"]

Q_STATE_NAMES = ("initial", "steady", "ideal_target", "output")


@dataclass(frozen=True)
class OutputSpec:
    timeseries: bool = True
    summary: bool = True
    q_states: tuple[str, ...] = ()
    q_grid: QGridSpec = field(default_factory=QGridSpec)
    q_corner_tol: float = 1e-4

    @property
    def any_enabled(self) -> bool:
        return self.timeseries or self.summary or bool(self.q_states)


@dataclass(frozen=True)
class ParsedConfig:
    initial: InitialStateSpec
    layout: SpaceLayout
    leak_tol: float
    device: DeviceKind | None
    g: float
    gamma: float
    t_end: float
    dt: float
    steady_tol: float
    sample_every: int
    pulse: PulseParams | None
    grid: GridSpec | None
    outputs: OutputSpec
    channel_kind: KrausKind | None

    def scenario(self) -> Scenario:
        if self.device is None:
            raise ConfigError("[scenario] section must set device = adder | subtractor")
        try:
            return Scenario(
                device=self.device,
                initial=self.initial,
                layout=self.layout,
                g=self.g,
                gamma=self.gamma,
                pulse=self.pulse,
                t_end=self.t_end,
                dt=self.dt,
                steady_tol=self.steady_tol,
                sample_every=self.sample_every,
                leak_tol=self.leak_tol,
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc


def _get(section, key, conv, default=None, required=False):
    if key not in section:
        if required:
            raise ConfigError(f"missing required key {key!r} in [{section.name}]")
        return default
    raw = section[key].strip()
    try:
        return conv(raw)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"bad value for {key!r} in [{section.name}]: {raw!r}") from exc


def _parse_fock_terms(raw: str) -> FockSuperposition:
    terms = []
    for piece in raw.split(","):
        piece = piece.strip()
        if not piece:
            continue
        if ":" not in piece:
            raise ConfigError(f"fock_terms entries must be n:amplitude, got {piece!r}")
        n_str, amp_str = piece.split(":", 1)
        terms.append((int(n_str), complex(amp_str.strip())))
    if not terms:
        raise ConfigError("fock_terms is empty")
    try:
        return FockSuperposition(tuple(terms))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _parse_initial(section) -> InitialStateSpec:
    kind = _get(section, "initial", str, required=True).lower()
    if kind == "fock":
        raw = _get(section, "fock_terms", str, required=True)
        return _parse_fock_terms(raw)
    if kind == "coherent":
        return Coherent(_get(section, "alpha", complex, required=True))
    if kind == "squeezed":
        r = _get(section, "r", float, required=True)
        theta = _get(section, "theta", float, default=0.0)
        try:
            return SqueezedVacuum(r, theta)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    raise ConfigError(f"initial must be fock | coherent | squeezed, got {kind!r}")


def _parse_bool(raw: str) -> bool:
    lowered = raw.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ValueError(raw)


def load_config(path: str | Path) -> ParsedConfig:
    """Parse and validate a run configuration file."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        parser.read(path)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc
    if "scenario" not in parser:
        raise ConfigError("config must contain a [scenario] section")
    sc = parser["scenario"]

    initial = _parse_initial(sc)
    cutoff = _get(sc, "cavity_cutoff", int, required=True)
    if cutoff < 1:
        raise ConfigError("cavity_cutoff must be >= 1")
    layout = SpaceLayout(cutoff)

    device_raw = _get(sc, "device", str)
    device = None
    if device_raw is not None:
        try:
            device = DeviceKind(device_raw.lower())
        except ValueError:
            raise ConfigError(f"device must be adder or subtractor, got {device_raw!r}")

    pulse = None
    if "pulse" in parser:
        ps = parser["pulse"]
        pulse = PulseParams(
            omega=_get(ps, "omega", float, required=True),
            tau=_get(ps, "tau", float, required=True),
        )

    grid = None
    if "grid" in parser:
        gs = parser["grid"]
        try:
            grid = GridSpec(
                omega_min=_get(gs, "omega_min", float, default=5.0),
                omega_max=_get(gs, "omega_max", float, default=30.0),
                tau_min=_get(gs, "tau_min", float, default=0.05),
                tau_max=_get(gs, "tau_max", float, default=0.30),
                n_omega=_get(gs, "n_omega", int, default=26),
                n_tau=_get(gs, "n_tau", int, default=26),
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    outputs = OutputSpec()
    if "outputs" in parser:
        out = parser["outputs"]
        q_raw = _get(out, "qfunction", str, default="")
        q_states = tuple(s.strip() for s in q_raw.split(",") if s.strip())
        for name in q_states:
            if name not in Q_STATE_NAMES:
                raise ConfigError(
                    f"unknown qfunction state {name!r}; allowed: {', '.join(Q_STATE_NAMES)}"
                )
        try:
            q_grid = QGridSpec(
                re_min=_get(out, "q_re_min", float, default=-3.0),
                re_max=_get(out, "q_re_max", float, default=3.0),
                im_min=_get(out, "q_im_min", float, default=-3.0),
                im_max=_get(out, "q_im_max", float, default=3.0),
                resolution=_get(out, "q_resolution", int, default=121),
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        outputs = OutputSpec(
            timeseries=_get(out, "timeseries", _parse_bool, default=True),
            summary=_get(out, "summary", _parse_bool, default=True),
            q_states=q_states,
            q_grid=q_grid,
            q_corner_tol=_get(out, "q_corner_tol", float, default=1e-4),
        )

    channel_kind = None
    if "channel" in parser:
        kind_raw = _get(parser["channel"], "kind", str, required=True)
        try:
            channel_kind = KrausKind(kind_raw.lower())
        except ValueError:
            raise ConfigError(f"unknown channel kind {kind_raw!r}")

    return ParsedConfig(
        initial=initial,
        layout=layout,
        leak_tol=_get(sc, "leak_tol", float, default=DEFAULT_LEAK_TOL),
        device=device,
        g=_get(sc, "g", float, default=10.0),
        gamma=_get(sc, "gamma", float, default=1.0),
        t_end=_get(sc, "t_end", float, default=20.0),
        dt=_get(sc, "dt", float, default=2e-4),
        steady_tol=_get(sc, "steady_tol", float, default=1e-3),
        sample_every=_get(sc, "sample_every", int, default=50),
        pulse=pulse,
        grid=grid,
        outputs=outputs,
        channel_kind=channel_kind,
    )
