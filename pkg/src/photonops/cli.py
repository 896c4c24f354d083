"""Command-line front end: simulate, optimize, channel, defect.

Outputs are plain CSV (header row, comma separated, LF endings, floats with
17 significant digits so re-reading reproduces the exact values) and JSON
summaries with sorted keys; nothing in the data files depends on wall-clock
time, so identical configs produce byte-identical outputs.

Exit codes: 0 success, 1 config/leakage error, 2 steady state not reached,
3 invariant violation, 4 too many failed grid points.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .asymptotic import AsymptoticMap
from .channels import KrausKind, apply_channel, build_kraus, default_defect_cutoff, ladder_defect
from .config import OutputSpec, ParsedConfig, load_config
from .dynamics import DeviceKind, Scenario, integrate
from .errors import (
    ConfigError,
    GridSearchError,
    InvariantViolationError,
    LeakageError,
    NotConvergedError,
)
from .hilbert import SpaceLayout
from .observables import QGridSpec, atom_populations, husimi_q, quadrature_stats, trace_out_atom
from .optimizer import grid_search, target_state
from .states import build_cavity_state
from .errors import PhotonOpsError

__all__ = ["main"]


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _csv(header: list[str], rows) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def _json(payload: dict) -> str:
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def _stats_dict(rho_c: np.ndarray) -> dict:
    qs = quadrature_stats(rho_c)
    return {
        "mean_n": qs.mean_n,
        "std_n": qs.std_n,
        "std_x1": qs.std_x1,
        "std_x2": qs.std_x2,
    }


def _q_csv(rho_c: np.ndarray, grid: QGridSpec, corner_tol: float) -> str:
    qgrid = husimi_q(rho_c, grid, corner_tol=corner_tol)
    re = qgrid.spec.re_points
    im = qgrid.spec.im_points
    rows = (
        (re[i], im[j], qgrid.values[i, j])
        for i in range(len(re))
        for j in range(len(im))
    )
    return _csv(["re_alpha", "im_alpha", "q"], rows)


def _write_all(out_dir: Path, files: dict[str, str]) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    for name, content in files.items():
        (out_dir / name).write_text(content, encoding="utf-8", newline="\n")


def _ideal_kinds(device: DeviceKind) -> tuple[KrausKind, KrausKind]:
    if device is DeviceKind.ADDER:
        return KrausKind.SPA_COHERENT, KrausKind.SPA_INCOHERENT
    return KrausKind.SPS_COHERENT, KrausKind.SPS_INCOHERENT


def cmd_simulate(cfg: ParsedConfig, out_dir: Path) -> int:
    scenario = cfg.scenario()
    outputs = cfg.outputs
    if not outputs.any_enabled:
        raise ConfigError("no outputs enabled; set timeseries, summary, or qfunction")

    traj = integrate(scenario)
    if traj.converged_at is None:
        raise NotConvergedError(
            f"trajectory residual {traj.residuals[-1]:.3e} never dropped below "
            f"steady_tol={scenario.steady_tol:.1e} by t_end={scenario.t_end}",
            residual=float(traj.residuals[-1]),
        )
    asym = AsymptoticMap(scenario.device, scenario.g, scenario.layout, scenario.gamma)
    steady_joint = asym.apply(traj.final_state)
    steady_c = trace_out_atom(steady_joint, scenario.layout)

    built = build_cavity_state(scenario.initial, scenario.layout, scenario.leak_tol)
    rho_c0 = np.outer(built.amplitudes, built.amplitudes.conj())
    coh_kind, incoh_kind = _ideal_kinds(scenario.device)
    top_tol = max(scenario.leak_tol, 1e-8)
    ideal_coh, _ = apply_channel(build_kraus(coh_kind, scenario.layout), rho_c0, top_tol)
    ideal_incoh, _ = apply_channel(build_kraus(incoh_kind, scenario.layout), rho_c0, top_tol)

    files: dict[str, str] = {}
    if outputs.timeseries:
        rows = []
        for t, state in zip(traj.times, traj.states):
            qs = quadrature_stats(trace_out_atom(state, scenario.layout))
            pg, ps, pe = atom_populations(state, scenario.layout)
            rows.append((t, qs.mean_n, qs.std_n, qs.std_x1, qs.std_x2, pg, ps, pe))
        files["timeseries.csv"] = _csv(
            ["t", "mean_n", "std_n", "std_x1", "std_x2", "pop_g", "pop_s", "pop_e"], rows
        )
    if outputs.summary:
        from .observables import uhlmann_fidelity

        pg, ps, pe = atom_populations(steady_joint, scenario.layout)
        fid = uhlmann_fidelity(steady_c, ideal_coh)
        files["summary.json"] = _json(
            {
                "scenario": _scenario_dict(scenario),
                "initial": {
                    **_stats_dict(rho_c0),
                    "renorm_factor": built.renorm_factor,
                    "tail_mass": built.tail_mass,
                },
                "steady": {
                    **_stats_dict(steady_c),
                    "atom_populations": {"g": pg, "s": ps, "e": pe},
                },
                "convergence": {
                    "converged_at": traj.converged_at,
                    "steady_tol": scenario.steady_tol,
                    "final_residual": float(traj.residuals[-1]),
                    "trace_correction": traj.correction,
                },
                "comparison": {
                    "simulated": _stats_dict(steady_c),
                    "ideal_incoherent": _stats_dict(ideal_incoh),
                    "ideal_coherent": _stats_dict(ideal_coh),
                    "fidelity_to_coherent_target": fid**2,
                    "uhlmann_fidelity_to_coherent_target": fid,
                },
            }
        )
    q_sources = {"initial": rho_c0, "steady": steady_c, "ideal_target": ideal_coh}
    for name in outputs.q_states:
        if name not in q_sources:
            raise ConfigError(f"qfunction state {name!r} not available in simulate")
        files[f"q_{name}.csv"] = _q_csv(q_sources[name], outputs.q_grid, outputs.q_corner_tol)

    _write_all(out_dir, files)
    return 0


def _scenario_dict(scenario: Scenario) -> dict:
    pulse = scenario.pulse
    return {
        "device": scenario.device.value,
        "cavity_cutoff": scenario.layout.cavity_cutoff,
        "g": scenario.g,
        "gamma": scenario.gamma,
        "t_end": scenario.t_end,
        "dt": scenario.dt,
        "steady_tol": scenario.steady_tol,
        "sample_every": scenario.sample_every,
        "pulse": None if pulse is None else {"omega": pulse.omega, "tau": pulse.tau},
    }


def cmd_optimize(cfg: ParsedConfig, out_dir: Path, threads: int) -> int:
    if cfg.grid is None:
        raise ConfigError("optimize needs a [grid] section")
    scenario = cfg.scenario()
    surface = grid_search(scenario, cfg.grid, threads=threads)

    rows = []
    for i, om in enumerate(surface.grid.omegas):
        for j, ta in enumerate(surface.grid.taus):
            rows.append((om, ta, surface.values[i, j]))
    files = {
        "fidelity_surface.csv": _csv(["omega", "tau", "fidelity"], rows),
        "optimum.json": _json(
            {
                "omega": surface.best_omega,
                "tau": surface.best_tau,
                "fidelity": surface.best_fidelity,
                "n_missing": surface.n_missing,
                "grid": {
                    "omega_min": cfg.grid.omega_min,
                    "omega_max": cfg.grid.omega_max,
                    "tau_min": cfg.grid.tau_min,
                    "tau_max": cfg.grid.tau_max,
                    "n_omega": cfg.grid.n_omega,
                    "n_tau": cfg.grid.n_tau,
                },
                "scenario": _scenario_dict(scenario),
            }
        ),
    }
    _write_all(out_dir, files)
    return 0


def cmd_channel(cfg: ParsedConfig, out_dir: Path) -> int:
    if cfg.channel_kind is None:
        raise ConfigError("channel needs a [channel] section with a kind")
    built = build_cavity_state(cfg.initial, cfg.layout, cfg.leak_tol)
    rho_in = np.outer(built.amplitudes, built.amplitudes.conj())
    kraus = build_kraus(cfg.channel_kind, cfg.layout)
    rho_out, pre_trace = apply_channel(kraus, rho_in, top_tol=max(cfg.leak_tol, 1e-8))

    files = {
        "channel_summary.json": _json(
            {
                "kind": cfg.channel_kind.value,
                "cavity_cutoff": cfg.layout.cavity_cutoff,
                "pre_normalization_trace": pre_trace,
                "input": {
                    **_stats_dict(rho_in),
                    "renorm_factor": built.renorm_factor,
                    "tail_mass": built.tail_mass,
                },
                "output": _stats_dict(rho_out),
            }
        )
    }
    q_sources = {"initial": rho_in, "output": rho_out}
    for name in cfg.outputs.q_states:
        if name not in q_sources:
            raise ConfigError(
                f"qfunction state {name!r} not available in channel (use initial/output)"
            )
        files[f"q_channel_{name}.csv"] = _q_csv(
            q_sources[name], cfg.outputs.q_grid, cfg.outputs.q_corner_tol
        )
    _write_all(out_dir, files)
    return 0


def cmd_defect(alpha: complex, cutoff: int | None) -> int:
    layout = SpaceLayout(cutoff) if cutoff is not None else SpaceLayout(default_defect_cutoff(alpha))
    numeric = ladder_defect(alpha, layout)
    a2 = abs(alpha) ** 2
    closed = 1.0 + a2 / (a2 + 1.0)
    print(f"alpha = {alpha}")
    print(f"numeric photon-number increase = {_fmt(numeric)}")
    print(f"closed form 1 + |a|^2/(|a|^2+1) = {_fmt(closed)}")
    if abs(numeric - closed) > 1e-6:
        raise InvariantViolationError(
            f"numeric defect deviates from the closed form by {abs(numeric - closed):.3e}"
        )
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="photonops",
        description="Single-photon adder/subtractor simulations (units: gamma = 1)",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", required=True, help="path to a run configuration file")
        p.add_argument("--out", default=".", help="output directory (default: current)")
        p.add_argument(
            "--threads", type=int, default=0, help="parallel workers, 0 = all cores"
        )

    add_common(sub.add_parser("simulate", help="integrate a scenario and write time series"))
    add_common(sub.add_parser("optimize", help="grid-search the control pulse"))
    add_common(sub.add_parser("channel", help="apply an ideal Kraus channel (no dynamics)"))

    defect = sub.add_parser("defect", help="photon-number defect of the bare ladder operator")
    defect.add_argument("--alpha", required=True, help="coherent amplitude (complex accepted)")
    defect.add_argument("--cutoff", type=int, default=None, help="cavity cutoff override")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "defect":
            try:
                alpha = complex(args.alpha)
            except ValueError:
                raise ConfigError(f"cannot parse --alpha value {args.alpha!r}")
            return cmd_defect(alpha, args.cutoff)
        cfg = load_config(args.config)
        out_dir = Path(args.out)
        if args.command == "simulate":
            return cmd_simulate(cfg, out_dir)
        if args.command == "optimize":
            return cmd_optimize(cfg, out_dir, args.threads)
        if args.command == "channel":
            return cmd_channel(cfg, out_dir)
        raise ConfigError(f"unknown command {args.command!r}")
    except (ConfigError, LeakageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NotConvergedError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except InvariantViolationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except GridSearchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except PhotonOpsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
