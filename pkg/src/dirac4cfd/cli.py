"""Command-line front end for the experiment harness.

Subcommands: converge-space, converge-time, conserve, dynamics2d,
oracle-check, solve.  Options come from an optional YAML config file plus
flag overrides; every run writes a run-manifest.json recording the
parameters it actually used.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np
import yaml

from . import experiments
from .config import SCHEME_IMPLICIT, SCHEME_SEMI_IMPLICIT, SCHEME_TSSP, SchemeConfig
from .experiments import ExperimentSpec, get_preset, sample_initial, snap_tau
from .observables import total_density
from .steppers import StabilityError, check_stability, run

_SCHEME_FLAG = {
    "implicit": SCHEME_IMPLICIT,
    "semi": SCHEME_SEMI_IMPLICIT,
    "tssp": SCHEME_TSSP,
}


def _parse_floats(text: str) -> list[float]:
    return [float(tok) for tok in text.replace(",", " ").split()]


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="YAML config file (flags override it)")
    p.add_argument("--preset", default=None, help="problem preset name")
    p.add_argument("--scheme", choices=sorted(_SCHEME_FLAG), default=None)
    p.add_argument("--epsilon", default=None,
                   help="epsilon value or comma-separated list")
    p.add_argument("--h", dest="mesh", type=float, default=None,
                   help="mesh size (converted to the nearest even N)")
    p.add_argument("--tau", type=float, default=None, help="time step")
    p.add_argument("--tfinal", type=float, default=None, help="final time T_0")
    p.add_argument("--out", type=Path, default=None, help="output directory")
    p.add_argument("--seed", type=int, default=None, help="RNG seed (randomized checks)")
    p.add_argument("--allow-unstable", action="store_true",
                   help="override the semi-implicit stability gate (prints a warning)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dirac4cfd",
        description="Compact finite difference Dirac solvers and experiments")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, desc in [
        ("converge-space", "spatial convergence table (sweep h)"),
        ("converge-time", "temporal convergence table (sweep tau)"),
        ("conserve", "implicit-scheme mass/energy time series"),
        ("dynamics2d", "2D density snapshots"),
        ("oracle-check", "brute-force oracle cross-checks"),
        ("solve", "single run"),
    ]:
        p = sub.add_parser(name, help=desc)
        _add_common(p)
    return parser


def spec_from_args(args) -> ExperimentSpec:
    values: dict = {}
    if args.config:
        loaded = yaml.safe_load(args.config.read_text()) or {}
        if not isinstance(loaded, dict):
            raise SystemExit(f"config {args.config} must be a mapping")
        values.update(loaded)
    if args.preset is not None:
        values["preset"] = args.preset
    if args.scheme is not None:
        values["scheme"] = _SCHEME_FLAG[args.scheme]
    if args.epsilon is not None:
        values["epsilons"] = _parse_floats(args.epsilon)
    if args.tau is not None:
        values["tau"] = args.tau
    if args.tfinal is not None:
        values["t_final"] = args.tfinal
    if args.out is not None:
        values["out_dir"] = str(args.out)
    if args.seed is not None:
        values["seed"] = args.seed
    if args.allow_unstable:
        values["allow_unstable"] = True
    spec = ExperimentSpec(**values)
    if args.mesh is not None:
        preset = get_preset(spec.preset)
        n = round((preset.b - preset.a) / args.mesh)
        spec.n = n + (n % 2)
    return spec


def _default_resolutions(spec: ExperimentSpec, axis: str) -> ExperimentSpec:
    if spec.resolutions:
        return spec
    if axis == "h":
        spec.resolutions = [32, 64, 128, 256]
    else:
        spec.resolutions = [0.05 / 2 ** k for k in range(7)]
    return spec


def cmd_converge_space(spec: ExperimentSpec) -> int:
    spec = _default_resolutions(spec, "h")
    table = experiments.converge_space(spec)
    out = Path(spec.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    table.write_csv(out / "converge-space.csv")
    experiments.write_manifest(spec, "converge-space")
    print(f"wrote {out / 'converge-space.csv'}")
    return 0


def cmd_converge_time(spec: ExperimentSpec) -> int:
    spec = _default_resolutions(spec, "tau")
    table = experiments.converge_time(spec)
    out = Path(spec.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    table.write_csv(out / "converge-time.csv")
    experiments.write_manifest(spec, "converge-time")
    print(f"wrote {out / 'converge-time.csv'}")
    return 0


def cmd_conserve(spec: ExperimentSpec) -> int:
    result = experiments.conserve(spec)
    out = Path(spec.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    result.write_csv(out / "conserve.csv")
    summary = {
        "mass_drift": {f"{e:g}": result.mass_drift[e] for e in result.epsilons},
        "energy_drift": {f"{e:g}": result.energy_drift[e] for e in result.epsilons},
    }
    (out / "conserve-summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    experiments.write_manifest(spec, "conserve", {"summary": summary})
    print(json.dumps(summary, indent=2))
    return 0


def cmd_dynamics2d(spec: ExperimentSpec) -> int:
    if not spec.snapshot_times:
        spec.snapshot_times = [spec.t_final]
    snaps = experiments.dynamics2d(spec)
    written = experiments.write_snapshots(snaps, spec.out_dir)
    experiments.write_manifest(spec, "dynamics2d", {"snapshots": written})
    print(f"wrote {len(written)} snapshot(s) to {spec.out_dir}")
    return 0


def cmd_oracle_check(spec: ExperimentSpec) -> int:
    report = experiments.oracle_check(spec.seed)
    print(json.dumps(report, indent=2))
    return 0 if report["ok"] else 1


def cmd_solve(spec: ExperimentSpec) -> int:
    preset = get_preset(spec.preset)
    n = spec.n if spec.n is not None else preset.default_n
    tau = snap_tau(spec.t_final, spec.tau if spec.tau is not None else preset.default_tau)
    grid, phi0 = sample_initial(preset, n)
    pots = preset.make_potentials()
    eps = float(spec.epsilons[0])
    cfg = SchemeConfig(eps, tau, spec.t_final, spec.scheme,
                       linear_solver_tol=spec.linear_solver_tol,
                       snapshot_times=tuple(spec.snapshot_times))
    report = check_stability(cfg, pots, grid)
    if not report.ok and spec.allow_unstable:
        print(f"warning: tau={cfg.tau:.6g} exceeds tau_max={report.tau_max:.6g}; "
              "continuing because --allow-unstable was given", file=sys.stderr)
    result = run(cfg, grid, phi0, pots, diagnostics=True,
                 allow_unstable=spec.allow_unstable)
    out = Path(spec.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    np.save(out / "final_field.npy", result.final.values)
    np.save(out / "final_density.npy", total_density(result.final))
    np.save(out / "mass_series.npy", result.mass)
    experiments.write_manifest(spec, "solve", {
        "n": n, "tau": cfg.tau, "tau_max": report.tau_max, "stable": report.ok})
    print(f"solved to T={spec.t_final} on N={n}; outputs in {out}")
    return 0


_COMMANDS = {
    "converge-space": cmd_converge_space,
    "converge-time": cmd_converge_time,
    "conserve": cmd_conserve,
    "dynamics2d": cmd_dynamics2d,
    "oracle-check": cmd_oracle_check,
    "solve": cmd_solve,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    spec = spec_from_args(args)
    try:
        return _COMMANDS[args.command](spec)
    except StabilityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, experiments.ReferenceGateError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
