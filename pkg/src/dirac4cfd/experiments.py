"""Experiment presets and orchestration: sweeps, conservation runs, 2D dynamics.

Sweep cells are independent runs; DIRAC4CFD_THREADS caps how many execute
concurrently.  All table output goes through ConvergenceTable so the CSV
schema stays in one place.
"""
from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, asdict
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import oracles, tssp
from .config import (
    SCHEME_IMPLICIT,
    SCHEME_SEMI_IMPLICIT,
    SCHEME_TSSP,
    SchemeConfig,
)
from .grids import Grid, SpinorField, build_grid, sample_field
from .observables import (
    ErrorTriple,
    convergence_order,
    error_triple,
    mass_l2,
    relative_error,
    total_density,
)
from .potentials import (
    PotentialSet,
    honeycomb_initial,
    honeycomb_potentials,
    periodic_em_initial,
    periodic_em_potentials,
    standard_1d_initial,
    standard_1d_potentials,
)
from .steppers import amplification_factor, check_stability, run


@dataclass(frozen=True)
class Preset:
    name: str
    dim: int
    a: float
    b: float
    make_potentials: Callable[[], PotentialSet]
    initial: Callable
    default_n: int
    default_tau: float


_PRESETS = {
    "dirac1d-standard": Preset(
        "dirac1d-standard", 1, 0.0, 2.0 * np.pi,
        standard_1d_potentials, standard_1d_initial,
        default_n=128, default_tau=1e-4),
    "honeycomb-2d": Preset(
        "honeycomb-2d", 2, -32.0, 32.0,
        honeycomb_potentials, honeycomb_initial,
        default_n=512, default_tau=0.01),
    "periodic-em-2d": Preset(
        "periodic-em-2d", 2, 0.0, 2.0 * np.pi,
        periodic_em_potentials, periodic_em_initial,
        default_n=256, default_tau=0.01),
}


def get_preset(name: str) -> Preset:
    try:
        return _PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; known: {sorted(_PRESETS)}") from None


def preset_names() -> list[str]:
    return sorted(_PRESETS)


def sweep_workers() -> int:
    return max(1, int(os.environ.get("DIRAC4CFD_THREADS", "1")))


@dataclass
class ExperimentSpec:
    preset: str = "dirac1d-standard"
    scheme: str = SCHEME_SEMI_IMPLICIT
    epsilons: Sequence[float] = (1.0,)
    resolutions: Sequence[float] = ()  # N values (space axis) or tau values (time axis)
    t_final: float = 2.0
    tau: float | None = None          # companion / run time step
    n: int | None = None              # companion / run grid size
    ref_n: int = 512
    ref_tau: float = 1e-5
    gate_tol: float = 1e-7
    snapshot_times: Sequence[float] = ()
    out_dir: str = "dirac4cfd-out"
    seed: int = 0
    allow_unstable: bool = False
    linear_solver_tol: float = 1e-12

    def to_manifest(self) -> dict:
        d = asdict(self)
        d["epsilons"] = [float(e) for e in self.epsilons]
        d["resolutions"] = [float(r) for r in self.resolutions]
        d["snapshot_times"] = [float(t) for t in self.snapshot_times]
        return d


def snap_tau(t_final: float, raw_tau: float) -> float:
    """Adjust a time step so t_final/tau is exactly an integer."""
    return t_final / max(1, round(t_final / raw_tau))


def companion_tau(eps: float, t_final: float, base: float = 1e-4) -> float:
    """Default non-swept time step for spatial sweeps: base * eps^(3/2)."""
    return snap_tau(t_final, base * eps ** 1.5)


def sample_initial(preset: Preset, n: int) -> tuple[Grid, SpinorField]:
    grid = build_grid(preset.a, preset.b, n, preset.dim)
    return grid, sample_field(preset.initial, grid)


class ReferenceGateError(RuntimeError):
    """The two-reference self-convergence check failed."""


_REFERENCE_CACHE: dict = {}


def reference_solution(preset: Preset, eps: float, sample_times: Sequence[float],
                       ref_n: int = 512, ref_tau: float = 1e-5,
                       gate_tol: float = 1e-7) -> dict[float, SpinorField]:
    """Gated reference trajectory on the fine grid.

    Runs the splitting solver twice, at ref_tau and 2*ref_tau, and requires
    the two final fields to agree to gate_tol in relative l2 before the
    reference is trusted.  Results are cached per parameter set.
    """
    times = tuple(sorted(set(float(t) for t in sample_times)))
    key = (preset.name, float(eps), times, ref_n, float(ref_tau))
    if key in _REFERENCE_CACHE:
        return _REFERENCE_CACHE[key]
    grid, phi0 = sample_initial(preset, ref_n)
    pots = preset.make_potentials()
    ref_tau = snap_tau(max(times), ref_tau)
    fields = tssp.compute_reference(grid, phi0, pots, eps, ref_tau, times)
    t_end = max(times)
    coarse = tssp.compute_reference(grid, phi0, pots, eps, 2.0 * ref_tau, [t_end])
    dev = relative_error(coarse[t_end], fields[t_end], "phi")
    if dev > gate_tol:
        raise ReferenceGateError(
            f"reference self-convergence gate failed at eps={eps}: "
            f"tau_e vs 2*tau_e deviation {dev:.3e} > {gate_tol:.1e}")
    _REFERENCE_CACHE[key] = fields
    return fields


@dataclass
class ConvergenceTable:
    """Relative errors over (epsilon, resolution) with log2-ratio orders."""

    axis: str  # "h" or "tau"
    epsilons: list[float]
    resolutions: list[float]  # h values or tau values, strictly halving
    cells: dict = field(default_factory=dict)  # (eps, resolution) -> ErrorTriple
    diagonal: dict = field(default_factory=dict)  # (eps, resolution) -> bool

    def row(self, eps: float, which: str = "e_phi") -> list[float]:
        return [getattr(self.cells[(eps, r)], which) for r in self.resolutions]

    def orders(self, eps: float, which: str = "e_phi") -> list[float | None]:
        return convergence_order(self.row(eps, which))

    def write_csv(self, path) -> None:
        lines = ["epsilon,resolution,e_phi,e_rho,e_J,order_phi,order_rho,order_J,diagonal"]
        for eps in self.epsilons:
            orders = {w: self.orders(eps, w) for w in ("e_phi", "e_rho", "e_j")}
            for i, res in enumerate(self.resolutions):
                tri = self.cells[(eps, res)]
                ords = ["" if i == 0 or orders[w][i - 1] is None
                        else f"{orders[w][i - 1]:.6f}"
                        for w in ("e_phi", "e_rho", "e_j")]
                diag = int(self.diagonal.get((eps, res), False))
                lines.append(
                    f"{eps:.10e},{res:.10e},{tri.e_phi:.8e},{tri.e_rho:.8e},"
                    f"{tri.e_j:.8e},{ords[0]},{ords[1]},{ords[2]},{diag}")
        Path(path).write_text("\n".join(lines) + "\n")


def _check_halving(values: Sequence[float], what: str) -> None:
    for v0, v1 in zip(values, list(values)[1:]):
        if not np.isclose(v1, v0 / 2.0, rtol=1e-9):
            raise ValueError(f"{what} must halve between entries, got {v0} then {v1}")


def _map_cells(fn, cells):
    workers = sweep_workers()
    if workers == 1:
        return [fn(c) for c in cells]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, cells))


def converge_space(spec: ExperimentSpec) -> ConvergenceTable:
    """Spatial error table: sweep N (so h halves) at a small companion tau."""
    preset = get_preset(spec.preset)
    n_list = [int(n) for n in spec.resolutions]
    h_list = [(preset.b - preset.a) / n for n in n_list]
    _check_halving(h_list, "mesh size")
    pots = preset.make_potentials()
    table = ConvergenceTable("h", [float(e) for e in spec.epsilons], h_list)

    refs = {eps: reference_solution(preset, eps, [spec.t_final], spec.ref_n,
                                    spec.ref_tau, spec.gate_tol)[spec.t_final]
            for eps in table.epsilons}

    def cell(args):
        eps, n = args
        tau = spec.tau if spec.tau is not None else companion_tau(eps, spec.t_final)
        grid, phi0 = sample_initial(preset, n)
        cfg = SchemeConfig(eps, tau, spec.t_final, spec.scheme,
                           linear_solver_tol=spec.linear_solver_tol)
        res = run(cfg, grid, phi0, pots, allow_unstable=spec.allow_unstable)
        return error_triple(res.final, tssp.restrict(refs[eps], grid), eps)

    jobs = [(eps, n) for eps in table.epsilons for n in n_list]
    for (eps, n), tri in zip(jobs, _map_cells(cell, jobs)):
        h = (preset.b - preset.a) / n
        table.cells[(eps, h)] = tri
        # the eps-scalability diagonal h = O(eps^(1/4)): one column right per 2^4 in eps
        col = round(np.log2(1.0 / eps) / 4.0) + 1
        table.diagonal[(eps, h)] = h_list.index(h) == col if col < len(h_list) else False
    return table


def converge_time(spec: ExperimentSpec) -> ConvergenceTable:
    """Temporal error table: sweep tau at a fine fixed grid."""
    preset = get_preset(spec.preset)
    tau_list = [float(t) for t in spec.resolutions]
    _check_halving(tau_list, "time step")
    n = spec.n if spec.n is not None else 512
    pots = preset.make_potentials()
    table = ConvergenceTable("tau", [float(e) for e in spec.epsilons], tau_list)

    refs = {eps: reference_solution(preset, eps, [spec.t_final], spec.ref_n,
                                    spec.ref_tau, spec.gate_tol)[spec.t_final]
            for eps in table.epsilons}

    def cell(args):
        eps, tau = args
        grid, phi0 = sample_initial(preset, n)
        cfg = SchemeConfig(eps, snap_tau(spec.t_final, tau), spec.t_final, spec.scheme,
                           linear_solver_tol=spec.linear_solver_tol)
        res = run(cfg, grid, phi0, pots, allow_unstable=spec.allow_unstable)
        return error_triple(res.final, tssp.restrict(refs[eps], grid), eps)

    jobs = [(eps, tau) for eps in table.epsilons for tau in tau_list]
    for (eps, tau), tri in zip(jobs, _map_cells(cell, jobs)):
        table.cells[(eps, tau)] = tri
        # diagonal tau = O(eps^(3/2)): one column right per 2^(2/3) in eps
        col = round(1.5 * np.log2(1.0 / eps))
        table.diagonal[(eps, tau)] = tau_list.index(tau) == col if col < len(tau_list) else False
    return table


@dataclass
class ConservationResult:
    epsilons: list[float]
    times: np.ndarray
    mass: dict        # eps -> per-step mass series
    energy: dict      # eps -> per-step energy series
    mass_drift: dict  # eps -> max relative drift
    energy_drift: dict

    def write_csv(self, path) -> None:
        cols = ["step", "t"]
        for eps in self.epsilons:
            cols += [f"mass_eps={eps:.6g}", f"energy_eps={eps:.6g}"]
        lines = [",".join(cols)]
        for i, t in enumerate(self.times):
            row = [str(i), f"{t:.8e}"]
            for eps in self.epsilons:
                row += [f"{self.mass[eps][i]:.12e}", f"{self.energy[eps][i]:.12e}"]
            lines.append(",".join(row))
        Path(path).write_text("\n".join(lines) + "\n")


def conserve(spec: ExperimentSpec) -> ConservationResult:
    """Per-step mass and energy series for the implicit scheme, one run per eps."""
    preset = get_preset(spec.preset)
    if preset.dim != 1:
        raise ValueError("conservation runs use the 1D preset")
    pots = preset.make_potentials()
    n = spec.n if spec.n is not None else preset.default_n
    tau = spec.tau if spec.tau is not None else 0.01
    out = ConservationResult([float(e) for e in spec.epsilons], None, {}, {}, {}, {})

    def one(eps):
        grid, phi0 = sample_initial(preset, n)
        cfg = SchemeConfig(eps, tau, spec.t_final, SCHEME_IMPLICIT,
                           linear_solver_tol=spec.linear_solver_tol)
        return run(cfg, grid, phi0, pots, diagnostics=True)

    for eps, res in zip(out.epsilons, _map_cells(one, out.epsilons)):
        out.times = res.times
        out.mass[eps] = res.mass
        out.energy[eps] = res.energy
        out.mass_drift[eps] = float(np.max(np.abs(res.mass - res.mass[0])) / res.mass[0])
        out.energy_drift[eps] = float(
            np.max(np.abs(res.energy - res.energy[0])) / abs(res.energy[0]))
    return out


@dataclass
class Snapshot2D:
    time: float
    eps: float
    rho: np.ndarray
    grid: Grid


def dynamics2d(spec: ExperimentSpec) -> list[Snapshot2D]:
    """Total-density snapshots of a 2D run with the semi-implicit scheme."""
    preset = get_preset(spec.preset)
    if preset.dim != 2:
        raise ValueError(f"preset {preset.name} is not 2D")
    pots = preset.make_potentials()
    n = spec.n if spec.n is not None else preset.default_n
    tau = spec.tau if spec.tau is not None else preset.default_tau
    times = tuple(spec.snapshot_times) or (spec.t_final,)
    snaps: list[Snapshot2D] = []

    def one(eps):
        grid, phi0 = sample_initial(preset, n)
        cfg = SchemeConfig(eps, snap_tau(spec.t_final, tau), spec.t_final,
                           SCHEME_SEMI_IMPLICIT, snapshot_times=times)
        return grid, run(cfg, grid, phi0, pots, allow_unstable=spec.allow_unstable)

    for eps, (grid, res) in zip(spec.epsilons, _map_cells(one, list(spec.epsilons))):
        for t in times:
            snaps.append(Snapshot2D(float(t), float(eps),
                                    total_density(res.snapshots[t]), grid))
    return snaps


def write_snapshots(snaps: list[Snapshot2D], out_dir) -> list[str]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for s in snaps:
        stem = f"rho_eps{s.eps:g}_t{s.time:g}"
        np.save(out_dir / f"{stem}.npy", np.ascontiguousarray(s.rho))
        meta = {
            "time": s.time, "epsilon": s.eps,
            "grid": {"a": s.grid.a, "b": s.grid.b, "n": s.grid.n, "dim": s.grid.dim},
            "layout": "row-major float64, shape (n, n), rho[ix, iy] at x_ix, y_iy",
        }
        (out_dir / f"{stem}.json").write_text(json.dumps(meta, indent=2) + "\n")
        written.append(stem)
    return written


def support_radius(rho: np.ndarray, grid: Grid, threshold: float = 1e-3) -> float:
    """Largest node radius (from the origin) where rho exceeds the threshold."""
    x, y = grid.coords()
    r = np.sqrt(x ** 2 + y ** 2)
    mask = rho > threshold
    return float(r[mask].max()) if np.any(mask) else 0.0


def write_manifest(spec: ExperimentSpec, command: str, extra: dict | None = None) -> Path:
    out_dir = Path(spec.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest = {"command": command, **spec.to_manifest()}
    if extra:
        manifest.update(extra)
    path = out_dir / "run-manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path


def oracle_check(seed: int = 0) -> dict:
    """Cross-check the fast paths against brute-force oracles at small N.

    Returns a machine-readable report: {check: {"pass": bool, "max_err": float}}.
    """
    from .spectral import dft_forward, dft_inverse
    from .steppers import TwoLevelState, implicit_step_1d, semi_implicit_step

    rng = np.random.default_rng(seed)
    pots = standard_1d_potentials()
    eps, tau = 1.0, 0.01
    report = {}

    def rand_field(grid):
        shape = grid.field_shape()
        return SpinorField(grid, rng.standard_normal(shape) + 1j * rng.standard_normal(shape))

    semi_err = impl_err = 0.0
    for n in (8, 16):
        grid = build_grid(0.0, 2.0 * np.pi, n)
        v, a = pots.sample(grid, 0.0)
        for _ in range(20):
            prev, curr = rand_field(grid), rand_field(grid)
            cfg = SchemeConfig(eps, tau, tau, SCHEME_SEMI_IMPLICIT)
            fast = semi_implicit_step(TwoLevelState(curr, prev, 1, tau), (v, a), cfg)
            dense = oracles.dense_semi_implicit_step(prev, curr, v, a[0], eps, tau)
            semi_err = max(semi_err, float(np.max(np.abs(fast.values - dense.values))))
            cfg = SchemeConfig(eps, tau, tau, SCHEME_IMPLICIT, linear_solver_tol=1e-13)
            fast = implicit_step_1d(curr, (v, a), cfg)
            dense = oracles.dense_implicit_step(curr, v, a[0], eps, tau)
            impl_err = max(impl_err, float(np.max(np.abs(fast.values - dense.values))))
    report["dense_semi_implicit"] = {"pass": semi_err <= 1e-12, "max_err": semi_err}
    report["dense_implicit"] = {"pass": impl_err <= 1e-10, "max_err": impl_err}

    parseval_err = 0.0
    for n in (8, 16, 64):
        grid = build_grid(0.0, 2.0 * np.pi, n)
        f = rand_field(grid)
        spec_f = dft_forward(f)
        direct = mass_l2(f)
        via_modes = grid.length * float(np.sum(np.abs(spec_f.coefficients) ** 2))
        parseval_err = max(parseval_err, abs(direct - via_modes) / direct)
        roundtrip = dft_inverse(spec_f)
        parseval_err = max(parseval_err, float(
            np.max(np.abs(roundtrip.values - f.values))))
    report["parseval_roundtrip"] = {"pass": parseval_err <= 1e-12, "max_err": parseval_err}

    grid = build_grid(0.0, 2.0 * np.pi, 16)
    f = rand_field(grid)
    m0 = mass_l2(f)
    for _ in range(50):
        f = tssp.tssp_step(f, pots, eps, 0.05)
    unit_err = abs(mass_l2(f) - m0) / m0
    report["tssp_unitarity"] = {"pass": unit_err <= 1e-12, "max_err": unit_err}

    amp_err = 0.0
    for _ in range(10_000):
        n = 2 * rng.integers(2, 65)
        eta = amplification_factor(
            int(rng.integers(-n // 2, n // 2)), int(n),
            h=float(rng.uniform(0.01, 1.0)), eps=float(rng.uniform(0.01, 1.0)),
            tau=float(rng.uniform(1e-4, 0.5)), v0=float(rng.uniform(-2, 2)),
            a10=float(rng.uniform(-2, 2)), sign=int(rng.choice([-1, 1])))
        amp_err = max(amp_err, abs(abs(eta) - 1.0))
    report["amplification_modulus"] = {"pass": amp_err <= 1e-13, "max_err": amp_err}

    report["ok"] = all(v["pass"] for k, v in report.items() if k != "ok")
    return report
