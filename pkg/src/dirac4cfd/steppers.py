"""Time steppers: implicit and semi-implicit compact schemes.

Both schemes replace the spatial derivative by the fourth-order compact
approximation A_h^-1 delta_x.  The semi-implicit scheme is a three-level
leapfrog whose stiff part decouples per Fourier mode into 2x2 solves; the
implicit scheme is a Crank-Nicolson-type two-level scheme whose coupled
system is solved by fixed-point iteration with the constant-coefficient part
inverted exactly in Fourier space.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import tssp
from .config import (
    STEP_COUNT_RTOL,
    SCHEME_IMPLICIT,
    SCHEME_SEMI_IMPLICIT,
    SCHEME_TSSP,
    SchemeConfig,
)
from .grids import Grid, SpinorField
from .pauli import combo_apply, combo_solve
from .potentials import PotentialSet
from .spectral import gamma_modes, spectral_derivative
from .observables import discrete_energy, mass_l2


class SolverError(RuntimeError):
    """Raised when the implicit scheme's iteration fails to converge."""

    def __init__(self, message: str, residuals: list[float]):
        super().__init__(message)
        self.residuals = residuals


class StabilityError(RuntimeError):
    """Raised when a run violates the semi-implicit stability condition."""


@dataclass
class TwoLevelState:
    """The (Phi^{n-1}, Phi^n) pair the semi-implicit scheme advances."""

    phi_curr: SpinorField
    phi_prev: SpinorField
    n: int
    t: float


@dataclass
class StabilityReport:
    tau_max: float
    ok: bool
    scheme: str
    v_max: float
    a_max: list[float]


@dataclass
class RunResult:
    grid: Grid
    cfg: SchemeConfig
    final: SpinorField
    snapshots: dict
    times: np.ndarray | None = None
    mass: np.ndarray | None = None
    energy: np.ndarray | None = None
    stability: StabilityReport | None = None


def check_stability(cfg: SchemeConfig, pots: PotentialSet, grid: Grid) -> StabilityReport:
    """Stability gate: tau <= 1/(V_max + sum_j A_max[j]) for the semi-implicit scheme.

    The implicit scheme is unconditionally stable and always passes.
    """
    v_max, a_max = pots.maxima(grid, cfg.t_final, cfg.tau)
    denom = v_max + sum(a_max)
    tau_max = np.inf if denom == 0.0 else 1.0 / denom
    ok = True if cfg.scheme == SCHEME_IMPLICIT else cfg.tau <= tau_max
    return StabilityReport(tau_max=tau_max, ok=ok, scheme=cfg.scheme,
                           v_max=v_max, a_max=a_max)


def amplification_factor(l: int, n: int, h: float, eps: float, tau: float,
                         v0: float, a10: float, sign: int = 1) -> complex:
    """Von Neumann amplification factor of the implicit scheme, frozen potentials.

    eta_l = (2 + i*tau*theta_l)/(2 - i*tau*theta_l) with
    theta_l = -V0 +/- (1/(eps*h)) * sqrt(h^2 + (-eps*A10*h + sin(mu_l h)/gamma_l)^2),
    which has unit modulus for every mode.
    """
    mu_h = 2.0 * np.pi * l / n
    g = (np.cos(mu_h) + 2.0) / 3.0
    theta = -v0 + sign * np.sqrt(h * h + (-eps * a10 * h + np.sin(mu_h) / g) ** 2) / (eps * h)
    return (2.0 + 1j * tau * theta) / (2.0 - 1j * tau * theta)


def first_step(phi0: SpinorField, dphi0, pots_t0, cfg: SchemeConfig) -> SpinorField:
    """Starting value Phi^1 for the semi-implicit scheme.

    Phi^1 = Phi_0 - sin(tau/eps) * sum_j sigma_j d_jPhi_0
            - i*[sin(tau/eps)*sigma_3 + tau*(V0*I - sum_j A0_j*sigma_j)] * Phi_0.

    dphi0 supplies the spatial derivative(s) of Phi_0 (a SpinorField in 1D, a
    pair in 2D); pass None to fall back to the spectral derivative.  pots_t0
    is the (V, [A_j]) node arrays at t=0.
    """
    grid = phi0.grid
    v0, a0 = pots_t0
    s = np.sin(cfg.tau / cfg.epsilon)
    if dphi0 is None:
        dphi0 = tuple(spectral_derivative(phi0, axis=ax) for ax in range(1, grid.dim + 1))
    elif isinstance(dphi0, SpinorField):
        dphi0 = (dphi0,)
    out = phi0.values.copy()
    out -= s * combo_apply(0.0, 1.0, 0.0, 0.0, dphi0[0].values)
    if grid.dim == 2:
        out -= s * combo_apply(0.0, 0.0, 1.0, 0.0, dphi0[1].values)
    a2 = a0[1] if grid.dim == 2 else 0.0
    out -= 1j * (
        combo_apply(0.0, 0.0, 0.0, s, phi0.values)
        + cfg.tau * combo_apply(v0, -a0[0], -a2, 0.0, phi0.values)
    )
    return SpinorField(grid, out)


class _SemiImplicitKernel:
    """Per-mode 2x2 factors of the semi-implicit update, fixed (grid, eps, tau)."""

    def __init__(self, grid: Grid, eps: float, tau: float):
        self.grid = grid
        h = grid.h
        r = tau / eps
        g1 = gamma_modes(grid)
        s1 = np.sin(grid.mode_frequencies() * h)
        if grid.dim == 1:
            gam = g1
            b = r * s1 / h
            c = np.zeros_like(b)
        else:
            g2 = g1[None, :]
            g1 = g1[:, None]
            s2 = s1[None, :]
            s1 = s1[:, None]
            gam = g1 * g2
            # delta along an axis carries A_h^-1 only along that axis
            b = r * (s1 / h) * g2
            c = r * (s2 / h) * g1
        d = r * gam
        a = 1j * gam
        self.left = (a, -b, -c, -d)
        self.right = (a, b, c, d)
        self.two_tau_gamma = 2.0 * tau * gam
        det = a * a - b * b - c * c - d * d
        if not np.all(np.abs(det) >= gam * gam - 1e-300):
            raise AssertionError("semi-implicit mode matrix lost invertibility")
        # fused per-mode factors for the hot loop
        self._apd, self._amd = a + d, a - d
        self._bmic, self._bpic = b - 1j * c, b + 1j * c
        self._det = det
        self.axes = tuple(range(1, grid.dim + 1))
        if grid.dim == 1:
            self.fft = lambda v: np.fft.fft(v, axis=1)
            self.ifft = lambda v: np.fft.ifft(v, axis=1)
        else:
            self.fft = lambda v: np.fft.fft2(v, axes=(1, 2))
            self.ifft = lambda v: np.fft.ifft2(v, axes=(1, 2))

    def g_apply(self, v: np.ndarray, pot_v: np.ndarray, pot_a: list[np.ndarray]):
        a2 = pot_a[1] if self.grid.dim == 2 else 0.0
        return combo_apply(pot_v, -pot_a[0], -a2, 0.0, v)

    def step_hat(self, prev_hat: np.ndarray, curr_vals: np.ndarray,
                 pot_v: np.ndarray, pot_a: list[np.ndarray]) -> np.ndarray:
        """One step in spectral space (unnormalized FFT storage)."""
        g_hat = self.fft(self.g_apply(curr_vals, pot_v, pot_a))
        w = self.two_tau_gamma
        p0, p1 = prev_hat[0], prev_hat[1]
        # right apply: [[a+d, b-ic], [b+ic, a-d]] prev_hat + 2*tau*gamma*G~
        r0 = self._apd * p0 + self._bmic * p1 + w * g_hat[0]
        r1 = self._bpic * p0 + self._amd * p1 + w * g_hat[1]
        # left solve: the sign-flipped matrix has the analytic inverse
        # (1/det) [[a+d, b-ic], [b+ic, a-d]]
        return np.stack([
            (self._apd * r0 + self._bmic * r1) / self._det,
            (self._bpic * r0 + self._amd * r1) / self._det,
        ])


def semi_implicit_step(state: TwoLevelState, pots_tn, cfg: SchemeConfig) -> SpinorField:
    """Advance (Phi^{n-1}, Phi^n) to Phi^{n+1}; pots_tn are (V, [A_j]) at t_n."""
    kern = _SemiImplicitKernel(state.phi_curr.grid, cfg.epsilon, cfg.tau)
    prev_hat = kern.fft(state.phi_prev.values)
    v, a = pots_tn
    new_hat = kern.step_hat(prev_hat, state.phi_curr.values, v, a)
    return SpinorField(state.phi_curr.grid, kern.ifft(new_hat))


class _ImplicitKernel:
    """Fixed-point solver for the implicit scheme's coupled 1D system.

    The constant-coefficient factor (I +/- i*tau/2 * D_l) is diagonal per
    Fourier mode; the spatially varying potential term is lagged and the map
    iterated until the relative l2 residual drops below tol.
    """

    def __init__(self, grid: Grid, eps: float, tau: float,
                 tol: float = 1e-12, max_iter: int = 200):
        if grid.dim != 1:
            raise ValueError("the implicit scheme is 1D only")
        self.grid = grid
        self.tau = tau
        self.tol = tol
        self.max_iter = max_iter
        g = gamma_modes(grid)
        s = np.sin(grid.mode_frequencies() * grid.h)
        # D_l = (1/eps) [ (s_l/(h gamma_l)) sigma1 + sigma3 ]
        b = 0.5j * tau * s / (eps * grid.h * g)
        d = 0.5j * tau / eps * np.ones_like(b)
        self.left = (np.ones_like(b), b, np.zeros_like(b), d)
        self.right = (np.ones_like(b), -b, np.zeros_like(b), -d)

    def step(self, curr: np.ndarray, pot_v: np.ndarray, pot_a1: np.ndarray):
        tau = self.tau
        free_rhs_hat = combo_apply(*self.right, np.fft.fft(curr, axis=1))
        y = curr.copy()
        residuals: list[float] = []
        for _ in range(self.max_iter):
            g_hat = np.fft.fft(
                combo_apply(pot_v, -pot_a1, 0.0, 0.0, 0.5 * (y + curr)), axis=1)
            rhs_hat = free_rhs_hat - 1j * tau * g_hat
            y_hat = combo_solve(*self.left, rhs_hat)
            y = np.fft.ifft(y_hat, axis=1)
            # true residual of the solved iterate against its own rhs
            g_hat = np.fft.fft(
                combo_apply(pot_v, -pot_a1, 0.0, 0.0, 0.5 * (y + curr)), axis=1)
            rhs_hat = free_rhs_hat - 1j * tau * g_hat
            res_hat = combo_apply(*self.left, y_hat) - rhs_hat
            rhs_norm = np.linalg.norm(rhs_hat)
            res = float(np.linalg.norm(res_hat) / rhs_norm) if rhs_norm > 0 else 0.0
            residuals.append(res)
            if res <= self.tol:
                return y, residuals
        raise SolverError(
            f"implicit solve did not reach tol={self.tol} in {self.max_iter} iterations",
            residuals,
        )


def implicit_step_1d(phi_n: SpinorField, pots_half, cfg: SchemeConfig) -> SpinorField:
    """One implicit step; pots_half are (V, [A_1]) sampled at t_n + tau/2."""
    kern = _ImplicitKernel(phi_n.grid, cfg.epsilon, cfg.tau,
                           tol=cfg.linear_solver_tol)
    v, a = pots_half
    vals, _ = kern.step(phi_n.values, v, a[0])
    return SpinorField(phi_n.grid, vals)


def _snapshot_steps(cfg: SchemeConfig) -> dict[int, float]:
    out: dict[int, float] = {}
    for t in cfg.snapshot_times:
        k = round(t / cfg.tau)
        if abs(k * cfg.tau - t) > STEP_COUNT_RTOL * max(1.0, abs(t)):
            raise ValueError(f"snapshot time {t} is not a multiple of tau={cfg.tau}")
        out[k] = t
    return out


def run(cfg: SchemeConfig, grid: Grid, phi0: SpinorField, pots: PotentialSet,
        dphi0=None, diagnostics: bool = False,
        allow_unstable: bool = False) -> RunResult:
    """Integrate to T_0 and collect snapshots and per-step diagnostics.

    Semi-implicit runs refuse to start when tau violates the stability
    condition unless allow_unstable is set.  Energy diagnostics are recorded
    only for time-independent potentials.
    """
    report = check_stability(cfg, pots, grid)
    if not report.ok and not allow_unstable:
        raise StabilityError(
            f"tau={cfg.tau} exceeds the stability bound tau_max={report.tau_max:.6g}; "
            "pass allow_unstable to override"
        )
    if cfg.scheme == SCHEME_TSSP:
        snap_at = _snapshot_steps(cfg)
        vals, snaps, masses = tssp.propagate(
            grid, phi0.values, pots, cfg.epsilon, cfg.tau, cfg.n_steps,
            snapshot_steps=snap_at.keys(), collect_mass=diagnostics)
        return RunResult(
            grid=grid, cfg=cfg, final=SpinorField(grid, vals),
            snapshots={snap_at[k]: SpinorField(grid, v) for k, v in snaps.items()},
            times=np.arange(cfg.n_steps + 1) * cfg.tau if diagnostics else None,
            mass=np.array(masses) if diagnostics else None,
            stability=report,
        )
    if cfg.scheme == SCHEME_IMPLICIT and grid.dim != 1:
        raise ValueError("the implicit scheme is implemented in 1D only")

    n_steps = cfg.n_steps
    snap_at = _snapshot_steps(cfg)
    snapshots: dict[float, SpinorField] = {}
    track_energy = diagnostics and not pots.time_dependent
    masses: list[float] = []
    energies: list[float] = []
    pot_static = None if pots.time_dependent else pots.sample(grid, 0.0)

    def record(vals: np.ndarray, k: int):
        f = SpinorField(grid, vals)
        if k in snap_at:
            snapshots[snap_at[k]] = f.copy()
        if diagnostics:
            masses.append(mass_l2(f))
            if track_energy:
                energies.append(discrete_energy(f, pot_static, cfg.epsilon))

    record(phi0.values, 0)

    if cfg.scheme == SCHEME_IMPLICIT:
        kern = _ImplicitKernel(grid, cfg.epsilon, cfg.tau, tol=cfg.linear_solver_tol)
        curr = phi0.values.copy()
        for k in range(n_steps):
            ph = pot_static if pot_static is not None else pots.sample(
                grid, (k + 0.5) * cfg.tau)
            curr, _ = kern.step(curr, ph[0], ph[1][0])
            record(curr, k + 1)
        final = SpinorField(grid, curr)
    else:
        kern = _SemiImplicitKernel(grid, cfg.epsilon, cfg.tau)
        pot0 = pot_static if pot_static is not None else pots.sample(grid, 0.0)
        phi1 = first_step(phi0, dphi0, pot0, cfg)
        record(phi1.values, 1)
        prev_hat = kern.fft(phi0.values)
        curr_hat = kern.fft(phi1.values)
        curr_vals = phi1.values
        tracking = diagnostics or bool(snap_at)
        for k in range(1, n_steps):
            pn = pot_static if pot_static is not None else pots.sample(grid, k * cfg.tau)
            new_hat = kern.step_hat(prev_hat, curr_vals, pn[0], pn[1])
            prev_hat, curr_hat = curr_hat, new_hat
            curr_vals = kern.ifft(curr_hat)
            if tracking:
                record(curr_vals, k + 1)
        final = SpinorField(grid, np.ascontiguousarray(curr_vals))

    return RunResult(
        grid=grid, cfg=cfg, final=final, snapshots=snapshots,
        times=np.arange(n_steps + 1) * cfg.tau if diagnostics else None,
        mass=np.array(masses) if diagnostics else None,
        energy=np.array(energies) if track_energy and diagnostics else None,
        stability=report,
    )
