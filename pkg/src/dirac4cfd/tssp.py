"""Time-splitting Fourier pseudospectral reference solver.

Strang composition of two exactly solvable flows: the constant-coefficient
part advances per Fourier mode by a closed-form 2x2 unitary, the potential
part advances per node by another.  Each step is potential half / free full /
potential half, so the composition is unitary and second order in the step.

This solver exists to manufacture reference solutions for the error tables;
it is spectrally accurate in space.
"""
from __future__ import annotations

from typing import Sequence

import numpy as np

from .grids import Grid, SpinorField
from .pauli import combo_apply, combo_matrix
from .potentials import PotentialSet


def free_propagator_mode(mu, eps: float, dt: float) -> np.ndarray:
    """exp(-i*dt*M) with M = (1/eps)(sum_j mu_j sigma_j + sigma_3), as a 2x2 matrix.

    M^2 = lambda^2 I with lambda = sqrt(1 + |mu|^2)/eps, so the exponential is
    cos(dt*lambda) I - i sin(dt*lambda) M/lambda.
    """
    mu = np.atleast_1d(np.asarray(mu, dtype=float))
    lam = np.sqrt(1.0 + np.sum(mu ** 2)) / eps
    cos, sin = np.cos(dt * lam), np.sin(dt * lam)
    mu2 = mu[1] if mu.size > 1 else 0.0
    return combo_matrix(
        cos,
        -1j * sin * mu[0] / (eps * lam),
        -1j * sin * mu2 / (eps * lam),
        -1j * sin / (eps * lam),
    )


def potential_propagator_point(v: float, a, dt: float) -> np.ndarray:
    """exp(-i*dt*(V I - sum_j A_j sigma_j)) at one node, as a 2x2 matrix."""
    a = np.atleast_1d(np.asarray(a, dtype=float))
    amp = float(np.sqrt(np.sum(a ** 2)))
    phase = np.exp(-1j * dt * v)
    # sin(dt*|A|)/|A| stays finite as |A| -> 0
    sinc = dt * np.sinc(dt * amp / np.pi)
    a2 = a[1] if a.size > 1 else 0.0
    return combo_matrix(
        phase * np.cos(dt * amp),
        phase * 1j * sinc * a[0],
        phase * 1j * sinc * a2,
        0.0,
    )


def _free_coeffs(grid: Grid, eps: float, dt: float):
    """Vectorized free-propagator coefficients over all modes, FFT order."""
    mu = grid.mode_frequencies()
    if grid.dim == 1:
        mu1, mu2 = mu, 0.0
        mu_sq = mu ** 2
    else:
        mu1, mu2 = mu[:, None], mu[None, :]
        mu_sq = mu1 ** 2 + mu2 ** 2
    lam = np.sqrt(1.0 + mu_sq) / eps
    cos, sin = np.cos(dt * lam), np.sin(dt * lam)
    f = -1j * sin / (eps * lam)
    return (cos.astype(complex), f * mu1, f * mu2, f)


def _potential_coeffs(v: np.ndarray, a: Sequence[np.ndarray], dt: float):
    """Vectorized potential-propagator coefficients over all nodes."""
    a1 = a[0]
    a2 = a[1] if len(a) > 1 else np.zeros_like(a1)
    amp = np.sqrt(a1 ** 2 + a2 ** 2)
    phase = np.exp(-1j * dt * v)
    sinc = dt * np.sinc(dt * amp / np.pi)
    return (
        phase * np.cos(dt * amp),
        phase * 1j * sinc * a1,
        phase * 1j * sinc * a2,
        np.zeros_like(phase),
    )


def tssp_step(field: SpinorField, pots: PotentialSet, eps: float, dt: float,
              t: float = 0.0) -> SpinorField:
    """One Strang step from t to t+dt (potential half, free, potential half)."""
    grid = field.grid
    axes = tuple(range(1, grid.dim + 1))
    free = _free_coeffs(grid, eps, dt)
    v1, a1 = pots.sample(grid, t + 0.25 * dt)
    p1 = _potential_coeffs(v1, a1, 0.5 * dt)
    if pots.time_dependent:
        v2, a2 = pots.sample(grid, t + 0.75 * dt)
        p2 = _potential_coeffs(v2, a2, 0.5 * dt)
    else:
        p2 = p1
    vals = combo_apply(*p1, field.values)
    hat = combo_apply(*free, np.fft.fftn(vals, axes=axes))
    vals = combo_apply(*p2, np.fft.ifftn(hat, axes=axes))
    return SpinorField(grid, vals)


def propagate(grid: Grid, phi0_vals: np.ndarray, pots: PotentialSet, eps: float,
              dt: float, n_steps: int, snapshot_steps: Sequence[int] = (),
              collect_mass: bool = False):
    """Integrate n_steps Strang steps; fast path caches static propagators.

    Returns (final_vals, {step: vals}, masses or None).
    """
    axes = tuple(range(1, grid.dim + 1))
    snap_set = set(snapshot_steps)
    snaps: dict[int, np.ndarray] = {}
    masses: list[float] = [] if collect_mass else None
    vol = grid.cell_volume()

    def note(vals, k):
        if k in snap_set:
            snaps[k] = vals.copy()
        if collect_mass:
            masses.append(float(vol * np.sum(np.abs(vals) ** 2)))

    vals = phi0_vals.astype(np.complex128, copy=True)
    note(vals, 0)
    free = _free_coeffs(grid, eps, dt)
    if not pots.time_dependent:
        v, a = pots.sample(grid, 0.0)
        half = _potential_coeffs(v, a, 0.5 * dt)
        for k in range(n_steps):
            vals = combo_apply(*half, vals)
            hat = combo_apply(*free, np.fft.fftn(vals, axes=axes))
            vals = combo_apply(*half, np.fft.ifftn(hat, axes=axes))
            note(vals, k + 1)
    else:
        for k in range(n_steps):
            t = k * dt
            v, a = pots.sample(grid, t + 0.25 * dt)
            p1 = _potential_coeffs(v, a, 0.5 * dt)
            v, a = pots.sample(grid, t + 0.75 * dt)
            p2 = _potential_coeffs(v, a, 0.5 * dt)
            vals = combo_apply(*p1, vals)
            hat = combo_apply(*free, np.fft.fftn(vals, axes=axes))
            vals = combo_apply(*p2, np.fft.ifftn(hat, axes=axes))
            note(vals, k + 1)
    return vals, snaps, masses


def restrict(field: SpinorField, coarse: Grid) -> SpinorField:
    """Read a fine-grid field at the nodes of a nested coarse grid (no interpolation)."""
    fine = field.grid
    if fine.dim != coarse.dim or fine.a != coarse.a or fine.b != coarse.b:
        raise ValueError("grids cover different domains")
    if fine.n % coarse.n != 0:
        raise ValueError(
            f"fine N={fine.n} is not a multiple of coarse N={coarse.n}")
    step = fine.n // coarse.n
    if fine.dim == 1:
        vals = field.values[:, ::step]
    else:
        vals = field.values[:, ::step, ::step]
    return SpinorField(coarse, vals.copy())


def compute_reference(grid_fine: Grid, phi0: SpinorField, pots: PotentialSet,
                      eps: float, tau_e: float,
                      sample_times: Sequence[float]) -> dict[float, SpinorField]:
    """Reference trajectory on a fine grid, sampled at the requested times.

    Every sample time must be an integer multiple of tau_e.
    """
    sample_times = sorted(set(float(t) for t in sample_times))
    if not sample_times:
        return {}
    steps = {}
    for t in sample_times:
        k = round(t / tau_e)
        if abs(k * tau_e - t) > 1e-9 * max(1.0, abs(t)):
            raise ValueError(f"sample time {t} is not a multiple of tau_e={tau_e}")
        steps[k] = t
    n_steps = max(steps)
    _, snaps, _ = propagate(grid_fine, phi0.values, pots, eps, tau_e, n_steps,
                            snapshot_steps=steps.keys())
    return {steps[k]: SpinorField(grid_fine, v) for k, v in snaps.items()}
