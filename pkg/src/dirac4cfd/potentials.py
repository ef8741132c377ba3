"""Electromagnetic potential sets and their sampled maxima.

A PotentialSet bundles the scalar potential V(t, x) with the magnetic
components A_j(t, x).  Evaluators are vectorized over numpy coordinate
arrays; the first argument is always time.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .grids import Grid


@dataclass
class PotentialSet:
    """V plus d magnetic components, with lazily computed suprema."""

    v: Callable
    a: Sequence[Callable]
    time_dependent: bool = False
    _maxima_cache: dict = field(default_factory=dict, repr=False)

    @property
    def dim(self) -> int:
        return len(self.a)

    def sample(self, grid: Grid, t: float) -> tuple[np.ndarray, list[np.ndarray]]:
        """Evaluate V and every A_j at the grid nodes at time t."""
        coords = grid.coords()
        shape = (grid.n,) * grid.dim
        v = np.broadcast_to(np.asarray(self.v(t, *coords), dtype=float), shape).copy()
        a_arrays = [
            np.broadcast_to(np.asarray(aj(t, *coords), dtype=float), shape).copy()
            for aj in self.a
        ]
        for arr in (v, *a_arrays):
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"potential evaluation not finite at t={t}")
        return v, a_arrays

    def maxima(self, grid: Grid, t_final: float, tau: float) -> tuple[float, list[float]]:
        """Sampled suprema (V_max, [A_max per component]) over the run's space-time box.

        Space is sampled on a 4x refinement of the run grid.  Time-independent
        potentials are sampled once at t=0; time-dependent ones at up to 64
        time levels spanning [0, t_final].
        """
        key = (grid.a, grid.b, grid.n, grid.dim, t_final if self.time_dependent else 0.0)
        if key in self._maxima_cache:
            return self._maxima_cache[key]
        fine = grid.refined(4)
        coords = fine.coords()
        if self.time_dependent:
            n_steps = max(1, int(round(t_final / tau)))
            times = np.linspace(0.0, t_final, min(n_steps + 1, 64))
            # the implicit scheme also samples half-integer times
            times = np.union1d(times, times[:-1] + 0.5 * (times[1] - times[0]))
        else:
            times = np.array([0.0])
        v_max = 0.0
        a_max = [0.0] * self.dim
        for t in times:
            v_max = max(v_max, float(np.max(np.abs(self.v(t, *coords)))))
            for j, aj in enumerate(self.a):
                a_max[j] = max(a_max[j], float(np.max(np.abs(aj(t, *coords)))))
        self._maxima_cache[key] = (v_max, a_max)
        return v_max, a_max


def sample_potentials(pots: PotentialSet, grid: Grid, t: float):
    """Functional wrapper around PotentialSet.sample."""
    return pots.sample(grid, t)


def zero_potentials(dim: int = 1) -> PotentialSet:
    zero = lambda t, *x: np.zeros_like(x[0])
    return PotentialSet(v=zero, a=[zero] * dim)


def standard_1d_potentials() -> PotentialSet:
    """V = 1/(1+sin^2 x), A_1 = sin(2x) on (0, 2*pi)."""
    return PotentialSet(
        v=lambda t, x: 1.0 / (1.0 + np.sin(x) ** 2),
        a=[lambda t, x: np.sin(2.0 * x)],
    )


def standard_1d_initial(x):
    return 1.0 / (1.0 + np.sin(x) ** 2), 1.0 / (3.0 + np.cos(x))


_HONEYCOMB_DIRS = (
    (-1.0, 0.0),
    (0.5, np.sqrt(3.0) / 2.0),
    (0.5, -np.sqrt(3.0) / 2.0),
)


def honeycomb_potentials() -> PotentialSet:
    """Honeycomb lattice electric potential, zero magnetic potential."""
    k = 4.0 * np.pi / np.sqrt(3.0)

    def v(t, x, y):
        return sum(np.cos(k * (e1 * x + e2 * y)) for e1, e2 in _HONEYCOMB_DIRS)

    zero = lambda t, x, y: np.zeros_like(x)
    return PotentialSet(v=v, a=[zero, zero])


def honeycomb_initial(x, y):
    return np.exp(-(x ** 2 + y ** 2) / 2.0), np.exp(-((x - 1.0) ** 2 + y ** 2) / 2.0)


def periodic_em_potentials() -> PotentialSet:
    """Periodic electromagnetic potentials on (0, 2*pi)^2."""
    return PotentialSet(
        v=lambda t, x, y: 1.0 / (1.0 + np.sin(x) ** 2 + np.cos(y) ** 2),
        a=[
            lambda t, x, y: np.sin(2.0 * x) * np.sin(2.0 * y),
            lambda t, x, y: 2.0 * np.sin(x) * np.cos(y),
        ],
    )


def periodic_em_initial(x, y):
    return (
        1.0 / (1.0 + np.sin(x) ** 2 + np.sin(y) ** 2),
        1.0 / (3.0 + np.cos(x) * np.sin(y)),
    )
