"""Periodic uniform grids and two-component spinor fields.

Grids are 1D intervals or square 2D boxes sampled at N (even) nodes per
dimension.  Node N is identified with node 0; storage holds exactly N nodes
per dimension and periodic images are index arithmetic.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid on (a, b) (or (a, b)^2 for dim=2) with N nodes per axis."""

    a: float
    b: float
    n: int
    dim: int = 1

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ValueError(f"dim must be 1 or 2, got {self.dim}")
        if self.b <= self.a:
            raise ValueError(f"need b > a, got a={self.a}, b={self.b}")
        if self.n < 4 or self.n % 2 != 0:
            raise ValueError(f"N must be even and >= 4, got {self.n}")

    @property
    def h(self) -> float:
        return (self.b - self.a) / self.n

    @property
    def length(self) -> float:
        return self.b - self.a

    def nodes(self) -> np.ndarray:
        """Node coordinates x_j = a + j*h for j = 0..N-1 (one axis)."""
        return self.a + self.h * np.arange(self.n)

    def coords(self) -> tuple[np.ndarray, ...]:
        """Node coordinate arrays broadcastable to the field shape."""
        x = self.nodes()
        if self.dim == 1:
            return (x,)
        return np.meshgrid(x, x, indexing="ij")

    def mode_numbers(self) -> np.ndarray:
        """Integer mode indices l in {-N/2, ..., N/2-1}, FFT storage order."""
        return np.rint(np.fft.fftfreq(self.n) * self.n).astype(int)

    def mode_frequencies(self) -> np.ndarray:
        """Frequencies mu_l = 2*pi*l/(b-a), FFT storage order (one axis)."""
        return 2.0 * np.pi * self.mode_numbers() / self.length

    def field_shape(self) -> tuple[int, ...]:
        return (2,) + (self.n,) * self.dim

    def cell_volume(self) -> float:
        return self.h ** self.dim

    def refined(self, factor: int) -> "Grid":
        return Grid(self.a, self.b, self.n * factor, self.dim)


def build_grid(a: float, b: float, n: int, dim: int = 1) -> Grid:
    """Construct a periodic grid with mesh size h = (b-a)/N."""
    return Grid(float(a), float(b), int(n), int(dim))


@dataclass
class SpinorField:
    """Two-component complex field sampled at the interior nodes of a grid.

    values has shape (2, N) in 1D and (2, N, N) in 2D, component axis first.
    """

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.complex128)
        if self.values.shape != self.grid.field_shape():
            raise ValueError(
                f"values shape {self.values.shape} does not match grid "
                f"shape {self.grid.field_shape()}"
            )

    @classmethod
    def zeros(cls, grid: Grid) -> "SpinorField":
        return cls(grid, np.zeros(grid.field_shape(), dtype=np.complex128))

    def copy(self) -> "SpinorField":
        return SpinorField(self.grid, self.values.copy())

    def norm_l2(self) -> float:
        """Discrete l2 norm, sqrt(h^d * sum_j |U_j|^2)."""
        return float(np.sqrt(self.grid.cell_volume() * np.sum(np.abs(self.values) ** 2)))


def sample_field(f, grid: Grid) -> SpinorField:
    """Sample an analytic spinor-valued function at the grid nodes.

    f takes the node coordinate arrays (x in 1D; x, y in 2D) and returns the
    two components (phi1, phi2), each broadcastable to the node shape.
    """
    coords = grid.coords()
    c1, c2 = f(*coords)
    shape = (grid.n,) * grid.dim
    vals = np.empty(grid.field_shape(), dtype=np.complex128)
    vals[0] = np.broadcast_to(np.asarray(c1, dtype=np.complex128), shape)
    vals[1] = np.broadcast_to(np.asarray(c2, dtype=np.complex128), shape)
    if not np.all(np.isfinite(vals)):
        idx = tuple(np.argwhere(~np.isfinite(vals))[0][1:])
        loc = tuple(float(c[idx]) for c in coords)
        raise ValueError(f"initial data is not finite at node {loc}")
    return SpinorField(grid, vals)
