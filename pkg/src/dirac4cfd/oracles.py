"""Dense brute-force counterparts of the 1D schemes, for cross-checking.

Everything here assembles the schemes as explicit 2N x 2N complex linear
systems (node-major spinor stacking, v[2j+c] = Phi_j[c]) and solves them with
dense linear algebra.  Intended for small N only; the oracle-check command
and the test suite compare these against the Fourier-space implementations.
"""
from __future__ import annotations

import numpy as np

from .grids import Grid, SpinorField
from .pauli import ID2, SIGMA1, SIGMA3


def circulant_delta_x(grid: Grid) -> np.ndarray:
    n, h = grid.n, grid.h
    m = np.zeros((n, n))
    for j in range(n):
        m[j, (j + 1) % n] = 1.0 / (2.0 * h)
        m[j, (j - 1) % n] = -1.0 / (2.0 * h)
    return m


def circulant_Ah(grid: Grid) -> np.ndarray:
    n = grid.n
    m = np.zeros((n, n))
    for j in range(n):
        m[j, j] = 4.0 / 6.0
        m[j, (j + 1) % n] = 1.0 / 6.0
        m[j, (j - 1) % n] = 1.0 / 6.0
    return m


def stack(field: SpinorField) -> np.ndarray:
    """Node-major flattening of a 1D field, shape (2N,)."""
    return field.values.T.reshape(-1)


def unstack(vec: np.ndarray, grid: Grid) -> SpinorField:
    return SpinorField(grid, vec.reshape(grid.n, 2).T.copy())


def free_operator(grid: Grid, eps: float) -> np.ndarray:
    """Dense (1/eps)(-i sigma1 A_h^-1 delta_x + sigma3), shape (2N, 2N)."""
    compact_dx = np.linalg.solve(circulant_Ah(grid), circulant_delta_x(grid))
    return (-1j / eps) * np.kron(compact_dx, SIGMA1) \
        + (1.0 / eps) * np.kron(np.eye(grid.n), SIGMA3)


def potential_operator(v: np.ndarray, a1: np.ndarray) -> np.ndarray:
    return np.kron(np.diag(v), ID2) - np.kron(np.diag(a1), SIGMA1)


def dense_semi_implicit_step(phi_prev: SpinorField, phi_curr: SpinorField,
                             v: np.ndarray, a1: np.ndarray,
                             eps: float, tau: float) -> SpinorField:
    grid = phi_curr.grid
    k = free_operator(grid, eps)
    eye = np.eye(2 * grid.n)
    lhs = (1j / (2.0 * tau)) * eye - 0.5 * k
    rhs = ((1j / (2.0 * tau)) * eye + 0.5 * k) @ stack(phi_prev) \
        + potential_operator(v, a1) @ stack(phi_curr)
    return unstack(np.linalg.solve(lhs, rhs), grid)


def dense_implicit_step(phi_n: SpinorField, v_half: np.ndarray, a1_half: np.ndarray,
                        eps: float, tau: float) -> SpinorField:
    grid = phi_n.grid
    full = free_operator(grid, eps) + potential_operator(v_half, a1_half)
    eye = np.eye(2 * grid.n)
    lhs = (1j / tau) * eye - 0.5 * full
    rhs = ((1j / tau) * eye + 0.5 * full) @ stack(phi_n)
    return unstack(np.linalg.solve(lhs, rhs), grid)


def dense_energy(field: SpinorField, v: np.ndarray, a1: np.ndarray, eps: float) -> float:
    """Quadratic-form evaluation of the discrete energy, h * v^* Q v."""
    grid = field.grid
    q = free_operator(grid, eps) + potential_operator(v, a1)
    vec = stack(field)
    return float((grid.h * np.vdot(vec, q @ vec)).real)
