"""Physical observables, discrete conserved quantities, and error metrics."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grids import SpinorField
from .pauli import combo_apply
from .spectral import apply_Ah_inv, apply_delta_x


def total_density(field: SpinorField) -> np.ndarray:
    """rho_j = |phi_1|^2 + |phi_2|^2 per node."""
    rho = np.sum(np.abs(field.values) ** 2, axis=0)
    assert np.all(rho >= 0.0)
    return rho


def current_density(field: SpinorField, eps: float) -> list[np.ndarray]:
    """J_l = (1/eps) Phi* sigma_l Phi per node, one array per dimension."""
    if eps <= 0.0:
        raise ValueError(f"eps must be positive, got {eps}")
    v = field.values
    out = []
    sigmas = ((0.0, 1.0, 0.0, 0.0), (0.0, 0.0, 1.0, 0.0))
    for k in range(field.grid.dim):
        j = np.sum(np.conj(v) * combo_apply(*sigmas[k], v), axis=0) / eps
        assert np.max(np.abs(j.imag), initial=0.0) <= 1e-14 * max(1.0, np.max(np.abs(j)))
        out.append(j.real)
    return out


def mass_l2(field: SpinorField) -> float:
    """Discrete squared l2 norm, h^d * sum_j |Phi_j|^2."""
    return float(field.grid.cell_volume() * np.sum(np.abs(field.values) ** 2))


def discrete_energy(field: SpinorField, pots_static, eps: float) -> float:
    """Discrete energy for time-independent potentials.

    E_h = h^d sum_j [ -(i/eps) Phi* sum_k sigma_k A_h^-1 delta_k Phi
                      + (1/eps) Phi* sigma_3 Phi + V |Phi|^2
                      - sum_k A_k Phi* sigma_k Phi ].
    """
    grid = field.grid
    v, a = pots_static
    vc = np.conj(field.values)
    sigmas = ((0.0, 1.0, 0.0, 0.0), (0.0, 0.0, 1.0, 0.0))
    total = np.zeros((grid.n,) * grid.dim, dtype=np.complex128)
    for k in range(grid.dim):
        dk = apply_Ah_inv(apply_delta_x(field, axis=k + 1), axis=k + 1).values
        total += -1j / eps * np.sum(vc * combo_apply(*sigmas[k], dk), axis=0)
        total += -a[k] * np.sum(vc * combo_apply(*sigmas[k], field.values), axis=0)
    total += (np.abs(field.values[0]) ** 2 - np.abs(field.values[1]) ** 2) / eps
    total += v * np.sum(np.abs(field.values) ** 2, axis=0)
    e = grid.cell_volume() * np.sum(total)
    assert abs(e.imag) <= 1e-12 * max(1.0, abs(e.real))
    return float(e.real)


@dataclass
class ErrorTriple:
    e_phi: float
    e_rho: float
    e_j: float


def relative_error(num: SpinorField, ref: SpinorField, which: str, eps: float = 1.0) -> float:
    """Relative l2 error of the wave function, total density, or current density."""
    if num.grid != ref.grid:
        raise ValueError("fields live on different grids; restrict the reference first")
    if which == "phi":
        a, b = num.values, ref.values
    elif which == "rho":
        a, b = total_density(num), total_density(ref)
    elif which == "J":
        a = np.stack(current_density(num, eps))
        b = np.stack(current_density(ref, eps))
    else:
        raise ValueError(f"unknown quantity {which!r}, expected phi|rho|J")
    ref_norm = np.linalg.norm(b)
    if ref_norm == 0.0:
        raise ValueError("reference has zero norm")
    return float(np.linalg.norm(a - b) / ref_norm)


def error_triple(num: SpinorField, ref: SpinorField, eps: float) -> ErrorTriple:
    return ErrorTriple(
        e_phi=relative_error(num, ref, "phi", eps),
        e_rho=relative_error(num, ref, "rho", eps),
        e_j=relative_error(num, ref, "J", eps),
    )


def convergence_order(errors) -> list[float | None]:
    """log2 ratios of successive errors under resolution halving.

    Entry k is log2(e_k / e_{k+1}); None where either error is nonpositive.
    """
    errors = list(errors)
    if len(errors) < 2:
        raise ValueError("need at least two error entries")
    out = []
    for e0, e1 in zip(errors, errors[1:]):
        out.append(float(np.log2(e0 / e1)) if e0 > 0.0 and e1 > 0.0 else None)
    return out
