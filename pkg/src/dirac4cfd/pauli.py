"""Pauli matrix algebra on two-component fields.

Every 2x2 matrix this package needs has the form

    M = a*I + b*sigma1 + c*sigma2 + d*sigma3

so it is represented by the four (possibly array-valued) coefficients
(a, b, c, d).  Spinor data carries the component axis first, which lets the
apply/solve helpers broadcast the coefficients over all spatial or mode axes
at once.
"""
from __future__ import annotations

import numpy as np

SIGMA1 = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=np.complex128)
SIGMA2 = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=np.complex128)
SIGMA3 = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=np.complex128)
ID2 = np.eye(2, dtype=np.complex128)


def combo_matrix(a, b, c, d) -> np.ndarray:
    """The dense 2x2 matrix a*I + b*sigma1 + c*sigma2 + d*sigma3 (scalars only)."""
    return a * ID2 + b * SIGMA1 + c * SIGMA2 + d * SIGMA3


def combo_apply(a, b, c, d, v: np.ndarray) -> np.ndarray:
    """Apply a*I + b*sigma1 + c*sigma2 + d*sigma3 to spinor data v of shape (2, ...)."""
    v0, v1 = v[0], v[1]
    return np.stack([
        (a + d) * v0 + (b - 1j * c) * v1,
        (b + 1j * c) * v0 + (a - d) * v1,
    ])


def combo_det(a, b, c, d):
    """Determinant of a*I + b*sigma1 + c*sigma2 + d*sigma3."""
    return a * a - b * b - c * c - d * d


def combo_solve(a, b, c, d, rhs: np.ndarray) -> np.ndarray:
    """Solve (a*I + b*sigma1 + c*sigma2 + d*sigma3) x = rhs per broadcast entry."""
    det = combo_det(a, b, c, d)
    r0, r1 = rhs[0], rhs[1]
    return np.stack([
        ((a - d) * r0 - (b - 1j * c) * r1) / det,
        (-(b + 1j * c) * r0 + (a + d) * r1) / det,
    ])
