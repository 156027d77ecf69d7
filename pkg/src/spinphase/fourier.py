"""Band-limited Fourier description of phase-space functions.

A spin-J phase-space function is a finite Fourier series with frequencies
|ell|, |m| <= 2J.  Its coefficient table is obtained from the density
matrix by a linear map built from the K_ell transformation matrices; each
K_ell couples one theta frequency to every phi frequency through the
diagonals of the density matrix.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .angular import EigenBasis, SpinDimension, jy_eigenbasis
from .parity import ParityOperator, TransformedParity, transform_parity

__all__ = [
    "KMatrix",
    "FourierTable",
    "compute_k",
    "fourier_coefficients_method_c",
    "derivative_coefficients",
]

# Above this size, diagonal sums switch from bincount to per-diagonal
# pairwise summation to keep the accumulation error at machine level.
_PAIRWISE_THRESHOLD = 256


@dataclass(frozen=True)
class KMatrix:
    """One transformation matrix K_ell (zero outside the band |ell| <= 2J)."""

    dim: SpinDimension
    s: float
    ell: int
    matrix: np.ndarray


@dataclass(frozen=True)
class FourierTable:
    """(4J+1) x (4J+1) coefficient array F_{ell m}.

    Row index is the theta frequency ell + 2J, column index the phi
    frequency m + 2J, both ascending in signed order.
    """

    dim: SpinDimension
    s: float
    coeffs: np.ndarray

    def frequencies(self) -> np.ndarray:
        return np.arange(-self.dim.two_j, self.dim.two_j + 1)

    def get(self, ell: int, m: int) -> complex:
        two_j = self.dim.two_j
        if abs(ell) > two_j or abs(m) > two_j:
            return 0.0 + 0.0j
        return self.coeffs[ell + two_j, m + two_j]


def _k_matrix(u: np.ndarray, mtilde: np.ndarray, ell: int) -> np.ndarray:
    """K_ell = sum_nu [Mtilde]_{nu, nu+ell} |U_nu><U_{nu+ell}| as a dense array."""
    d = u.shape[0]
    if abs(ell) >= d:
        return np.zeros((d, d), dtype=complex)
    w = np.diagonal(mtilde, ell)
    if ell >= 0:
        left = u[:, : d - ell]
        right = u[:, ell:]
    else:
        left = u[:, -ell:]
        right = u[:, : d + ell]
    return (left * w) @ right.conj().T


def compute_k(basis: EigenBasis, mtilde: TransformedParity, ell: int) -> KMatrix:
    """Transformation matrix for theta frequency ell.

    |ell| > 2J yields the zero matrix (empty sum), not an error.
    """
    if basis.dim != mtilde.dim:
        raise ValueError("basis and transformed parity dimensions differ")
    matrix = _k_matrix(basis.vectors, mtilde.matrix, int(ell))
    matrix.setflags(write=False)
    return KMatrix(dim=basis.dim, s=mtilde.s, ell=int(ell), matrix=matrix)


def _diag_sum_plan(d: int):
    idx = np.arange(d)
    return (idx[None, :] - idx[:, None] + (d - 1)).ravel()


def _diagonal_sums(h: np.ndarray, plan: np.ndarray | None) -> np.ndarray:
    """Sums of every diagonal of h, ordered by offset -(d-1)..(d-1)."""
    d = h.shape[0]
    if d <= _PAIRWISE_THRESHOLD:
        flat = h.ravel()
        if plan is None:
            plan = _diag_sum_plan(d)
        re = np.bincount(plan, weights=flat.real, minlength=2 * d - 1)
        im = np.bincount(plan, weights=flat.imag, minlength=2 * d - 1)
        return re + 1j * im
    out = np.empty(2 * d - 1, dtype=complex)
    for off in range(-(d - 1), d):
        out[off + d - 1] = np.sum(np.diagonal(h, off))
    return out


def accumulate_row(rho: np.ndarray, k_matrix: np.ndarray,
                   plan: np.ndarray | None = None) -> np.ndarray:
    """All phi-frequency coefficients carried by one K matrix.

    Returns the length-(4J+1) vector with entries
    sum_lambda rho_{lambda+m, lambda} [K]_{lambda, lambda+m}, m ascending.
    """
    return _diagonal_sums(rho * k_matrix.T, plan)


def fourier_coefficients_method_c(rho: np.ndarray, parity: ParityOperator,
                                  basis: EigenBasis | None = None) -> FourierTable:
    """Fourier coefficients with K matrices built on the fly and discarded.

    O(d^4) time, O(d^2) memory: one K matrix exists at a time.
    """
    rho = np.asarray(rho, dtype=complex)
    dim = parity.dim
    if rho.shape != (dim.d, dim.d):
        raise ValueError(f"density matrix shape {rho.shape} does not match d = {dim.d}")
    if basis is None:
        basis = jy_eigenbasis(dim)
    mtilde = transform_parity(parity, basis).matrix
    u = basis.vectors
    two_j = dim.two_j
    plan = _diag_sum_plan(dim.d) if dim.d <= _PAIRWISE_THRESHOLD else None
    coeffs = np.zeros((2 * two_j + 1, 2 * two_j + 1), dtype=complex)
    for ell in range(-two_j, two_j + 1):
        k = _k_matrix(u, mtilde, ell)
        coeffs[ell + two_j, :] = accumulate_row(rho, k, plan)
    return FourierTable(dim=dim, s=parity.s, coeffs=coeffs)


def derivative_coefficients(table: FourierTable, variable: str) -> FourierTable:
    """Coefficients of the analytic angular derivative of the series.

    Differentiation is diagonal in frequency space: each F_{ell m} picks up
    i*ell (theta) or i*m (phi).
    """
    freqs = table.frequencies().astype(float)
    if variable == "theta":
        coeffs = (1j * freqs)[:, None] * table.coeffs
    elif variable == "phi":
        coeffs = table.coeffs * (1j * freqs)[None, :]
    else:
        raise ValueError(f"variable must be 'theta' or 'phi', got {variable!r}")
    return FourierTable(dim=table.dim, s=table.s, coeffs=coeffs)
