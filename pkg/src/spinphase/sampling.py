"""Equiangular sampling of phase-space functions and slow pointwise oracles.

The grid convention is theta_k = pi k / n, phi_l = 2 pi l / n for
k, l = 0..n-1.  A band-limited spin-J function is fully determined by any
such grid with n >= 4J + 2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .angular import EigenBasis, SpinDimension, jy_eigenbasis, rotation_operator, wigner_d
from .cgc import (CoefficientTable, TensorOperatorTable, expansion_coefficients,
                  harmonic_theta_sums)
from .fourier import FourierTable
from .parity import ParityOperator, log_gamma_j, sphere_radius, validate_s

__all__ = [
    "PhaseSpaceGrid",
    "GridWindow",
    "grid_thetas",
    "grid_phis",
    "minimal_grid_size",
    "sample_fft",
    "sample_fft_full",
    "eval_series",
    "direct_eval",
    "direct_grid",
    "method_b_grid",
    "window_extract",
]


def minimal_grid_size(dim: SpinDimension) -> int:
    """Coarsest complete grid: n = 4J + 2 = 2d (always even)."""
    return 2 * dim.d


def grid_thetas(n: int) -> np.ndarray:
    return np.pi * np.arange(n) / n


def grid_phis(n: int) -> np.ndarray:
    return 2.0 * np.pi * np.arange(n) / n


@dataclass(frozen=True)
class PhaseSpaceGrid:
    """n x n complex samples of a phase-space function.

    ``values[k, l]`` is the function at (theta_k, phi_l).  The real part is
    the physical function for Hermitian inputs; the imaginary part is kept
    as a diagnostic because general operators are first-class inputs.
    """

    dim: SpinDimension
    s: float
    n: int
    values: np.ndarray
    method: str

    def thetas(self) -> np.ndarray:
        return grid_thetas(self.n)

    def phis(self) -> np.ndarray:
        return grid_phis(self.n)

    def imag_residual(self) -> float:
        """max |Im| relative to max |value|; small for Hermitian inputs."""
        peak = np.abs(self.values).max()
        if peak == 0.0:
            return 0.0
        return float(np.abs(self.values.imag).max() / peak)


@dataclass(frozen=True)
class GridWindow:
    """Rectangular angular window cut out of a PhaseSpaceGrid."""

    thetas: np.ndarray
    phis: np.ndarray
    values: np.ndarray


def _check_grid_size(dim: SpinDimension, n: int) -> int:
    n = int(n)
    bound = 2 * dim.two_j + 2
    if n < bound:
        raise ValueError(
            f"grid size n = {n} cannot represent 2J = {dim.two_j}: need n >= 4J+2 = {bound}")
    if n % 2:
        raise ValueError(f"grid size must be even, got n = {n}")
    return n


def sample_fft_full(table: FourierTable, n: int) -> np.ndarray:
    """Zero-padded FFT synthesis over the doubled theta domain.

    Returns the full 2n x n array covering 0 <= theta < 2 pi; rows n..2n-1
    trace the same sphere a second time (glide images of rows 1..n-1).
    """
    n = _check_grid_size(table.dim, n)
    two_j = table.dim.two_j
    freqs = np.arange(-two_j, two_j + 1)
    padded = np.zeros((2 * n, n), dtype=complex)
    padded[np.ix_(freqs % (2 * n), freqs % n)] = table.coeffs
    # Unnormalized synthesis with e^{+i freq angle}: inverse FFT times N.
    return np.fft.ifft2(padded) * (2 * n * n)


def sample_fft(table: FourierTable, n: int, method: str = "c") -> PhaseSpaceGrid:
    """Equiangular n x n sampling of the series; O(n^2 log^2 n)."""
    full = sample_fft_full(table, n)
    return PhaseSpaceGrid(dim=table.dim, s=table.s, n=int(n),
                          values=full[: int(n), :], method=method)


def eval_series(table: FourierTable, theta: float, phi: float) -> complex:
    """Direct double sum of the Fourier series at one arbitrary angle pair."""
    freqs = table.frequencies()
    e_theta = np.exp(1j * theta * freqs)
    e_phi = np.exp(1j * phi * freqs)
    return complex(e_theta @ table.coeffs @ e_phi)


def direct_eval(rho: np.ndarray, parity: ParityOperator, theta: float, phi: float,
                basis: EigenBasis | None = None) -> complex:
    """Ground-truth oracle: Tr[rho R(theta, phi) M_s R^dagger(theta, phi)].

    Dense matrix algebra, O(d^3) per point; used to validate every faster
    path, never for production grids.
    """
    rho = np.asarray(rho, dtype=complex)
    dim = parity.dim
    if rho.shape != (dim.d, dim.d):
        raise ValueError(f"density matrix shape {rho.shape} does not match d = {dim.d}")
    r = rotation_operator(dim, theta, phi, basis)
    rotated = (r * parity.diag) @ r.conj().T
    return complex(np.sum(rho * rotated.T))


def direct_grid(rho: np.ndarray, parity: ParityOperator, n: int,
                basis: EigenBasis | None = None) -> PhaseSpaceGrid:
    """Rotated-parity expectation values evaluated at every grid node.

    Reuses one Wigner-d conjugation per theta row; the phi sweep is a
    diagonal-phase quadratic form, still plain dense linear algebra.
    """
    rho = np.asarray(rho, dtype=complex)
    dim = parity.dim
    n = _check_grid_size(dim, n)
    if basis is None:
        basis = jy_eigenbasis(dim)
    m_desc = dim.m_values()
    e_phi = np.exp(1j * np.outer(grid_phis(n), m_desc))
    values = np.empty((n, n), dtype=complex)
    for k, theta in enumerate(grid_thetas(n)):
        y = wigner_d(dim, -theta, basis)
        w = (y * parity.diag) @ y.conj().T
        x = w * rho.T
        values[k, :] = np.einsum("lb,ba,la->l", e_phi.conj(), x, e_phi, optimize=True)
    return PhaseSpaceGrid(dim=dim, s=parity.s, n=n, values=values, method="direct")


def method_b_grid(rho: np.ndarray, s: float, n: int,
                  table: TensorOperatorTable | None = None,
                  coeffs: CoefficientTable | None = None,
                  allow_extended_s: bool = False) -> PhaseSpaceGrid:
    """Tensor-operator baseline evaluated pointwise on the grid.

    Same expansion as method_b_eval, vectorized over the grid; no FFT is
    involved, so this cross-checks the Fourier pipeline end to end.
    """
    rho = np.asarray(rho, dtype=complex)
    dim = SpinDimension.from_d(rho.shape[0])
    n = _check_grid_size(dim, n)
    s = validate_s(dim, s, allow_extended_s)
    if coeffs is None:
        coeffs = expansion_coefficients(rho, table)
    two_j = dim.two_j
    with np.errstate(over="ignore"):
        gamma_pow = np.exp(-s * log_gamma_j(dim))
    if not np.all(np.isfinite(gamma_pow)):
        raise OverflowError("(gamma_j)^(-s) overflows double precision")
    weights = coeffs.dense() * (gamma_pow / sphere_radius(dim))[:, None]
    profile_sums = harmonic_theta_sums(weights, grid_thetas(n))
    m_vals = np.arange(-two_j, two_j + 1)
    phase = np.exp(1j * np.outer(m_vals, grid_phis(n)))
    return PhaseSpaceGrid(dim=dim, s=s, n=n, values=profile_sums @ phase, method="b")


def window_extract(grid: PhaseSpaceGrid, theta_max: float,
                   phi_range: tuple[float, float] | None = None) -> GridWindow:
    """Sub-array of samples whose angles satisfy theta <= theta_max and
    phi inside the closed phi_range (full circle when omitted)."""
    thetas = grid.thetas()
    phis = grid.phis()
    rows = np.flatnonzero(thetas <= theta_max + 1e-12)
    if phi_range is None:
        cols = np.arange(grid.n)
    else:
        lo, hi = phi_range
        cols = np.flatnonzero((phis >= lo - 1e-12) & (phis <= hi + 1e-12))
    if rows.size == 0 or cols.size == 0:
        raise ValueError("window contains no grid points")
    return GridWindow(thetas=thetas[rows], phis=phis[cols],
                      values=grid.values[np.ix_(rows, cols)])
