"""Normalization constants and the diagonal parity operator.

The parity operator is the fixed kernel whose rotated expectation values
produce the whole family of s-parametrized phase-space functions: s = 0
gives the Wigner function, s = -1 the Husimi Q function, s = +1 the
Glauber P function.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .angular import EigenBasis, SpinDimension
from .cgc import cg_families

__all__ = [
    "ParityOverflowError",
    "ParityOperator",
    "TransformedParity",
    "sphere_radius",
    "log_gamma_j",
    "gamma_j",
    "validate_s",
    "tensor_diag_table",
    "build_parity",
    "transform_parity",
]

LOG_4PI = math.log(4.0 * math.pi)


class ParityOverflowError(OverflowError):
    """(gamma_j)^(-s) left double range; the parity operator is not representable."""


def sphere_radius(dim: SpinDimension) -> float:
    """Radius R = sqrt(J / (2 pi)) of the phase-space sphere."""
    return math.sqrt(dim.j / (2.0 * math.pi))


def log_gamma_j(dim: SpinDimension) -> np.ndarray:
    """log(gamma_j) for j = 0..2J, evaluated entirely in the log domain."""
    two_j = dim.two_j
    j = np.arange(two_j + 1, dtype=float)
    return (math.log(sphere_radius(dim)) + 0.5 * LOG_4PI
            + math.lgamma(two_j + 1)
            - 0.5 * _lgamma_vec(two_j + j + 2)
            - 0.5 * _lgamma_vec(two_j - j + 1))


def _lgamma_vec(values: np.ndarray) -> np.ndarray:
    return np.array([math.lgamma(v) for v in values])


def gamma_j(dim: SpinDimension, j: int) -> float:
    """The decay constant gamma_j; strictly decreasing in j."""
    j = int(j)
    if j < 0 or j > dim.two_j:
        raise ValueError(f"j must lie in 0..2J = 0..{dim.two_j}, got {j}")
    return float(np.exp(log_gamma_j(dim)[j]))


def validate_s(dim: SpinDimension, s: float, allow_extended: bool = False) -> float:
    s = float(s)
    if not math.isfinite(s):
        raise ValueError("s must be a finite real number")
    if not allow_extended and not -1.0 <= s <= 1.0:
        raise ValueError(f"s = {s} outside [-1, 1]; pass allow_extended_s to override")
    return s


def tensor_diag_table(dim: SpinDimension) -> np.ndarray:
    """[T_j0]_{mm} for all j and m: shape (2J+1, d), basis order along axis 1.

    All diagonal tensor operators come from a single recursion sweep, so the
    cost is O(d^2).
    """
    two_m1 = dim.two_j - 2 * np.arange(dim.d, dtype=np.int64)
    _, coeffs = cg_families(dim.two_j, dim.two_j, two_m1, -two_m1)
    sign = np.where(((dim.two_j - two_m1) // 2) % 2, -1.0, 1.0)
    return coeffs * sign[None, :]


@dataclass(frozen=True)
class ParityOperator:
    """Diagonal parity kernel M_s, stored as its length-d diagonal."""

    dim: SpinDimension
    s: float
    diag: np.ndarray
    radius: float

    def matrix(self) -> np.ndarray:
        return np.diag(self.diag.astype(complex))


@dataclass(frozen=True)
class TransformedParity:
    """Parity kernel expressed in the J_y eigenbasis: U^dagger M_s U."""

    dim: SpinDimension
    s: float
    matrix: np.ndarray


def build_parity(dim: SpinDimension, s: float, allow_extended_s: bool = False) -> ParityOperator:
    """Assemble M_s = (1/R) sum_j sqrt((2j+1)/4pi) (gamma_j)^(-s) T_j0.

    (gamma_j)^(-s) is evaluated as exp(-s log gamma_j); for s near +1 and
    large d this exceeds double range near j = 2J, which is reported as an
    explicit overflow instead of leaking infinities downstream.
    """
    s = validate_s(dim, s, allow_extended_s)
    radius = sphere_radius(dim)
    j = np.arange(dim.two_j + 1, dtype=float)
    log_weight = (0.5 * (np.log(2.0 * j + 1.0) - LOG_4PI)
                  - s * log_gamma_j(dim) - math.log(radius))
    with np.errstate(over="ignore"):
        weight = np.exp(log_weight)
    if not np.all(np.isfinite(weight)):
        bad = int(np.argmax(~np.isfinite(weight)))
        raise ParityOverflowError(
            f"(gamma_j)^(-s) overflows double precision at j = {bad} "
            f"for d = {dim.d}, s = {s}; use s <= 0 representations at this scale")
    diag = weight @ tensor_diag_table(dim)
    if not np.all(np.isfinite(diag)):
        raise ParityOverflowError(f"parity diagonal overflows for d = {dim.d}, s = {s}")
    diag.setflags(write=False)
    return ParityOperator(dim=dim, s=s, diag=diag, radius=radius)


def transform_parity(parity: ParityOperator, basis: EigenBasis) -> TransformedParity:
    """Rotate the diagonal kernel into the eigenbasis of J_y."""
    if basis.dim != parity.dim:
        raise ValueError(f"dimension mismatch: parity d = {parity.dim.d}, "
                         f"basis d = {basis.dim.d}")
    u = basis.vectors
    matrix = (u.conj().T * parity.diag) @ u
    matrix.setflags(write=False)
    return TransformedParity(dim=parity.dim, s=parity.s, matrix=matrix)
