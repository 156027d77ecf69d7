"""Density matrices for the standard example families.

Permutation-symmetric N-qubit states are represented in the mapped spin
basis with N = 2J: the all-zeros product state is |J, J> (index 0), the
all-ones state is |J, -J> (index d-1).
"""

from __future__ import annotations

import numpy as np

from .angular import SpinDimension, jx_eigenbasis, rotation_operator

__all__ = [
    "ghz",
    "dicke",
    "squeezed",
    "coherent",
    "maximally_mixed",
    "random_density",
]


def _pure(psi: np.ndarray) -> np.ndarray:
    return np.outer(psi, psi.conj())


def ghz(dim: SpinDimension) -> np.ndarray:
    """Equal superposition of the all-zeros and all-ones states."""
    psi = np.zeros(dim.d, dtype=complex)
    psi[0] = psi[-1] = 1.0 / np.sqrt(2.0)
    return _pure(psi)


def dicke(dim: SpinDimension, m) -> np.ndarray:
    """Projector onto |J, m>: the symmetrized state with J - m excitations."""
    psi = np.zeros(dim.d, dtype=complex)
    psi[dim.index_of_m(m)] = 1.0
    return _pure(psi)


def squeezed(dim: SpinDimension, xi: float) -> np.ndarray:
    """One-axis-twisting evolution exp(-i xi J_x^2) applied to spin-up.

    Evolved exactly through the eigendecomposition of J_x; unitary for
    every xi, so the state stays normalized to machine precision.
    """
    basis = jx_eigenbasis(dim)
    v = basis.vectors
    phases = np.exp(-1j * float(xi) * basis.eigenvalues ** 2)
    psi = v @ (phases * v[0, :].conj())
    return _pure(psi)


def coherent(dim: SpinDimension, theta0: float, phi0: float) -> np.ndarray:
    """Spin-coherent state pointing along (theta0, phi0)."""
    psi = rotation_operator(dim, theta0, phi0)[:, 0]
    return _pure(psi)


def maximally_mixed(dim: SpinDimension) -> np.ndarray:
    return np.eye(dim.d, dtype=complex) / dim.d


def random_density(dim: SpinDimension, seed: int) -> np.ndarray:
    """Seeded random full-rank density matrix.

    A complex Gaussian matrix is symmetrized, shifted until positive
    definite, and trace-normalized; the same seed always reproduces the
    same matrix bit for bit.
    """
    rng = np.random.default_rng(int(seed))
    g = rng.standard_normal((dim.d, dim.d)) + 1j * rng.standard_normal((dim.d, dim.d))
    h = (g + g.conj().T) / 2.0
    lift = abs(float(np.linalg.eigvalsh(h)[0])) + 1.0
    h += lift * np.eye(dim.d)
    return h / np.trace(h).real
