"""Dense complex matrix helpers for small bipartite open-system simulations.

Matrices are plain ``numpy`` complex128 arrays. Density matrices are wrapped in
:class:`DensityMatrix` once they have been validated.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

HERMITIAN_TOL = 1e-9
EIGEN_TOL = 1e-8
_DIAGONAL_CUTOFF = 1e-14


class DimensionError(ValueError):
    """Operand shapes are incompatible."""


class DensityValidationError(ValueError):
    """Base class for failed density-matrix checks."""


class HermiticityError(DensityValidationError):
    pass


class TraceError(DensityValidationError):
    pass


class PositivityError(DensityValidationError):
    pass


@dataclass(frozen=True)
class DensityMatrix:
    """A validated density matrix; build it through :func:`validate_density`."""

    matrix: np.ndarray
    validation_tolerance: float = HERMITIAN_TOL

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def __array__(self, dtype=None, copy=None):
        return self.matrix if dtype is None else self.matrix.astype(dtype)


def as_matrix(m) -> np.ndarray:
    if isinstance(m, DensityMatrix):
        m = m.matrix
    arr = np.asarray(m, dtype=np.complex128)
    if arr.ndim != 2:
        raise DimensionError(f"expected a 2-d matrix, got shape {arr.shape}")
    return arr


def _require_square(m: np.ndarray, name: str = "matrix") -> None:
    if m.shape[0] != m.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {m.shape}")


def kron(a, b) -> np.ndarray:
    """Kronecker product; ``out[i*p + k, j*q + l] = a[i, j] * b[k, l]``."""
    a, b = as_matrix(a), as_matrix(b)
    n, m = a.shape
    p, q = b.shape
    return (a[:, None, :, None] * b[None, :, None, :]).reshape(n * p, m * q)


def partial_trace_second(m, dim1: int, dim2: int) -> np.ndarray:
    """Trace out the second factor of a ``(dim1*dim2)``-square operator."""
    m = as_matrix(m)
    if dim1 < 1 or dim2 < 1:
        raise DimensionError("subsystem dimensions must be positive")
    n = dim1 * dim2
    if m.shape != (n, n):
        raise DimensionError(
            f"matrix of shape {m.shape} does not match dims {dim1}x{dim2}"
        )
    return np.einsum("ikjk->ij", m.reshape(dim1, dim2, dim1, dim2))


def partial_trace_first(m, dim1: int, dim2: int) -> np.ndarray:
    """Trace out the first factor; the mirror of :func:`partial_trace_second`."""
    m = as_matrix(m)
    n = dim1 * dim2
    if dim1 < 1 or dim2 < 1 or m.shape != (n, n):
        raise DimensionError(
            f"matrix of shape {m.shape} does not match dims {dim1}x{dim2}"
        )
    return np.einsum("kikj->ij", m.reshape(dim1, dim2, dim1, dim2))


def hermiticity_defect(m: np.ndarray) -> float:
    return float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0


def hermitian_propagator(h, dt: float, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Return ``exp(-i h dt)`` for Hermitian ``h``.

    Diagonal input (off-diagonals at most 1e-14) is exponentiated entrywise;
    anything else goes through an eigendecomposition.
    """
    h = as_matrix(h)
    _require_square(h, "Hamiltonian")
    defect = hermiticity_defect(h)
    if defect > tol:
        raise HermiticityError(f"Hamiltonian is not Hermitian (defect {defect:.3e})")
    off = h - np.diag(np.diag(h))
    if not off.size or np.max(np.abs(off)) <= _DIAGONAL_CUTOFF:
        with np.errstate(over="ignore", invalid="ignore"):
            return np.diag(np.exp(-1j * np.real(np.diag(h)) * dt))
    evals, evecs = np.linalg.eigh(0.5 * (h + h.conj().T))
    return (evecs * np.exp(-1j * evals * dt)) @ evecs.conj().T


def conjugate(u, rho) -> np.ndarray:
    """``u @ rho @ u^dagger``."""
    u, rho = as_matrix(u), as_matrix(rho)
    _require_square(u, "u")
    _require_square(rho, "rho")
    if u.shape != rho.shape:
        raise DimensionError(f"shape mismatch: {u.shape} vs {rho.shape}")
    return u @ rho @ u.conj().T


def min_eigenvalue(m: np.ndarray) -> float:
    """Smallest eigenvalue of the Hermitian part of ``m``."""
    m = as_matrix(m)
    if m.shape == (1, 1):
        return float(m[0, 0].real)
    if m.shape == (2, 2):
        half_tr = 0.5 * (m[0, 0].real + m[1, 1].real)
        half_diff = 0.5 * (m[0, 0].real - m[1, 1].real)
        off = 0.5 * (m[0, 1] + np.conj(m[1, 0]))
        return float(half_tr - np.hypot(half_diff, abs(off)))
    return float(np.linalg.eigvalsh(0.5 * (m + m.conj().T))[0])


def validate_density(
    m, tol: float = HERMITIAN_TOL, *, eig_tol: float = EIGEN_TOL
) -> DensityMatrix:
    """Check Hermiticity, unit trace and positivity, in that order.

    Raises the matching :class:`DensityValidationError` subclass on failure.
    """
    m = as_matrix(m)
    _require_square(m, "density matrix")
    if not np.all(np.isfinite(m)):
        raise DensityValidationError("density matrix has non-finite entries")
    defect = hermiticity_defect(m)
    if defect > tol:
        raise HermiticityError(f"Hermiticity defect {defect:.3e} exceeds {tol:.1e}")
    tr = np.trace(m)
    if abs(tr - 1.0) > tol:
        raise TraceError(f"trace {tr:.12g} differs from 1 by more than {tol:.1e}")
    lam = min_eigenvalue(m)
    if lam < -eig_tol:
        raise PositivityError(f"minimum eigenvalue {lam:.3e} below -{eig_tol:.1e}")
    return DensityMatrix(m, tol)
