"""Composite finite-dimensional Hilbert spaces and operators on them.

Operators are sparse (Liouvillians built from them are >99% sparse),
density matrices dense (steady states of driven systems generically are).
All energies and rates are dimensionless, in units of a reference decay
rate gamma.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import DimensionCapError, ShapeError, ValidationError

# entries with modulus at or below this are dropped from sparse storage
SPARSE_PRUNE_TOL = 1e-15

DEFAULT_DIM_CAP = 4096


@dataclass(frozen=True)
class HilbertSpace:
    """Ordered tensor factors; slots (not labels) identify subsystems."""

    subsystem_dims: tuple[int, ...]
    cap: int = field(default=DEFAULT_DIM_CAP, repr=False, compare=False)

    def __post_init__(self):
        dims = tuple(int(d) for d in self.subsystem_dims)
        object.__setattr__(self, "subsystem_dims", dims)
        if not dims:
            raise ValidationError("a Hilbert space needs at least one factor")
        if any(d < 2 for d in dims):
            raise ValidationError(f"every subsystem dim must be >= 2, got {dims}")
        if self.total_dim > self.cap:
            raise DimensionCapError(
                f"total dimension {self.total_dim} exceeds cap {self.cap}"
            )

    @property
    def total_dim(self) -> int:
        return math.prod(self.subsystem_dims)

    @property
    def nfactors(self) -> int:
        return len(self.subsystem_dims)


def _prune(m: sp.csr_matrix) -> sp.csr_matrix:
    m = m.tocsr().astype(np.complex128)
    if m.nnz:
        m.data[np.abs(m.data) <= SPARSE_PRUNE_TOL] = 0
        m.eliminate_zeros()
    m.sort_indices()
    return m


@dataclass(frozen=True, eq=False)
class ComplexOperator:
    """Sparse complex operator tied to a space."""

    space: HilbertSpace
    entries: sp.csr_matrix

    def __post_init__(self):
        m = _prune(self.entries)
        n = self.space.total_dim
        if m.shape != (n, n):
            raise ShapeError(f"operator shape {m.shape} does not match dim {n}")
        object.__setattr__(self, "entries", m)

    def dagger(self) -> "ComplexOperator":
        return ComplexOperator(self.space, self.entries.conj().T.tocsr())

    def toarray(self) -> np.ndarray:
        return self.entries.toarray()

    def _require_same_space(self, other: "ComplexOperator"):
        if self.space != other.space:
            raise ShapeError("operators live on different spaces")

    def __matmul__(self, other: "ComplexOperator") -> "ComplexOperator":
        self._require_same_space(other)
        return ComplexOperator(self.space, self.entries @ other.entries)

    def __add__(self, other: "ComplexOperator") -> "ComplexOperator":
        self._require_same_space(other)
        return ComplexOperator(self.space, self.entries + other.entries)

    def __sub__(self, other: "ComplexOperator") -> "ComplexOperator":
        self._require_same_space(other)
        return ComplexOperator(self.space, self.entries - other.entries)

    def __mul__(self, scalar) -> "ComplexOperator":
        return ComplexOperator(self.space, self.entries * complex(scalar))

    __rmul__ = __mul__

    def __neg__(self) -> "ComplexOperator":
        return self * (-1.0)

    def maxabs(self) -> float:
        return float(np.abs(self.entries.data).max()) if self.entries.nnz else 0.0


# state validation tolerances
TRACE_TOL = 1e-10
HERM_TOL = 1e-10
PSD_TOL = -1e-8


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Dense state; trace-1, Hermitian and PSD validated on construction."""

    space: HilbertSpace
    entries: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.entries, dtype=np.complex128)
        n = self.space.total_dim
        if m.shape != (n, n):
            raise ShapeError(f"state shape {m.shape} does not match dim {n}")
        tr = np.trace(m)
        if abs(tr - 1.0) > TRACE_TOL:
            raise ValidationError(f"trace deviates from 1 by {abs(tr - 1.0):.3e}")
        herm = np.max(np.abs(m - m.conj().T))
        if herm > HERM_TOL:
            raise ValidationError(f"Hermiticity defect {herm:.3e}")
        evmin = float(np.linalg.eigvalsh(m)[0])
        if evmin < PSD_TOL:
            raise ValidationError(f"negative eigenvalue {evmin:.3e}")
        object.__setattr__(self, "entries", m)

    def diagonal(self) -> np.ndarray:
        return np.real(np.diag(self.entries)).copy()


def identity(space: HilbertSpace) -> ComplexOperator:
    return ComplexOperator(
        space, sp.identity(space.total_dim, format="csr", dtype=np.complex128)
    )


def two_level_lowering() -> ComplexOperator:
    """sigma with <0|sigma|1> = 1; exactly nilpotent."""
    space = HilbertSpace((2,))
    m = sp.csr_matrix(np.array([[0, 1], [0, 0]], dtype=np.complex128))
    return ComplexOperator(space, m)


def bosonic_lowering(dim: int) -> ComplexOperator:
    """Truncated annihilation operator, <n-1|a|n> = sqrt(n)."""
    if dim < 2:
        raise ValidationError(f"bosonic mode needs dim >= 2, got {dim}")
    space = HilbertSpace((dim,))
    off = np.sqrt(np.arange(1, dim, dtype=np.float64))
    m = sp.diags(off.astype(np.complex128), offsets=1, format="csr")
    return ComplexOperator(space, m)


def embed(op: ComplexOperator, space: HilbertSpace, slot: int) -> ComplexOperator:
    """identity x ... x op x ... x identity on the composite space."""
    if not 0 <= slot < space.nfactors:
        raise ShapeError(f"slot {slot} out of range for {space.nfactors} factors")
    if op.space.total_dim != space.subsystem_dims[slot]:
        raise ShapeError(
            f"operator dim {op.space.total_dim} does not match "
            f"slot {slot} dim {space.subsystem_dims[slot]}"
        )
    factors = [
        op.entries if i == slot
        else sp.identity(d, format="csr", dtype=np.complex128)
        for i, d in enumerate(space.subsystem_dims)
    ]
    m = factors[0]
    for f in factors[1:]:
        m = sp.kron(m, f, format="csr")
    return ComplexOperator(space, m)


def expectation(rho: DensityMatrix, op: ComplexOperator) -> complex:
    """trace(op . rho)."""
    if rho.space != op.space:
        raise ShapeError("state and operator live on different spaces")
    # tr(A rho) = sum_ij A_ij rho_ji
    return complex(op.entries.multiply(rho.entries.T).sum())


def partial_trace(rho: DensityMatrix, keep: int) -> DensityMatrix:
    """Reduced state on one tensor factor."""
    dims = rho.space.subsystem_dims
    if not 0 <= keep < len(dims):
        raise ShapeError(f"slot {keep} out of range for {len(dims)} factors")
    t = rho.entries.reshape(dims + dims)
    n = len(dims)
    # trace out every factor except `keep`, highest axis first
    for i in reversed(range(n)):
        if i == keep:
            continue
        t = np.trace(t, axis1=i, axis2=i + (t.ndim // 2))
    return DensityMatrix(HilbertSpace((dims[keep],)), t)
