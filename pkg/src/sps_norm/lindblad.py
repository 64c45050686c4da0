"""Liouvillian assembly and steady-state solves.

Master equation convention:

    d rho / dt = i [rho, H] + sum_c (rate_c / 2) (2 c rho c+ - c+c rho - rho c+c)

Vectorization is column-major: vec(A rho B) = kron(B^T, A) vec(rho).

Cascaded pairs add the standard unidirectional cross-term

    sqrt(r_s r_t) (c_s rho c_t+ - c_t+ c_s rho + c_t rho c_s+ - rho c_s+ c_t)

on top of independent decay of both operators; tracing out the target
then leaves the source generator exactly unchanged (no back-action).
"""
from __future__ import annotations

import hashlib
from collections import OrderedDict
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import (
    DegenerateSteadyStateError,
    ShapeError,
    UndefinedCorrelationError,
    ValidationError,
)
from .hilbert import ComplexOperator, DensityMatrix, HilbertSpace, expectation

HERMITICITY_TOL = 1e-12
TRACE_NULL_TOL = 1e-10
RESIDUAL_TOL = 1e-10

# Hilbert dimension above which the solver switches from a sparse direct
# factorization to restarted Krylov (lgmres) with a preconditioner
DIRECT_DIM_LIMIT = 64


@dataclass(frozen=True)
class Dissipator:
    rate: float
    collapse_op: ComplexOperator

    def __post_init__(self):
        if self.rate < 0:
            raise ValidationError(f"dissipator rate must be >= 0, got {self.rate}")


@dataclass(frozen=True)
class CascadedPair:
    """source drives target unidirectionally at sqrt(rate_source*rate_target)."""

    source_op: ComplexOperator
    target_op: ComplexOperator
    rate_source: float
    rate_target: float

    def __post_init__(self):
        if self.rate_source <= 0 or self.rate_target <= 0:
            raise ValidationError("cascaded rates must be positive")


@dataclass(frozen=True)
class SectorLayout:
    """Structure hint for emitter (x) k two-level-sensor models.

    Grouping the vectorized state by sensor occupation patterns (u, v)
    makes the Liouvillian block diagonal up to O(eps) couplings, with the
    (u, v) block equal to L_emitter + z(u, v) * identity. The solver uses
    this as a preconditioner; nothing here changes the model itself.
    """

    emitter_dim: int
    count: int
    Gamma: float
    delta_f: float
    emitter_liouvillian: sp.csr_matrix
    digest: str


@dataclass(frozen=True, eq=False)
class LindbladModel:
    space: HilbertSpace
    hamiltonian: ComplexOperator
    dissipators: tuple[Dissipator, ...]
    cascaded_pairs: tuple[CascadedPair, ...] = ()
    sector_layout: SectorLayout | None = None

    def __post_init__(self):
        object.__setattr__(self, "dissipators", tuple(self.dissipators))
        object.__setattr__(self, "cascaded_pairs", tuple(self.cascaded_pairs))
        h = self.hamiltonian
        if h.space != self.space:
            raise ShapeError("Hamiltonian is not on the model space")
        defect = abs(h.entries - h.entries.conj().T)
        defect = defect.max() if defect.nnz else 0.0
        if defect > HERMITICITY_TOL:
            raise ValidationError(f"Hamiltonian Hermiticity defect {defect:.3e}")
        for d in self.dissipators:
            if d.collapse_op.space != self.space:
                raise ShapeError("dissipator operator is not on the model space")
        for p in self.cascaded_pairs:
            if p.source_op.space != self.space or p.target_op.space != self.space:
                raise ShapeError("cascaded operator is not on the model space")


@dataclass(frozen=True, eq=False)
class Superoperator:
    dim: int
    entries: sp.csr_matrix
    space: HilbertSpace
    sector_layout: SectorLayout | None = field(default=None, repr=False)

    def __post_init__(self):
        m = self.entries.tocsr()
        if m.shape != (self.dim, self.dim):
            raise ShapeError(f"superoperator shape {m.shape}, declared dim {self.dim}")
        object.__setattr__(self, "entries", m)
        d = self.space.total_dim
        if d * d != self.dim:
            raise ShapeError("dim is not the square of the space dimension")
        # trace functional must be a left null vector
        w = np.zeros(self.dim, dtype=np.complex128)
        w[np.arange(d) * (d + 1)] = 1.0
        defect = float(np.max(np.abs(m.T @ w)))
        if defect > TRACE_NULL_TOL:
            raise ValidationError(f"trace is not preserved, defect {defect:.3e}")


def _spre(a: sp.csr_matrix, d: int) -> sp.csr_matrix:
    return sp.kron(sp.identity(d, format="csr", dtype=np.complex128), a, format="csr")


def _spost(b: sp.csr_matrix, d: int) -> sp.csr_matrix:
    return sp.kron(b.T, sp.identity(d, format="csr", dtype=np.complex128), format="csr")


def build_liouvillian(model: LindbladModel) -> Superoperator:
    d = model.space.total_dim
    h = model.hamiltonian.entries
    # i [rho, H] = i (rho H - H rho)
    L = 1j * (_spost(h, d) - _spre(h, d))
    for dis in model.dissipators:
        c = dis.collapse_op.entries
        cdc = (c.conj().T @ c).tocsr()
        L = L + (dis.rate / 2.0) * (
            2.0 * sp.kron(c.conj(), c, format="csr") - _spre(cdc, d) - _spost(cdc, d)
        )
    for pair in model.cascaded_pairs:
        cs = pair.source_op.entries
        ct = pair.target_op.entries
        r = np.sqrt(pair.rate_source * pair.rate_target)
        L = L + r * (
            sp.kron(ct.conj(), cs, format="csr") - _spre((ct.conj().T @ cs).tocsr(), d)
            + sp.kron(cs.conj(), ct, format="csr") - _spost((cs.conj().T @ ct).tocsr(), d)
        )
    return Superoperator(d * d, L.tocsr(), model.space, model.sector_layout)


def vec(rho: np.ndarray) -> np.ndarray:
    return rho.flatten(order="F")


def unvec(x: np.ndarray, d: int) -> np.ndarray:
    return x.reshape((d, d), order="F")


def _trace_replaced(L: sp.csr_matrix, d: int, trace_idx: np.ndarray) -> sp.csr_matrix:
    """Replace row 0 (one redundant diagonal equation) with a normalization row."""
    n = d * d
    row = sp.csr_matrix(
        (np.ones(len(trace_idx)), (np.zeros(len(trace_idx), dtype=int), trace_idx)),
        shape=(1, n),
    )
    return sp.vstack([row, L[1:, :]], format="csr")


def _finish(x: np.ndarray, L: Superoperator) -> DensityMatrix:
    d = L.space.total_dim
    rho = unvec(x, d)
    rho = 0.5 * (rho + rho.conj().T)
    tr = np.trace(rho).real
    if not np.isfinite(tr) or abs(tr) < 1e-300:
        raise DegenerateSteadyStateError("solution has no usable trace")
    rho = rho / tr
    res = float(np.max(np.abs(L.entries @ vec(rho))))
    if not np.isfinite(res) or res > RESIDUAL_TOL:
        raise DegenerateSteadyStateError(
            f"steady-state residual {res:.3e} exceeds {RESIDUAL_TOL:.0e}; "
            "kernel is degenerate or the model is mis-built",
            residual=res,
        )
    try:
        return DensityMatrix(L.space, rho)
    except ValidationError as exc:
        raise DegenerateSteadyStateError(
            f"solution is not a density matrix: {exc}", residual=res
        ) from exc


def _solve_direct(L: Superoperator) -> np.ndarray:
    d = L.space.total_dim
    n = d * d
    A = _trace_replaced(L.entries, d, np.arange(d) * (d + 1))
    b = np.zeros(n, dtype=np.complex128)
    b[0] = 1.0
    try:
        lu = spla.splu(A.tocsc())
        x = lu.solve(b)
        for _ in range(2):  # iterative refinement
            x = x + lu.solve(b - A @ x)
    except RuntimeError as exc:  # singular factorization
        raise DegenerateSteadyStateError(f"direct solve failed: {exc}") from exc
    return x


# dense per-sector LU factors, keyed by (emitter digest, z); bounded because
# a filter sweep would otherwise accumulate one set per linewidth
_BLOCK_LU_CACHE: OrderedDict = OrderedDict()
_BLOCK_LU_CAPACITY = 32


def _block_lu(layout: SectorLayout, key, matrix_fn):
    full_key = (layout.digest, key)
    if full_key in _BLOCK_LU_CACHE:
        _BLOCK_LU_CACHE.move_to_end(full_key)
        return _BLOCK_LU_CACHE[full_key]
    lu = sla.lu_factor(matrix_fn())
    _BLOCK_LU_CACHE[full_key] = lu
    if len(_BLOCK_LU_CACHE) > _BLOCK_LU_CAPACITY:
        _BLOCK_LU_CACHE.popitem(last=False)
    return lu


def layout_digest(lem: sp.csr_matrix, Gamma: float, delta_f: float) -> str:
    h = hashlib.sha256()
    h.update(np.asarray(lem.shape, dtype=np.int64).tobytes())
    h.update(lem.indptr.tobytes())
    h.update(lem.indices.tobytes())
    h.update(lem.data.tobytes())
    h.update(np.float64([Gamma, delta_f]).tobytes())
    return h.hexdigest()


class _SectorSweep:
    """One level-ordered block Gauss-Seidel sweep, used to precondition lgmres.

    Sectors (u, v) are sensor bit patterns on ket and bra sides. Couplings
    only go from level m = n_u + n_v to m +- 1 (coherent, O(eps)) or m - 2
    (jump refill, O(Gamma)), so sweeping levels in ascending order with a
    fresh residual per level nearly inverts the whole operator.
    """

    def __init__(self, A: sp.csr_matrix, layout: SectorLayout):
        D = layout.emitter_dim
        k = layout.count
        two_k = 2 ** k
        self.A = A
        self.D = D
        self.d = D * two_k
        self.n = self.d * self.d
        self.layout = layout
        pops = np.array([bin(u).count("1") for u in range(two_k)])
        levels: dict[int, list[tuple[int, int]]] = {}
        for u in range(two_k):
            for v in range(two_k):
                levels.setdefault(pops[u] + pops[v], []).append((u, v))
        self.levels = [levels[m] for m in sorted(levels)]
        ar = np.arange(D)
        self.indices = {
            (u, v): ((ar * two_k + u)[:, None] + self.d * (ar * two_k + v)[None, :])
            .flatten(order="F")
            for lvl in self.levels
            for (u, v) in lvl
        }
        self.pops = pops

    def _lu_for(self, u: int, v: int):
        layout = self.layout
        D = layout.emitter_dim
        if (u, v) == (0, 0):
            def build00():
                m = layout.emitter_liouvillian.toarray()
                m[0, :] = 0.0
                m[0, np.arange(D) * (D + 1)] = 1.0  # matches the global trace row
                return m
            return _block_lu(layout, "anchor", build00)
        nu, nv = int(self.pops[u]), int(self.pops[v])
        z = -(layout.Gamma / 2.0) * (nu + nv) + 1j * layout.delta_f * (nv - nu)
        def build():
            return layout.emitter_liouvillian.toarray() + z * np.eye(D * D)
        return _block_lu(layout, (nu, nv), build)

    def __call__(self, r: np.ndarray) -> np.ndarray:
        x = np.zeros(self.n, dtype=np.complex128)
        for i, lvl in enumerate(self.levels):
            rr = r - self.A @ x if i else r
            for (u, v) in lvl:
                idx = self.indices[(u, v)]
                x[idx] += sla.lu_solve(self._lu_for(u, v), rr[idx])
        return x


def _solve_krylov(L: Superoperator) -> np.ndarray:
    d = L.space.total_dim
    n = d * d
    layout = L.sector_layout
    if layout is not None:
        # normalization row fixes the emitter trace inside the sensor-vacuum
        # sector; global trace is restored afterwards
        D = layout.emitter_dim
        two_k = d // D
        em_diag = np.arange(D) * two_k
        trace_idx = em_diag + d * em_diag
    else:
        trace_idx = np.arange(d) * (d + 1)
    A = _trace_replaced(L.entries, d, trace_idx)
    b = np.zeros(n, dtype=np.complex128)
    b[0] = 1.0
    if layout is not None:
        M = spla.LinearOperator((n, n), matvec=_SectorSweep(A, layout),
                                dtype=np.complex128)
    else:
        try:
            ilu = spla.spilu(A.tocsc(), drop_tol=1e-5, fill_factor=20)
            M = spla.LinearOperator((n, n), matvec=ilu.solve, dtype=np.complex128)
        except RuntimeError:
            return _solve_direct(L)
    x, info = spla.lgmres(A, b, M=M, rtol=1e-13, atol=1e-13, maxiter=200)
    if info != 0 and layout is None:
        return _solve_direct(L)  # last resort, memory permitting
    if info != 0:
        raise DegenerateSteadyStateError(f"Krylov solve stalled (info={info})")
    return x


def steady_state(L: Superoperator, check_unique: bool = False) -> DensityMatrix:
    """Unique steady state of L, or a degenerate-steady-state error.

    One redundant row of L is replaced by the trace constraint; the system
    is factorized directly up to Hilbert dimension 64 and handed to
    restarted Krylov above that. Residual contract: ||L rho||_inf <= 1e-10.
    """
    d = L.space.total_dim
    if check_unique:
        if d > DIRECT_DIM_LIMIT:
            raise ValidationError("uniqueness check is a dense SVD; small systems only")
        A = _trace_replaced(L.entries, d, np.arange(d) * (d + 1))
        s = np.linalg.svd(A.toarray(), compute_uv=False)
        if s[-2] <= 1e-8 * s[0]:
            raise DegenerateSteadyStateError(
                f"kernel is not one-dimensional (sigma_2/sigma_1 = {s[-2]/s[0]:.3e})"
            )
    if d <= DIRECT_DIM_LIMIT:
        x = _solve_direct(L)
    else:
        x = _solve_krylov(L)
    return _finish(x, L)


def unfiltered_gk(rho: DensityMatrix, mode: ComplexOperator, k: int) -> float:
    """Zero-delay k-th order correlation <(m+)^k m^k> / <m+ m>^k."""
    if k < 2:
        raise ValidationError(f"correlation order must be >= 2, got {k}")
    pop = expectation(rho, mode.dagger() @ mode)
    if abs(pop.imag) > 1e-10:
        raise ValidationError(f"population has imaginary part {pop.imag:.3e}")
    if pop.real <= 0.0:
        raise UndefinedCorrelationError(
            f"mode population {pop.real:.3e} is not positive", population=pop.real
        )
    mk = mode
    for _ in range(k - 1):
        mk = mk @ mode
    num = expectation(rho, mk.dagger() @ mk)
    if abs(num.imag) > 1e-10 * max(1.0, abs(num.real)):
        raise ValidationError(f"correlator has imaginary part {num.imag:.3e}")
    return float(num.real / pop.real ** k)
