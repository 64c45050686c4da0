import numpy as np
import pytest
import scipy.sparse as sp

from sps_norm.errors import DimensionCapError, ShapeError, ValidationError
from sps_norm.hilbert import (
    ComplexOperator,
    DensityMatrix,
    HilbertSpace,
    bosonic_lowering,
    embed,
    expectation,
    identity,
    partial_trace,
    two_level_lowering,
)


def random_state(rng, space):
    n = space.total_dim
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    rho = a @ a.conj().T
    return DensityMatrix(space, rho / np.trace(rho))


def random_operator(rng, space):
    n = space.total_dim
    m = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return ComplexOperator(space, sp.csr_matrix(m))


def test_space_rejects_tiny_factors():
    with pytest.raises(ValidationError):
        HilbertSpace((1, 3))
    with pytest.raises(ValidationError):
        HilbertSpace(())


def test_space_dimension_cap():
    with pytest.raises(DimensionCapError):
        HilbertSpace((2,) * 13)  # 8192 > default cap
    big = HilbertSpace((2,) * 13, cap=10000)
    assert big.total_dim == 8192


def test_two_level_lowering_matrix():
    sig = two_level_lowering()
    assert np.array_equal(sig.toarray(), [[0, 1], [0, 0]])
    # exactly nilpotent, no roundoff
    assert (sig @ sig).entries.nnz == 0


def test_bosonic_lowering_entries():
    a = bosonic_lowering(5)
    dense = a.toarray()
    for n in range(1, 5):
        assert dense[n - 1, n] == pytest.approx(np.sqrt(n))
    num = (a.dagger() @ a).toarray()
    assert np.allclose(np.diag(num), np.arange(5))


def test_operator_algebra_matches_dense():
    rng = np.random.default_rng(7)
    space = HilbertSpace((3, 2))
    x = random_operator(rng, space)
    y = random_operator(rng, space)
    assert np.allclose((x @ y).toarray(), x.toarray() @ y.toarray())
    assert np.allclose((x + y).toarray(), x.toarray() + y.toarray())
    assert np.allclose((x - 2.5 * y).toarray(), x.toarray() - 2.5 * y.toarray())
    assert np.allclose((-x).toarray(), -x.toarray())
    assert np.allclose(x.dagger().toarray(), x.toarray().conj().T)


def test_cross_space_operations_rejected():
    x = identity(HilbertSpace((2,)))
    y = identity(HilbertSpace((3,)))
    with pytest.raises(ShapeError):
        x @ y
    with pytest.raises(ShapeError):
        x + y


def test_embed_slots_commute():
    space = HilbertSpace((2, 4))
    s = embed(two_level_lowering(), space, 0)
    a = embed(bosonic_lowering(4), space, 1)
    gap = (s @ a - a @ s).maxabs()
    assert gap == 0.0


def test_embed_dim_mismatch():
    space = HilbertSpace((2, 4))
    with pytest.raises(ShapeError):
        embed(bosonic_lowering(3), space, 1)
    with pytest.raises(ShapeError):
        embed(two_level_lowering(), space, 2)


def test_expectation_matches_dense_trace():
    rng = np.random.default_rng(11)
    space = HilbertSpace((2, 3))
    rho = random_state(rng, space)
    op = random_operator(rng, space)
    want = np.trace(op.toarray() @ rho.entries)
    assert expectation(rho, op) == pytest.approx(want, rel=1e-12)


def test_partial_trace_product_state():
    rng = np.random.default_rng(3)
    sa, sb = HilbertSpace((3,)), HilbertSpace((4,))
    ra = random_state(rng, sa)
    rb = random_state(rng, sb)
    joint = DensityMatrix(HilbertSpace((3, 4)), np.kron(ra.entries, rb.entries))
    back_a = partial_trace(joint, keep=0)
    back_b = partial_trace(joint, keep=1)
    assert np.allclose(back_a.entries, ra.entries, atol=1e-12)
    assert np.allclose(back_b.entries, rb.entries, atol=1e-12)


def test_partial_trace_is_trace_preserving():
    rng = np.random.default_rng(5)
    space = HilbertSpace((2, 3, 2))
    rho = random_state(rng, space)
    for slot in range(3):
        red = partial_trace(rho, keep=slot)
        assert np.trace(red.entries) == pytest.approx(1.0, abs=1e-12)
        assert red.space.subsystem_dims == (space.subsystem_dims[slot],)


def test_partial_trace_expectation_consistency():
    # local expectation values must survive tracing out the rest
    rng = np.random.default_rng(13)
    space = HilbertSpace((2, 3))
    rho = random_state(rng, space)
    local = random_operator(rng, HilbertSpace((3,)))
    lifted = embed(local, space, 1)
    red = partial_trace(rho, keep=1)
    assert expectation(rho, lifted) == pytest.approx(expectation(red, local), rel=1e-10)


def test_density_matrix_validation():
    space = HilbertSpace((2,))
    with pytest.raises(ValidationError):
        DensityMatrix(space, np.diag([0.7, 0.7]))  # trace 1.4
    with pytest.raises(ValidationError):
        DensityMatrix(space, np.array([[0.5, 0.3], [0.1, 0.5]]))  # not Hermitian
    with pytest.raises(ValidationError):
        DensityMatrix(space, np.diag([1.5, -0.5]))  # negative weight
    with pytest.raises(ShapeError):
        DensityMatrix(space, np.eye(3) / 3)


def test_diagonal_is_real_copy():
    space = HilbertSpace((2,))
    rho = DensityMatrix(space, np.array([[0.25, 0.1j], [-0.1j, 0.75]]))
    d = rho.diagonal()
    assert d.dtype == np.float64
    assert np.allclose(d, [0.25, 0.75])
    d[0] = 9.0  # a copy, not a view
    assert rho.entries[0, 0] == 0.25
