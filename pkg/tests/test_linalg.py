import numpy as np
import pytest

from mts.constructions import construct_n3, e, n3_operators
from mts.channel import choi
from mts.extremality import ls_stacked_matrix
from mts.linalg import (
    NumericalError,
    ShapeError,
    Tolerances,
    adjoint,
    fix_column_phases,
    gell_mann_basis,
    hermitian_eig,
    kron,
    matmul,
    matrix_unit,
    orthonormalize,
    partial_trace,
    rank,
    schur_product,
    singular_values,
    transpose,
    vectorize,
)

from oracles import max_entangled, partial_trace_loops, row_reduction_rank


def random_hermitian(rng, d):
    x = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return (x + x.conj().T) / 2


def test_matmul_matrix_units():
    assert np.array_equal(matmul(np.eye(3), e(1, 2, 3)), e(1, 2, 3))
    assert np.array_equal(matmul(e(1, 3, 3), e(3, 1, 3)), e(1, 1, 3))


def test_matmul_w4_table_entry():
    w4 = n3_operators()[3]
    assert np.allclose(matmul(adjoint(w4), w4), e(1, 1, 3) + 2 * e(3, 3, 3), atol=1e-15)


def test_matmul_shape_error():
    with pytest.raises(ShapeError):
        matmul(np.eye(2), np.eye(3))


def test_adjoint_and_transpose():
    assert np.array_equal(adjoint(e(1, 2, 2)), e(2, 1, 2))
    assert np.array_equal(adjoint(1j * e(1, 1, 2)), -1j * e(1, 1, 2))
    h = np.array([[1, 2 - 1j], [2 + 1j, 3]])
    assert np.array_equal(adjoint(h), h)
    assert np.array_equal(transpose(1j * e(1, 2, 2)), 1j * e(2, 1, 2))
    assert np.array_equal(transpose(np.eye(3)), np.eye(3))


def test_kron_index_convention():
    assert np.array_equal(kron(np.eye(2), np.eye(2)), np.eye(4))
    # composite index of (0, 1) is 1
    assert np.array_equal(kron(matrix_unit(0, 0, 2), matrix_unit(1, 1, 2)), matrix_unit(1, 1, 4))


def test_max_entangled_vector_has_unit_norm():
    for n in (2, 3, 5):
        xi = sum(kron(np.eye(n)[:, [i]], np.eye(n)[:, [i]]) for i in range(n)) / np.sqrt(n)
        assert abs(np.linalg.norm(xi) - 1) < 1e-15


def test_schur_product():
    rng = np.random.default_rng(0)
    a = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    assert np.array_equal(schur_product(np.ones((3, 3)), a), a)
    assert np.array_equal(schur_product(np.eye(3), a), np.diag(np.diag(a)))
    c = rng.standard_normal((3, 3))
    assert np.array_equal(schur_product(c, e(1, 2, 3)), c[0, 1] * e(1, 2, 3))
    with pytest.raises(ShapeError):
        schur_product(np.eye(2), np.eye(3))


def test_partial_trace_examples():
    assert np.allclose(partial_trace(np.eye(9) / 9, 3, "first"), np.eye(3) / 3)
    for n in (2, 3, 4):
        xi = max_entangled(n)
        rho = np.outer(xi, xi.conj())
        for side in ("first", "second"):
            assert np.allclose(partial_trace(rho, n, side), np.eye(n) / n, atol=1e-15)
    d = choi(construct_n3())
    assert np.allclose(partial_trace(d, 3, "second"), np.eye(3) / 3, atol=1e-14)


def test_partial_trace_matches_loops():
    rng = np.random.default_rng(1)
    for n in (2, 3):
        m = rng.standard_normal((n * n, n * n)) + 1j * rng.standard_normal((n * n, n * n))
        for side in ("first", "second"):
            assert np.allclose(partial_trace(m, n, side), partial_trace_loops(m, n, side))


def test_partial_trace_of_product():
    a = np.array([[1, 2], [3, 4]])
    b = np.array([[5, 1j], [0, 7]])
    assert np.allclose(partial_trace(np.kron(a, b), 2, "first"), np.trace(a) * b)
    assert np.allclose(partial_trace(np.kron(a, b), 2, "second"), np.trace(b) * a)


def test_partial_trace_errors():
    with pytest.raises(ShapeError):
        partial_trace(np.eye(8), 3, "first")
    with pytest.raises(ValueError):
        partial_trace(np.eye(4), 2, "middle")


def test_vectorize():
    v = vectorize(e(1, 2, 2))
    assert v.shape == (4, 1)
    assert np.array_equal(v[:, 0], np.eye(4)[1])
    rng = np.random.default_rng(2)
    a, b = rng.standard_normal((2, 3, 3))
    assert np.allclose(vectorize(a + b), vectorize(a) + vectorize(b))
    assert np.isclose(np.linalg.norm(vectorize(a)), np.linalg.norm(a))


def test_rank_examples():
    assert rank(np.eye(5)) == 5
    assert rank(np.zeros((4, 3))) == 0
    m = ls_stacked_matrix(construct_n3())
    assert m.shape == (18, 16)
    assert rank(m) == 16 == row_reduction_rank(m)


def test_rank_of_wide_and_tall_matrices():
    rng = np.random.default_rng(3)
    x = rng.standard_normal((6, 2)) @ rng.standard_normal((2, 9))
    assert rank(x) == 2
    assert rank(x.T) == 2


def test_singular_values_match_numpy():
    rng = np.random.default_rng(4)
    m = rng.standard_normal((12, 7)) + 1j * rng.standard_normal((12, 7))
    assert np.allclose(singular_values(m), np.linalg.svd(m, compute_uv=False), rtol=1e-12)


def test_singular_values_resolve_small_values():
    # eigenvalues of m^H m would lose everything below ~1e-8 here
    rng = np.random.default_rng(5)
    u = orthonormalize(rng.standard_normal((8, 8)))
    v = orthonormalize(rng.standard_normal((8, 8)))
    sv = np.array([1.0, 0.5, 1e-3, 1e-6, 1e-8, 1e-10, 1e-11, 1e-12])
    got = singular_values(u @ np.diag(sv) @ v.T)
    assert np.allclose(got, sv, rtol=1e-3)
    assert rank(u @ np.diag(sv) @ v.T) == 5


def test_singular_values_with_rounding_level_columns():
    cols = np.zeros((6, 4), dtype=complex)
    cols[:, 0] = 1.0
    cols[:, 1] = np.arange(6)
    cols[0, 2] = 1e-170
    cols[3, 3] = 2e-171j
    assert rank(cols) == 2


def test_hermitian_eig_examples():
    w, q = hermitian_eig(np.diag([3.0, 1.0, 2.0]))
    assert np.allclose(w, [3, 2, 1])
    assert np.allclose(np.abs(q), np.eye(3)[:, [0, 2, 1]])
    xi = max_entangled(3)
    w, _ = hermitian_eig(np.outer(xi, xi.conj()))
    assert np.isclose(w[0], 1) and np.allclose(w[1:], 0, atol=1e-15)
    w, _ = hermitian_eig(choi(construct_n3()))
    assert np.count_nonzero(w > 1e-9 * w[0]) == 4


def test_hermitian_eig_reconstruction():
    rng = np.random.default_rng(6)
    for d in (1, 2, 7, 40):
        h = random_hermitian(rng, d)
        w, q = hermitian_eig(h)
        assert np.all(np.diff(w) <= 0)
        assert np.linalg.norm(q @ np.diag(w) @ q.conj().T - h) <= 1e-12 * np.linalg.norm(h)
        assert np.linalg.norm(q.conj().T @ q - np.eye(d)) < 1e-12
        assert np.allclose(w, np.linalg.eigvalsh(h)[::-1], atol=1e-12)


def test_hermitian_eig_rejects_non_hermitian():
    with pytest.raises(ValueError):
        hermitian_eig(np.array([[1, 2], [0, 1]]))


def test_hermitian_eig_reports_sweeps_on_failure():
    rng = np.random.default_rng(7)
    h = random_hermitian(rng, 30)
    with pytest.raises(NumericalError) as info:
        hermitian_eig(h, Tolerances(eig_max_sweeps=1))
    assert info.value.sweeps == 1


def test_orthonormalize_examples():
    x = np.ones((3, 2)) / np.sqrt(3)
    assert orthonormalize(x).shape == (3, 1)
    q = orthonormalize(np.eye(4))
    assert np.allclose(np.abs(q), np.eye(4))
    rng = np.random.default_rng(8)
    g = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
    q = orthonormalize(g)
    assert np.linalg.norm(q.conj().T @ q - np.eye(6)) < 1e-10


def test_fix_column_phases():
    v = np.array([[1e-20, 0], [-1j, 2], [1, 0]])
    out = fix_column_phases(v)
    assert np.isclose(out[1, 0], 1) and np.isclose(out[1, 1], 2)
    assert np.allclose(np.abs(out), np.abs(v))


def test_gell_mann_basis_is_orthonormal_and_traceless():
    for n in (2, 3, 4):
        f = gell_mann_basis(n)
        assert len(f) == n * n - 1
        gram = np.array([[np.vdot(a, b) for b in f] for a in f])
        assert np.allclose(gram, np.eye(n * n - 1), atol=1e-15)
        assert all(abs(np.trace(x)) < 1e-15 for x in f)
        assert all(np.allclose(x, x.conj().T) for x in f)


def test_tolerances_validation():
    with pytest.raises(ValueError):
        Tolerances(rank_rel_tol=0)
    with pytest.raises(ValueError):
        Tolerances(eig_max_sweeps=0)
    assert Tolerances().as_dict()["eig_max_sweeps"] == 100
