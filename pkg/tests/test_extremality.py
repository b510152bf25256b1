import warnings

import numpy as np
import pytest

from mts.channel import ContractError, KrausSet, choi, reduce_to_independent
from mts.constructions import (
    construct_general,
    construct_n3,
    construct_n4,
    diagonal_vandermonde,
    make_rng,
    mixture_of_unitaries,
    random_diagonal_ucpt,
    random_mixture,
    random_unitary,
)
from mts.extremality import (
    complement_vectors,
    cross_validate,
    ls_bi_independence,
    ls_stacked_matrix,
    ps_stacked_matrix,
    ps_support_test,
    rank_bound,
    smallest_singular_ratio,
    traceless_product_vectors,
)
from mts.state import marginal_state

from oracles import ls_matrix_loops, max_entangled, ps_intersection_dimension, row_reduction_rank


def test_ls_matrix_matches_loops():
    for ks in (construct_n3(), construct_n4(), random_mixture(3, 3, 0)):
        assert np.allclose(ls_stacked_matrix(ks), ls_matrix_loops(list(ks.operators)))


def test_ls_single_unitary():
    u = random_unitary(3, make_rng(2))
    cert = ls_bi_independence(KrausSet.from_operators([u]))
    assert cert.is_extremal and cert.stacked_cols == 1 and cert.achieved_rank == 1


def test_ls_n3_fixture():
    cert = ls_bi_independence(construct_n3())
    assert (cert.stacked_rows, cert.stacked_cols) == (18, 16)
    assert cert.achieved_rank == 16 == row_reduction_rank(ls_stacked_matrix(construct_n3()))
    assert cert.is_extremal and cert.k_or_r == 4 and cert.method == "LS"


def test_ls_n4_fixture():
    cert = ls_bi_independence(construct_n4())
    assert (cert.stacked_rows, cert.stacked_cols, cert.achieved_rank) == (32, 25, 25)
    assert row_reduction_rank(ls_stacked_matrix(construct_n4())) == 25


def test_ls_mixture_of_two_unitaries():
    ks = mixture_of_unitaries([0.5, 0.5], [np.eye(3), np.diag([1, -1, 1])])
    cert = ls_bi_independence(ks)
    assert not cert.is_extremal
    # a = diag(1, -1) kills both halves since v_i v_i^* = v_i^* v_i = I/2
    m = ls_stacked_matrix(ks)
    a = np.zeros(4)
    a[0], a[3] = 1, -1
    assert np.allclose(m @ a, 0)


def test_ls_contract_errors():
    with pytest.raises(ContractError):
        ls_bi_independence(KrausSet.from_operators([np.diag([1, 0])]))
    dup = KrausSet.from_operators([np.eye(2), np.eye(2)], weights=[0.5, 0.5])
    with pytest.raises(ContractError):
        ls_bi_independence(dup)
    assert ls_bi_independence(reduce_to_independent(dup)).is_extremal


def test_ls_verdict_invariant_under_unitary_pair():
    rng = make_rng(3)
    for ks in (construct_n3(), construct_n4(), random_mixture(3, 2, 4)):
        u, w = random_unitary(ks.n, rng), random_unitary(ks.n, rng)
        moved = KrausSet(np.einsum("ab,kbc,cd->kad", u, ks.operators, w))
        a, b = ls_bi_independence(ks), ls_bi_independence(moved)
        assert a.achieved_rank == b.achieved_rank and a.is_extremal == b.is_extremal


def test_traceless_and_complement_bases():
    for n in (2, 3):
        b = traceless_product_vectors(n)
        c = complement_vectors(n)
        assert b.shape == ((n * n - 1) ** 2, n ** 4)
        assert c.shape == (2 * n * n - 1, n ** 4)
        full = np.vstack([b, c])
        assert np.allclose(full.conj() @ full.T, np.eye(n ** 4), atol=1e-14)


def test_ps_pure_states_are_extremal():
    for n in (2, 3):
        xi = max_entangled(n)
        cert = ps_support_test(marginal_state(np.outer(xi, xi.conj())))
        assert cert.k_or_r == 1
        assert cert.required_rank == 1 + (n * n - 1) ** 2 == cert.achieved_rank
        assert cert.is_extremal


def test_ps_n3_fixture():
    s = marginal_state(choi(construct_n3()))
    cert = ps_support_test(s)
    assert (cert.stacked_rows, cert.stacked_cols, cert.achieved_rank) == (81, 80, 80)
    m = ps_stacked_matrix(s)
    assert m.shape == (81, 80)
    assert row_reduction_rank(m) == 80
    assert ps_intersection_dimension(s.density, 3) == 0


def test_ps_maximally_mixed_is_not_extremal():
    for n in (2, 3):
        cert = ps_support_test(marginal_state(np.eye(n * n) / (n * n)))
        assert cert.k_or_r == n * n
        assert cert.required_rank > n ** 4 >= cert.achieved_rank
        assert not cert.is_extremal


def test_ps_direct_matches_complement_rank():
    cases = [construct_n3(), construct_n4(), random_mixture(3, 2, 5), random_diagonal_ucpt(2, 4, 6), diagonal_vandermonde(2, 4)]
    for ks in cases:
        s = marginal_state(choi(ks))
        a = ps_support_test(s)
        b = ps_support_test(s, direct=True)
        assert a.achieved_rank == b.achieved_rank


def test_ps_matches_svd_oracle():
    for ks in (random_mixture(3, 2, 7), random_diagonal_ucpt(2, 4, 8), construct_n4()):
        s = marginal_state(choi(ks))
        cert = ps_support_test(s)
        assert cert.is_extremal == (ps_intersection_dimension(s.density, ks.n) == 0)


def test_ps_gate_and_contract():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        s = marginal_state(choi(construct_general(6)))
    with pytest.raises(ContractError):
        ps_support_test(s)
    d = np.zeros((4, 4))
    d[0, 0] = 1
    with pytest.raises(ContractError):
        ps_support_test(marginal_state(d))


def test_cross_validate_examples():
    report = cross_validate(construct_n3())
    assert report.agree and report.ls.is_extremal and report.ps.is_extremal
    report = cross_validate(mixture_of_unitaries([0.5, 0.5], [np.eye(3), np.diag([1, -1, 1])]))
    assert report.agree and not report.ls.is_extremal


def test_cross_validate_random_diagonal():
    for seed in range(100):
        n = 2 + seed % 4
        ks = random_diagonal_ucpt(1 + seed % 3, n, seed)
        assert cross_validate(ks).agree


def test_rank_bound():
    assert [rank_bound(n) for n in (1, 2, 3, 4, 5)] == [1, 2, 4, 5, 7]
    for n in range(1, 200):
        m = rank_bound(n)
        assert m * m <= 2 * n * n - 1 < (m + 1) ** 2
    with pytest.raises(ValueError):
        rank_bound(0)


def test_certificate_as_dict_and_margin():
    cert = ls_bi_independence(construct_n3())
    d = cert.as_dict()
    assert d["method"] == "LS" and d["achieved_rank"] == 16
    assert smallest_singular_ratio(ls_stacked_matrix(construct_n3())) > 1e-3
