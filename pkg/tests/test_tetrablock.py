import numpy as np
import pytest
from scipy.stats import unitary_group

from tetradil.dense import dense_matrix
from tetradil.hardy import shift_op
from tetradil.operators import identity_op, matrix_op, ops_equal, zero_op
from tetradil.report import FAIL, PASS
from tetradil.spaces import Finite, SequenceOf
from tetradil.tetrablock import (FundamentalSolveError, NotContractionError, OperatorTriple,
                                 TetrablockPoint, commutator_balance, defect_operator,
                                 membership_oracle, monomial_name, parse_complex, parse_point,
                                 pi_map, random_monomials, solve_fundamental,
                                 tetrablock_isometry_check)

C1, C2 = Finite(1), Finite(2)


def _brute_min_norm(x1, x2, x3, n_r=1500, n_th=240):
    """Grid over a12 = r e^{i th} with a21 fixed by the determinant."""
    c = x1 * x2 - x3
    a = np.geomspace(1e-2, 1e2, n_r)[:, None] * np.exp(2j * np.pi * np.arange(n_th) / n_th)
    m = np.empty(a.shape + (2, 2), dtype=complex)
    m[..., 0, 0], m[..., 1, 1], m[..., 0, 1], m[..., 1, 0] = x1, x2, a, c / a
    return np.linalg.norm(m, 2, axis=(-2, -1)).min()


def test_pi_and_parsing():
    p = pi_map([[1, 2], [3, 4]])
    assert tuple(p) == (1, 4, -2)
    assert parse_point("0.9,0;0.9,0;0,-1") == TetrablockPoint(0.9, 0.9, -1j)
    assert parse_complex(" 1e-3,2 ") == complex(1e-3, 2)
    for bad in ("1", "1,2,3", "nan,0", "a,b"):
        with pytest.raises(ValueError):
            parse_complex(bad)
    with pytest.raises(ValueError):
        parse_point("1,0;2,0")
    with pytest.raises(ValueError):
        pi_map(np.eye(3))


def test_outside_point_matches_brute_force():
    res = membership_oracle(TetrablockPoint(0.9, 0.9, 0))
    assert res.member is False
    assert res.achieved_norm == pytest.approx(1.8, abs=1e-9)
    assert abs(_brute_min_norm(0.9, 0.9, 0) - 1.8) < 1e-3
    assert res.bracket[0] <= res.achieved_norm


@pytest.mark.parametrize("pt", [(0.3, -0.2j, 0.1), (0.5, 0.5, 0.25), (0, 0, 0.8j)])
def test_inside_points(pt):
    res = membership_oracle(TetrablockPoint(*pt))
    assert res.member is True
    assert tuple(pi_map(res.witness)) == pytest.approx(pt)
    assert np.linalg.norm(res.witness, 2) <= 1 + 1e-9


@pytest.mark.parametrize("pt", [(0.5, 0.5, 0.3), (0.2, 0.1j, 0.7 - 0.1j)])
def test_random_points_agree_with_brute_force(pt):
    res = membership_oracle(TetrablockPoint(*pt))
    assert res.achieved_norm == pytest.approx(_brute_min_norm(*pt), abs=2e-3)


def test_boundary_mode():
    for u in unitary_group.rvs(2, size=5, random_state=7):
        res = membership_oracle(pi_map(u), "boundary")
        assert res.member is True and res.unitary_deviation < 1e-10
    inner = membership_oracle(TetrablockPoint(0.5, 0.5, 0.25), "boundary")
    assert inner.member is False and inner.unitary_deviation == pytest.approx(0.75)
    assert membership_oracle(TetrablockPoint(0, 0, -1), "boundary").member is True
    with pytest.raises(ValueError):
        membership_oracle(TetrablockPoint(0, 0, 0), "interior")


def test_scalar_fundamental_formula():
    a, b, p = 0.3 + 0.1j, -0.2j, 0.6
    t = OperatorTriple(matrix_op([[a]]), matrix_op([[b]]), matrix_op([[p]]))
    d = defect_operator(t.p)
    assert not d.is_projection
    assert dense_matrix(d.dp, [(0,)], [(0,)])[0, 0] == pytest.approx(np.sqrt(1 - p * p))
    fp = solve_fundamental(t, d)
    f1 = dense_matrix(fp.f1, [(0,)], [(0,)])[0, 0]
    f2 = dense_matrix(fp.f2, [(0,)], [(0,)])[0, 0]
    assert f1 == pytest.approx((a - np.conj(b) * p) / (1 - abs(p) ** 2), abs=1e-14)
    assert f2 == pytest.approx((b - np.conj(a) * p) / (1 - abs(p) ** 2), abs=1e-14)
    assert max(fp.residual1, fp.residual2) < 1e-14


def test_fundamental_unsolvable_on_unitary():
    # P unitary forces D_P = 0, so A - B^*P must vanish
    t = OperatorTriple(matrix_op([[0.5]]), matrix_op([[0.0]]), matrix_op([[1.0]]))
    with pytest.raises(FundamentalSolveError) as exc:
        solve_fundamental(t, defect_operator(t.p))
    assert exc.value.pair.residual1 == pytest.approx(0.5)


def test_defect_of_non_contraction():
    with pytest.raises(NotContractionError):
        defect_operator(matrix_op([[1.5]]))


def test_defect_of_isometry_vanishes():
    s = shift_op(C2)
    d = defect_operator(s)
    assert d.is_projection
    assert ops_equal(d.dp, zero_op(s.domain), 6)[0]


def test_triple_rejects_noncommuting():
    with pytest.raises(ValueError):
        OperatorTriple(matrix_op([[0, 1], [0, 0]]), matrix_op([[0, 0], [1, 0]]), zero_op(C2))


def test_isometry_check_on_shift_triples():
    seq = SequenceOf(C1)
    s = shift_op(C1)
    good = tetrablock_isometry_check(OperatorTriple(zero_op(seq), zero_op(seq), s))
    assert all(c.status == PASS for c in good)
    # the backward shift is a co-isometry only
    bad = tetrablock_isometry_check(OperatorTriple(zero_op(seq), zero_op(seq), s.H))
    by = {c.name: c for c in bad}
    assert by["isometry-V3"].status == FAIL
    over = tetrablock_isometry_check(
        OperatorTriple(2 * identity_op(seq), zero_op(seq), identity_op(seq)))
    by = {c.name: c for c in over}
    assert by["norm-V1"].status == FAIL and by["norm-V1"].value == pytest.approx(2)
    assert by["V1=V2*V3"].status == FAIL


def test_commutator_balance_scalar_pair():
    from tetradil.tetrablock import FundamentalPair
    fp = FundamentalPair(matrix_op([[0, 2], [0, 0]]), zero_op(C2))
    assert commutator_balance(fp) == pytest.approx(4.0)


def test_random_monomials_are_seeded():
    a = random_monomials(30, 4, seed=5)
    assert a == random_monomials(30, 4, seed=5)
    assert a != random_monomials(30, 4, seed=6)
    assert all(1 <= len(w) <= 4 and set(w) <= {1, 2, 3} for w in a)
    assert monomial_name((1, 3)) == "x1*x3"
