import numpy as np
import pytest

from tetradil import constructions as cons
from tetradil.dense import dense_matrix
from tetradil.operators import (commutator_op, identity_op, matrix_op, ops_equal,
                                window_equality, zero_op)
from tetradil.report import FAIL, PASS
from tetradil.spaces import Finite, SequenceOf, window
from tetradil.tetrablock import (FundamentalPair, OperatorTriple, make_defect,
                                 tetrablock_isometry_check)

ALPHAS = [0, 0.25, 0.9j, 1, 0.5 * np.exp(0.25j * np.pi)]


def _all_pass(checks):
    return all(c.status == PASS for c in checks)


@pytest.mark.parametrize("alpha", ALPHAS)
def test_pal_products_vanish(alpha):
    t = cons.pal_triple(alpha)
    z = zero_op(t.space)
    for s in t.ops:
        for u in t.ops:
            if s is not u:
                assert ops_equal(s @ u, z, 6)[0]


def test_pal_blocks():
    t = cons.pal_triple(0.25)
    assert t.a.col((2, 0, 1)) == {(2, 0, 0): 0.25}
    assert t.p.col((1, 3, 0)) == {(2, 4, 0): 1}
    assert t.p.col((0, 3, 1)) == {(3, 3, 1): 1}
    assert t.p.col((2, 0, 0)) == {} and t.p.col((3, 0, 0)) == {}


def test_alpha_outside_disc_rejected():
    with pytest.raises(ValueError):
        cons.PalParameters(1.1)
    assert cons.PalParameters(1.1, strict=False).alpha == 1.1


@pytest.mark.parametrize("alpha", ALPHAS)
def test_pal_fundamentals(alpha):
    fp = cons.pal_fundamentals(alpha)
    ds = fp.space
    assert ops_equal(fp.f1 @ fp.f1, zero_op(ds), 6)[0]
    idx = window(ds, 6)
    # 2x2 arithmetic: [H1, H1^*] = diag(|a|^2, -|a|^2)
    m = dense_matrix(commutator_op(fp.f1, fp.f1.H), idx, idx)
    assert np.linalg.norm(m, 2) == pytest.approx(abs(alpha) ** 2, abs=1e-15)
    assert np.allclose(dense_matrix(commutator_op(fp.f2, fp.f2.H), idx, idx), 0)


def test_explicit_dilation_preconditions():
    t = cons.pal_triple(0.5)
    d = cons.pal_defect()
    fp = cons.pal_fundamentals(0.5)
    with pytest.raises(ValueError):
        cons.explicit_dilation(t, FundamentalPair(fp.f1, fp.f1), d)
    sq = FundamentalPair(fp.f1 + identity_op(fp.space), zero_op(fp.space))
    with pytest.raises(ValueError):
        cons.explicit_dilation(t, sq, d)


def test_explicit_dilation_zero_alpha():
    t, d, fp, dil = cons.pal_suite_objects(0)
    k = dil.big_space
    assert ops_equal(dil.v1, zero_op(k), 5)[0]
    assert ops_equal(dil.v2, zero_op(k), 5)[0]
    assert ops_equal(dil.v3.H @ dil.v3, identity_op(k), 5)[0]


def test_explicit_dilation_columns():
    _, _, _, dil = cons.pal_suite_objects(0.5)
    # h in part 2 copy 0 coordinate 0 is D_P-visible: V1 sends it to F1^* D_P h at copy 0
    assert dil.v1.col((0, 2, 0, 0)) == {(1, 0, 0, 0, 1): 0.5}
    assert dil.v3.col((0, 3, 2, 1)) == {(1, 1, 1, 2, 1): 1}
    assert dil.v3.col((1, 4, 0, 0, 0)) == {(1, 6, 0, 0, 0): 1}


@pytest.mark.parametrize("alpha", ALPHAS)
def test_adjoint_dilation(alpha):
    dil, data, d = cons.adjoint_dilation(alpha)
    t = cons.pal_triple(alpha)
    idx = window(t.space, 6)
    dm = data.dp_star_map
    assert window_equality(data.dp_star @ data.dp_star, identity_op(t.space) - t.p @ t.p.H, idx)[0]
    assert window_equality(t.a.H - t.b @ t.p.H, dm.H @ data.g1 @ dm, idx)[0]
    assert _all_pass(tetrablock_isometry_check(dil.triple(), 6))
    if alpha == 0:
        assert ops_equal(dil.v1, zero_op(dil.big_space), 5)[0]


@pytest.mark.parametrize("alpha", ALPHAS)
def test_toeplitz_form_matches_explicit(alpha):
    t, d, fp, sec = cons.pal_suite_objects(alpha)
    toe = cons.toeplitz_dilation(t, fp, cons.XiCandidate(fp.f1.H), d)
    for a, b in zip((toe.v1, toe.v2, toe.v3), (sec.v1, sec.v2, sec.v3)):
        assert ops_equal(a, b, 6)[0]


def test_xi_conditions_pal():
    alpha = 0.6j
    t, d, fp, _ = cons.pal_suite_objects(alpha)
    rep = cons.xi_conditions(fp, fp.f1.H, d, t.p, 6)
    assert rep.passed and rep.sup_lower == pytest.approx(0.6)
    zero = cons.xi_conditions(fp, zero_op(fp.space), d, t.p, 6)
    failed = [c.name for c in zero.checks if c.status != PASS]
    assert failed == ["xi-identity-2"]
    assert zero.by_name("xi-identity-2").deviation == pytest.approx(0.36, abs=1e-15)


def test_xi_sup_norm_status():
    t, d, fp, _ = cons.pal_suite_objects(1.0)
    assert cons.xi_conditions(fp, fp.f1.H, d, t.p, 4).by_name("xi-sup-norm").status == PASS
    big = cons.xi_conditions(fp, 3 * fp.f1.H, d, t.p, 4).by_name("xi-sup-norm")
    assert big.status == FAIL and big.value == pytest.approx(3.0)


def test_sup_norm_bracket_when_schur_is_loose():
    # (1/sqrt2)[[1, z], [1, -z]] is unitary on the circle; the Schur bound on its
    # Toeplitz operator is sqrt2, so only the Lipschitz slack is left
    from tetradil.hardy import OperatorSymbol, symbol_sup_norm
    r = 2 ** -0.5
    sym = OperatorSymbol(Finite(2), {0: matrix_op([[r, 0], [r, 0]]),
                                     1: matrix_op([[0, r], [0, -r]])})
    br = symbol_sup_norm(sym, 64)
    assert br.lower == pytest.approx(1.0, abs=1e-14)
    assert br.upper == pytest.approx(1 + np.pi / 64, abs=1e-12)


def test_perturbed_xi_breaks_commutativity():
    # Xi = F1^* + eps I keeps identities 1-4 but not 5, and the assembled triple stops working
    t, d, fp, _ = cons.pal_suite_objects(0.5)
    xi = fp.f1.H + 0.1 * identity_op(fp.space)
    rep = cons.xi_conditions(fp, xi, d, t.p, 5)
    assert [c.name for c in rep.checks if c.status != PASS] == ["xi-identity-5"]
    toe = cons.toeplitz_dilation(t, fp, xi, d)
    checks = {c.name: c for c in tetrablock_isometry_check(toe.triple(), 5)}
    assert not all(c.status == PASS for n, c in checks.items() if n.startswith("commute")
                   or n == "V1=V2*V3")


def test_xi_search_pal_and_trivial():
    t, d, fp, _ = cons.pal_suite_objects(0.5)
    cand = cons.xi_search(fp, d, t.p)
    assert cand is not None and cand.residual < 1e-8
    assert cons.xi_conditions(fp, cand, d, t.p, 6, tol=1e-10).passed

    c2 = Finite(2)
    triv = make_defect(identity_op(c2), c2, identity_op(c2))
    zero = FundamentalPair(zero_op(c2), zero_op(c2))
    got = cons.xi_search(zero, triv, zero_op(c2))
    assert got is not None
    assert np.allclose(dense_matrix(got.xi, window(c2, 1), window(c2, 1)), 0)


def test_xi_search_gives_up_when_f1_f2_do_not_commute():
    c2 = Finite(2)
    triv = make_defect(identity_op(c2), c2, identity_op(c2))
    fp = FundamentalPair(matrix_op([[0, 0.5], [0, 0]]), matrix_op([[0, 0], [0.5, 0]]))
    assert cons.xi_search(fp, triv, zero_op(c2), budget=50) is None


def test_forward_direction_on_a_finite_example():
    # F1 = F2 = 0 with a normal Xi of norm <= 1 on a trivial defect piece
    c1 = Finite(1)
    t = OperatorTriple(zero_op(c1), zero_op(c1), zero_op(c1))
    d = make_defect(identity_op(c1), c1, identity_op(c1))
    fp = FundamentalPair(zero_op(c1), zero_op(c1))
    xi = matrix_op([[0.0]])
    assert cons.xi_conditions(fp, xi, d, t.p, 2).passed
    dil = cons.toeplitz_dilation(t, fp, xi, d)
    assert _all_pass(tetrablock_isometry_check(dil.triple(), 6))


def test_lower_right_symbol_of_explicit_dilation():
    t, d, fp, sec = cons.pal_suite_objects(0.5)
    coeffs = cons.lower_right_symbol(sec, sec.v1, 5)
    idx = window(fp.space, 5)
    assert np.allclose(coeffs[0], dense_matrix(fp.f1, idx, idx))
    assert np.allclose(coeffs[1], dense_matrix(fp.f1.H, idx, idx))
    assert all(np.allclose(coeffs[n], 0) for n in coeffs if n < 0 or n > 2)
    assert SequenceOf(fp.space) == sec.big_space.parts[1]
