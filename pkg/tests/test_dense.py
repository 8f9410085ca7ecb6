import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from tetradil.dense import (DenseWindow, NotPSDError, operator_norm_estimate, pinv_hermitian,
                            psd_sqrt_dense, range_projector, schur_bound, truncate_dense)
from tetradil.hardy import shift_op
from tetradil.operators import copy_op, matrix_op
from tetradil.spaces import Finite, SequenceOf

C2 = Finite(2)


def _window(m):
    idx = tuple((i,) for i in range(m.shape[0]))
    return DenseWindow(idx, idx, m)


floats = st.floats(-3, 3, allow_nan=False, allow_infinity=False)


@settings(max_examples=60, deadline=None)
@given(arrays(np.float64, (2, 4, 4), elements=floats))
def test_psd_sqrt_squares_back(parts):
    x = parts[0] + 1j * parts[1]
    a = x @ x.conj().T
    r = psd_sqrt_dense(_window(a)).matrix
    assert np.allclose(r, r.conj().T, atol=1e-12)
    assert np.min(np.linalg.eigvalsh(r)) > -1e-10
    assert np.allclose(r @ r, a, atol=1e-9 * max(1.0, np.abs(a).max()))


def test_psd_sqrt_rejects_indefinite_and_clamps_tiny_negatives():
    with pytest.raises(NotPSDError):
        psd_sqrt_dense(_window(np.diag([1.0, -0.5])))
    with pytest.raises(NotPSDError):
        psd_sqrt_dense(_window(np.array([[0, 1], [0, 0]], dtype=complex)))
    r = psd_sqrt_dense(_window(np.diag([4.0, -1e-13]))).matrix
    assert np.allclose(r, np.diag([2.0, 0.0]))


def test_finite_norm_matches_svd():
    rng = np.random.default_rng(3)
    m = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    est = operator_norm_estimate(matrix_op(m))
    assert est.converged and est.depth == 1
    assert est.lower == pytest.approx(np.linalg.svd(m, compute_uv=False)[0], rel=1e-14)
    assert est.upper >= est.lower


def test_shift_norm_is_one_and_bracket_is_tight():
    est = operator_norm_estimate(shift_op(C2, 2))
    assert est.lower == 1.0 and est.upper == 1.0 and est.converged


def test_schur_dominates_compressions():
    seq = SequenceOf(C2)
    op = shift_op(C2) + 0.3 * copy_op(seq, 1, matrix_op([[1, 2], [0, 1j]]))
    for depth in (2, 4, 8):
        assert schur_bound(op, depth) >= np.linalg.norm(truncate_dense(op, depth).matrix, 2) - 1e-12


def test_pinv_and_range_projector():
    a = np.diag([2.0, 0.0, 1e-14])
    assert np.allclose(pinv_hermitian(a), np.diag([0.5, 0, 0]))
    assert np.allclose(range_projector(a), np.diag([1.0, 0, 0]))


def test_nonpositive_tolerance_rejected():
    with pytest.raises(ValueError):
        operator_norm_estimate(shift_op(C2), tol=0)


def test_dense_window_json_layout():
    w = DenseWindow(((0,), (1,)), ((0,),), np.array([[1 + 2j], [0]]))
    assert w.to_json() == [[[1.0, 2.0]], [[0.0, 0.0]]]
    with pytest.raises(ValueError):
        DenseWindow(((0,),), ((0,),), np.zeros((2, 1)))
