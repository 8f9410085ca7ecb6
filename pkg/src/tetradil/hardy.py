"""Shifts and Toeplitz operators on l2(E), identified with the Hardy space H^2(E).

A copy number ``n`` in ``SequenceOf(E)`` is the coefficient of ``z^n``.
Symbols are trigonometric polynomials ``phi(z) = sum_n Phi_n z^n`` whose
coefficients are operators on ``E``; the Toeplitz operator has block ``(i, j)``
equal to ``Phi_{i-j}``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dense import (dense_matrix, operator_norm_estimate, schur_bound, spectral_norm,
                    truncate_dense)
from .operators import LocalOp, identity_op, window_equality, zero_op
from .spaces import SequenceOf, Space, SpaceMismatch, window


@dataclass(frozen=True)
class OperatorSymbol:
    coeff_space: Space
    coeffs: dict = field(default_factory=dict)

    def __post_init__(self):
        for n, c in self.coeffs.items():
            if not isinstance(n, (int, np.integer)):
                raise TypeError(f"symbol exponents must be ints, got {n!r}")
            if c.domain != self.coeff_space or c.codomain != self.coeff_space:
                raise SpaceMismatch(f"coefficient of z^{n} is not an endomorphism of {self.coeff_space}")

    def degrees(self) -> list[int]:
        return sorted(self.coeffs)

    def times_z(self, k: int = 1) -> "OperatorSymbol":
        return OperatorSymbol(self.coeff_space, {n + k: c for n, c in self.coeffs.items()})

    def dense_coeffs(self, depth: int) -> dict[int, np.ndarray]:
        idx = window(self.coeff_space, depth)
        return {n: dense_matrix(c, idx, idx) for n, c in self.coeffs.items()}


def scalar_symbol(space: Space, coeffs: dict) -> OperatorSymbol:
    """Symbol with coefficients ``c * I`` for scalar ``c``."""
    ident = identity_op(space)
    return OperatorSymbol(space, {n: complex(c) * ident for n, c in coeffs.items()})


def shift_op(e: Space, k: int = 1) -> LocalOp:
    """Multiplication by ``z^k`` on ``l2(e)``."""
    if k < 1:
        raise ValueError("shift power must be >= 1")
    seq = SequenceOf(e)
    return LocalOp(
        seq, seq,
        lambda idx: {(idx[0] + k,) + idx[1:]: 1.0},
        lambda idx: {(idx[0] - k,) + idx[1:]: 1.0} if idx[0] >= k else {},
        band=k, name=f"T_z^{k}" if k > 1 else "T_z",
    )


def toeplitz_from_symbol(sym: OperatorSymbol) -> LocalOp:
    seq = SequenceOf(sym.coeff_space)
    terms = sorted(sym.coeffs.items())

    def column(idx):
        j, rest = idx[0], idx[1:]
        acc: dict = {}
        for n, c in terms:
            if j + n >= 0:
                for k, v in c.col(rest).items():
                    key = (j + n,) + k
                    acc[key] = acc.get(key, 0) + v
        return acc

    # (T_phi)^* = T_psi with psi_n = (phi_{-n})^*
    def adjoint_column(idx):
        i, rest = idx[0], idx[1:]
        acc: dict = {}
        for n, c in terms:
            if i - n >= 0:
                for k, v in c.adj_col(rest).items():
                    key = (i - n,) + k
                    acc[key] = acc.get(key, 0) + v
        return acc

    band = max((abs(n) + c.band for n, c in terms), default=0)
    return LocalOp(seq, seq, column, adjoint_column, band=band, name="T_phi")


@dataclass(frozen=True)
class SupNormBracket:
    lower: float
    upper: float
    grid_size: int


def symbol_sup_norm(sym: OperatorSymbol, grid_size: int = 1024, depth: int = 8) -> SupNormBracket:
    """Two-sided bound on ``sup_{|z|=1} ||phi(z)||``.

    ``lower`` is the largest norm over ``grid_size`` equispaced points of the
    circle (coefficients compressed to ``depth``).  ``upper`` is the smaller of
    the grid maximum plus the Lipschitz slack ``sum |n| ||Phi_n|| * pi / grid_size``
    and the Schur-test bound on ``T_phi``, whose norm equals the sup-norm.
    """
    if grid_size < 4:
        raise ValueError("grid_size must be >= 4")
    if not sym.coeffs:
        return SupNormBracket(0.0, 0.0, grid_size)
    mats = sym.dense_coeffs(depth)
    theta = 2 * np.pi * np.arange(grid_size) / grid_size
    z = np.exp(1j * theta)
    dim = next(iter(mats.values())).shape[0]
    stack = np.zeros((grid_size, dim, dim), dtype=complex)
    for n, m in mats.items():
        stack += (z ** n)[:, None, None] * m[None, :, :]
    if dim == 0:
        lower = 0.0
    else:
        lower = float(np.max(np.linalg.norm(stack, ord=2, axis=(1, 2))))
    slack = sum(abs(n) * operator_norm_estimate(c, tol=1e-12, max_depth=max(depth, 4)).upper
                for n, c in sym.coeffs.items() if n != 0)
    schur = schur_bound(toeplitz_from_symbol(sym), depth)
    upper = max(lower, min(lower + slack * np.pi / grid_size, schur))
    return SupNormBracket(lower, upper, grid_size)


def _outer_blocks(op: LocalOp, depth: int):
    seq = op.domain
    if not (isinstance(seq, SequenceOf) and op.codomain == seq):
        raise SpaceMismatch("expected an endomorphism of a SequenceOf space")
    inner = window(seq.inner, depth)
    dw = truncate_dense(op, depth)
    b = len(inner)
    m = dw.matrix.reshape(depth, b, depth, b)
    return m  # m[i, :, j, :] is block (i, j)


def tz2_commutant_pattern_check(op: LocalOp, depth: int = 8, tol: float = 1e-12) -> bool:
    """Does the dense window of ``op`` have the block pattern of an element commuting with ``T_{z^2}``?

    For block columns ``j >= 2`` the pattern requires ``T[i, j] = T[i-2, j-2]``
    when ``i >= 2`` and ``T[i, j] = 0`` for ``i < 2``.  Only a necessary check at
    finite depth.
    """
    m = _outer_blocks(op, depth)
    for j in range(2, depth):
        for i in range(depth):
            target = m[i - 2, :, j - 2, :] if i >= 2 else 0.0
            if np.max(np.abs(m[i, :, j, :] - target), initial=0.0) > tol:
                return False
    return True


def commutes_with_tz2(op: LocalOp, depth: int = 8, tol: float = 1e-12):
    """Exact window check of ``op T_{z^2} = T_{z^2} op``; returns ``(ok, deviation)``."""
    s2 = shift_op(op.domain.inner, 2)
    return window_equality(op @ s2, s2 @ op, window(op.domain, depth), tol)


def analytic_symbol_check(sym: OperatorSymbol, depth: int = 8, tol: float = 1e-12) -> bool:
    """True iff every coefficient of a negative power of ``z`` vanishes (on the window)."""
    idx = window(sym.coeff_space, depth)
    for n, c in sym.coeffs.items():
        if n < 0:
            zero = zero_op(sym.coeff_space)
            ok, _ = window_equality(c, zero, idx, tol)
            if not ok:
                return False
    return True


def extract_symbol(op: LocalOp, depth: int = 8) -> dict[int, np.ndarray]:
    """Read ``Phi_n`` off the dense window of a Toeplitz-shaped operator.

    Nonnegative coefficients come from block column 0 (``Phi_n = T[n, 0]``),
    negative ones from block row 0 (``Phi_{-n} = T[0, n]``).
    """
    m = _outer_blocks(op, depth)
    out = {n: m[n, :, 0, :].copy() for n in range(depth)}
    for n in range(1, depth):
        out[-n] = m[0, :, n, :].copy()
    return out


def toeplitz_deviation(op: LocalOp, depth: int = 8) -> float:
    """Largest ``|T[i+1, j+1] - T[i, j]|`` over the window; zero for Toeplitz operators."""
    m = _outer_blocks(op, depth)
    if depth < 2:
        return 0.0
    return float(np.max(np.abs(m[1:, :, 1:, :] - m[:-1, :, :-1, :]), initial=0.0))


def symbol_at(sym: OperatorSymbol, z: complex, depth: int = 8) -> np.ndarray:
    idx = window(sym.coeff_space, depth)
    out = np.zeros((len(idx), len(idx)), dtype=complex)
    for n, m in sym.dense_coeffs(depth).items():
        out += (z ** n) * m
    return out


def symbol_norm_at(sym: OperatorSymbol, z: complex, depth: int = 8) -> float:
    return spectral_norm(np.atleast_2d(symbol_at(sym, z, depth)))
