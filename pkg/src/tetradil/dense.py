"""Dense truncations of lazy operators: windows, norm brackets, PSD square roots."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .operators import LocalOp, dense_op
from .spaces import Space, has_sequence, window

# Largest window (in columns) handed to a dense SVD during depth doubling.
MAX_DENSE_COLUMNS = 2500


class NotPSDError(ValueError):
    """Matrix is not Hermitian positive semidefinite within tolerance."""


@dataclass(frozen=True)
class DenseWindow:
    rows: tuple
    cols: tuple
    matrix: np.ndarray

    def __post_init__(self):
        if self.matrix.shape != (len(self.rows), len(self.cols)):
            raise ValueError(
                f"matrix shape {self.matrix.shape} vs {len(self.rows)}x{len(self.cols)} indices")

    def to_json(self) -> list:
        """Row-major nested list of ``[re, im]`` pairs."""
        return [[[float(z.real), float(z.imag)] for z in row] for row in self.matrix]

    def submatrix(self, rows, cols) -> np.ndarray:
        rpos = {r: i for i, r in enumerate(self.rows)}
        cpos = {c: j for j, c in enumerate(self.cols)}
        return self.matrix[np.ix_([rpos[r] for r in rows], [cpos[c] for c in cols])]


def dense_matrix(op: LocalOp, rows, cols) -> np.ndarray:
    """``<op e_j, e_i>`` for ``i`` in ``rows`` and ``j`` in ``cols``."""
    pos = {r: i for i, r in enumerate(rows)}
    m = np.zeros((len(rows), len(cols)), dtype=complex)
    for j, c in enumerate(cols):
        for k, v in op.col(c).items():
            i = pos.get(k)
            if i is not None:
                m[i, j] = v
    return m


def truncate_dense(op: LocalOp, depth: int) -> DenseWindow:
    rows, cols = window(op.codomain, depth), window(op.domain, depth)
    return DenseWindow(rows, cols, dense_matrix(op, rows, cols))


def spectral_norm(m: np.ndarray) -> float:
    if m.size == 0:
        return 0.0
    return float(np.linalg.norm(m, 2))


@dataclass(frozen=True)
class NormEstimate:
    lower: float
    upper: float
    converged: bool
    depth: int


def schur_bound(op: LocalOp, depth: int) -> float:
    """Schur-test bound ``sqrt(max column l1 * max row l1)`` from the window's full columns.

    Columns and rows are taken whole (not truncated), so the bound dominates
    every compression.  It bounds the whole operator when the columns outside the
    window repeat those inside, as they do for banded Toeplitz-like tails.
    """
    col_max = max((sum(abs(v) for v in op.col(c).values()) for c in window(op.domain, depth)),
                  default=0.0)
    row_max = max((sum(abs(v) for v in op.adj_col(r).values())
                   for r in window(op.codomain, depth)), default=0.0)
    return float(np.sqrt(col_max * row_max))


def operator_norm_estimate(op: LocalOp, tol: float = 1e-10, max_depth: int = 256,
                           start_depth: int = 4) -> NormEstimate:
    """Bracket ``||op||`` by compressions (from below) and the Schur test (from above).

    Depth doubles from ``start_depth`` until the compression norm changes by less
    than ``tol`` (relative), ``max_depth`` is reached, or the window would exceed
    ``MAX_DENSE_COLUMNS``.  Non-convergence is reported, never raised.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if not (has_sequence(op.domain) or has_sequence(op.codomain)):
        lower = spectral_norm(truncate_dense(op, 1).matrix)
        return NormEstimate(lower, max(lower, schur_bound(op, 1)), True, 1)

    depth, prev, converged = start_depth, None, False
    lower = 0.0
    while True:
        lower = spectral_norm(truncate_dense(op, depth).matrix)
        if prev is not None and abs(lower - prev) <= tol * max(lower, 1e-300):
            converged = True
            break
        nxt = depth * 2
        too_big = max(len(window(op.domain, nxt)), len(window(op.codomain, nxt))) > MAX_DENSE_COLUMNS
        if nxt > max_depth or too_big:
            break
        prev, depth = lower, nxt
    upper = max(lower, schur_bound(op, depth))
    return NormEstimate(lower, upper, converged, depth)


def psd_sqrt_dense(m: DenseWindow, clamp_tol: float = 1e-10) -> DenseWindow:
    """Hermitian PSD square root via ``eigh``; eigenvalues in ``[-clamp_tol, 0)`` become 0."""
    a = m.matrix
    if a.shape[0] != a.shape[1] or m.rows != m.cols:
        raise ValueError("psd_sqrt_dense needs a square window with matching index lists")
    if a.size and np.max(np.abs(a - a.conj().T)) > clamp_tol:
        raise NotPSDError("matrix is not Hermitian")
    if a.size == 0:
        return m
    w, v = np.linalg.eigh((a + a.conj().T) / 2)
    if w[0] < -clamp_tol:
        raise NotPSDError(f"matrix is not positive semidefinite (eigenvalue {w[0]:.3e})")
    w = np.clip(w, 0.0, None)
    root = (v * np.sqrt(w)) @ v.conj().T
    return DenseWindow(m.rows, m.cols, root)


def pinv_hermitian(a: np.ndarray, cutoff: float = 1e-10) -> np.ndarray:
    """Moore-Penrose inverse of a Hermitian matrix; eigenvalues below ``cutoff`` count as zero."""
    w, v = np.linalg.eigh((a + a.conj().T) / 2)
    inv = np.where(np.abs(w) > cutoff, 1.0 / np.where(np.abs(w) > cutoff, w, 1.0), 0.0)
    return (v * inv) @ v.conj().T


def range_projector(a: np.ndarray, cutoff: float = 1e-10) -> np.ndarray:
    w, v = np.linalg.eigh((a + a.conj().T) / 2)
    keep = v[:, np.abs(w) > cutoff]
    return keep @ keep.conj().T


def lift(space: Space, idxs, matrix: np.ndarray, codomain: Space | None = None,
         rows=None) -> LocalOp:
    """Turn a dense window back into a finite-support :class:`LocalOp`."""
    return dense_op(space, codomain or space, rows if rows is not None else idxs, idxs, matrix)


__all__ = [
    "DenseWindow", "NormEstimate", "NotPSDError", "MAX_DENSE_COLUMNS",
    "dense_matrix", "truncate_dense", "spectral_norm", "schur_bound",
    "operator_norm_estimate", "psd_sqrt_dense", "pinv_hermitian", "range_projector",
    "lift",
]
