"""Exact lazy operators given by finitely supported column maps.

Every operator stores two pure functions, ``column(idx)`` and
``adjoint_column(idx)``, returning the image of a basis vector as a sparse
dict.  Products, sums and block matrices are built from these maps without any
truncation, so identities between operators can be checked exactly on any
finite set of basis vectors.
"""
from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from .spaces import FinVec, Finite, Index, SequenceOf, Space, SpaceMismatch, Sum, window

Column = Callable[[Index], dict]


class LocalOp:
    """A bounded operator ``domain -> codomain`` with exact column maps.

    ``band`` bounds how far a column can move copy numbers; it is bookkeeping
    for callers choosing truncation margins, not something the algebra relies on.
    """

    def __init__(self, domain: Space, codomain: Space, column: Column,
                 adjoint_column: Column, band: int = 0, name: str = ""):
        self.domain = domain
        self.codomain = codomain
        self._column = column
        self._adjoint_column = adjoint_column
        self.band = band
        self.name = name
        self._cache: dict = {}
        self._adj_cache: dict = {}
        self._adjoint: LocalOp | None = None

    # Cached dicts are shared; callers must treat them as read-only.
    def col(self, idx: Index) -> dict:
        try:
            return self._cache[idx]
        except KeyError:
            out = self._cache[idx] = _drop_zeros(self._column(idx))
            return out

    def adj_col(self, idx: Index) -> dict:
        try:
            return self._adj_cache[idx]
        except KeyError:
            out = self._adj_cache[idx] = _drop_zeros(self._adjoint_column(idx))
            return out

    def column(self, idx: Index) -> FinVec:
        return FinVec(self.codomain, self.col(tuple(idx)))

    def adjoint_column(self, idx: Index) -> FinVec:
        return FinVec(self.domain, self.adj_col(tuple(idx)))

    @property
    def H(self) -> "LocalOp":
        return adjoint_op(self)

    def __call__(self, v: FinVec) -> FinVec:
        return apply_op(self, v)

    def __matmul__(self, other: "LocalOp") -> "LocalOp":
        return compose_op(self, other)

    def __add__(self, other: "LocalOp") -> "LocalOp":
        return combine_op(1.0, self, 1.0, other)

    def __sub__(self, other: "LocalOp") -> "LocalOp":
        return combine_op(1.0, self, -1.0, other)

    def __rmul__(self, a: complex) -> "LocalOp":
        return scale_op(a, self)

    def __neg__(self) -> "LocalOp":
        return scale_op(-1.0, self)

    def __repr__(self):
        label = f" {self.name}" if self.name else ""
        return f"<LocalOp{label}: {self.domain} -> {self.codomain}>"


def _drop_zeros(d: dict) -> dict:
    return {k: v for k, v in d.items() if v != 0}


def _axpy(acc: dict, a: complex, d: dict) -> None:
    for k, v in d.items():
        acc[k] = acc.get(k, 0) + a * v


def _apply(op: LocalOp, d: dict) -> dict:
    acc: dict = {}
    for k, v in d.items():
        _axpy(acc, v, op.col(k))
    return acc


def _apply_adj(op: LocalOp, d: dict) -> dict:
    acc: dict = {}
    for k, v in d.items():
        _axpy(acc, v, op.adj_col(k))
    return acc


def _prefix(d: dict, head: Index) -> dict:
    return {head + k: v for k, v in d.items()}


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise SpaceMismatch(msg)


def apply_op(op: LocalOp, v: FinVec) -> FinVec:
    _require(v.space == op.domain, f"vector in {v.space}, operator expects {op.domain}")
    return FinVec(op.codomain, _apply(op, v.entries))


def adjoint_op(op: LocalOp) -> LocalOp:
    if op._adjoint is None:
        adj = LocalOp(op.codomain, op.domain, op._adjoint_column, op._column,
                      band=op.band, name=f"({op.name})*" if op.name else "")
        # share caches so that T** is T and nothing is evaluated twice
        adj._cache, adj._adj_cache = op._adj_cache, op._cache
        adj._adjoint = op
        op._adjoint = adj
    return op._adjoint


def compose_op(s: LocalOp, t: LocalOp) -> LocalOp:
    """``s @ t`` (apply ``t`` first)."""
    _require(t.codomain == s.domain, f"cannot compose {s} after {t}")
    return LocalOp(
        t.domain, s.codomain,
        lambda idx: _apply(s, t.col(idx)),
        lambda idx: _apply_adj(t, s.adj_col(idx)),
        band=s.band + t.band,
    )


def combine_op(a: complex, s: LocalOp, b: complex, t: LocalOp) -> LocalOp:
    """``a*s + b*t``."""
    _require(s.domain == t.domain and s.codomain == t.codomain,
             f"cannot combine {s} and {t}")
    a, b = complex(a), complex(b)
    ca, cb = a.conjugate(), b.conjugate()

    def column(idx):
        acc: dict = {}
        _axpy(acc, a, s.col(idx))
        _axpy(acc, b, t.col(idx))
        return acc

    def adjoint_column(idx):
        acc: dict = {}
        _axpy(acc, ca, s.adj_col(idx))
        _axpy(acc, cb, t.adj_col(idx))
        return acc

    return LocalOp(s.domain, s.codomain, column, adjoint_column, band=max(s.band, t.band))


def scale_op(a: complex, s: LocalOp) -> LocalOp:
    a = complex(a)
    ca = a.conjugate()
    return LocalOp(
        s.domain, s.codomain,
        lambda idx: {k: a * v for k, v in s.col(idx).items()},
        lambda idx: {k: ca * v for k, v in s.adj_col(idx).items()},
        band=s.band,
    )


def commutator_op(s: LocalOp, t: LocalOp) -> LocalOp:
    _require(s.domain == s.codomain == t.domain == t.codomain,
             "commutator needs endomorphisms of one space")
    return combine_op(1.0, s @ t, -1.0, t @ s)


def block_op(row_spaces: Sequence[Space], col_spaces: Sequence[Space],
             blocks: Sequence[Sequence[LocalOp | None]]) -> LocalOp:
    """Operator ``Sum(col_spaces) -> Sum(row_spaces)`` with ``blocks[i][j]: col j -> row i``.

    ``None`` stands for a zero block.
    """
    rows, cols = tuple(row_spaces), tuple(col_spaces)
    _require(len(blocks) == len(rows) and all(len(r) == len(cols) for r in blocks),
             "block pattern does not match the row/column spaces")
    for i, row in enumerate(blocks):
        for j, blk in enumerate(row):
            if blk is not None:
                _require(blk.domain == cols[j] and blk.codomain == rows[i],
                         f"block ({i},{j}) maps {blk.domain} -> {blk.codomain}, "
                         f"expected {cols[j]} -> {rows[i]}")
    by_col = [[(i, blocks[i][j]) for i in range(len(rows)) if blocks[i][j] is not None]
              for j in range(len(cols))]
    by_row = [[(j, blocks[i][j]) for j in range(len(cols)) if blocks[i][j] is not None]
              for i in range(len(rows))]

    def column(idx):
        acc: dict = {}
        j, rest = idx[0], idx[1:]
        for i, blk in by_col[j]:
            acc.update(_prefix(blk.col(rest), (i,)))
        return acc

    def adjoint_column(idx):
        acc: dict = {}
        i, rest = idx[0], idx[1:]
        for j, blk in by_row[i]:
            acc.update(_prefix(blk.adj_col(rest), (j,)))
        return acc

    band = max((b.band for row in blocks for b in row if b is not None), default=0)
    return LocalOp(Sum(cols), Sum(rows), column, adjoint_column, band=band)


def window_equality(s: LocalOp, t: LocalOp, idxs: Sequence[Index], tol: float = 1e-12):
    """Compare ``s`` and ``t`` column by column on ``idxs``.

    Returns ``(ok, max_deviation)`` where the deviation is the largest
    ``||(s - t) e_i||`` over the window.  Columns are exact, so ``tol`` only
    absorbs float rounding.
    """
    _require(s.domain == t.domain and s.codomain == t.codomain,
             f"cannot compare {s} with {t}")
    worst = 0.0
    for idx in idxs:
        acc = dict(s.col(idx))
        _axpy(acc, -1.0, t.col(idx))
        dev = sum(abs(v) ** 2 for v in acc.values()) ** 0.5
        worst = max(worst, dev)
    return worst <= tol, worst


def ops_equal(s: LocalOp, t: LocalOp, depth: int = 8, tol: float = 1e-12):
    """:func:`window_equality` on the standard window of the domain."""
    return window_equality(s, t, window(s.domain, depth), tol)


# -- constructors ------------------------------------------------------------

def identity_op(space: Space) -> LocalOp:
    return LocalOp(space, space, lambda idx: {idx: 1.0}, lambda idx: {idx: 1.0}, name="I")


def zero_op(domain: Space, codomain: Space | None = None) -> LocalOp:
    codomain = domain if codomain is None else codomain
    return LocalOp(domain, codomain, lambda idx: {}, lambda idx: {}, name="0")


def matrix_op(matrix, domain: Finite | None = None, codomain: Finite | None = None) -> LocalOp:
    """A dense matrix acting between finite-dimensional spaces."""
    m = np.array(matrix, dtype=complex)
    if m.ndim != 2:
        raise ValueError("matrix_op needs a 2-d array")
    domain = domain or Finite(m.shape[1])
    codomain = codomain or Finite(m.shape[0])
    _require(isinstance(domain, Finite) and domain.dim == m.shape[1]
             and isinstance(codomain, Finite) and codomain.dim == m.shape[0],
             f"matrix of shape {m.shape} does not fit {domain} -> {codomain}")
    cols = [{(i,): complex(m[i, j]) for i in range(m.shape[0]) if m[i, j] != 0}
            for j in range(m.shape[1])]
    mh = m.conj().T
    rows = [{(j,): complex(mh[j, i]) for j in range(mh.shape[0]) if mh[j, i] != 0}
            for i in range(mh.shape[1])]
    return LocalOp(domain, codomain, lambda idx: cols[idx[0]], lambda idx: rows[idx[0]])


def dense_op(domain: Space, codomain: Space, rows: Sequence[Index], cols: Sequence[Index],
             matrix, band: int | None = None) -> LocalOp:
    """Finite-rank operator supported on ``cols`` with values on ``rows``."""
    m = np.asarray(matrix, dtype=complex)
    rows, cols = [tuple(r) for r in rows], [tuple(c) for c in cols]
    _require(m.shape == (len(rows), len(cols)), "matrix shape does not match index lists")
    col_pos = {c: j for j, c in enumerate(cols)}
    row_pos = {r: i for i, r in enumerate(rows)}

    def column(idx):
        j = col_pos.get(idx)
        if j is None:
            return {}
        return {rows[i]: complex(m[i, j]) for i in np.flatnonzero(m[:, j])}

    def adjoint_column(idx):
        i = row_pos.get(idx)
        if i is None:
            return {}
        return {cols[j]: complex(m[i, j]).conjugate() for j in np.flatnonzero(m[i, :])}

    if band is None:
        band = len(rows) + len(cols)
    return LocalOp(domain, codomain, column, adjoint_column, band=band)


def copy_op(seq: SequenceOf, n: int, inner: LocalOp) -> LocalOp:
    """Acts as ``inner`` on copy ``n`` of ``seq`` and as zero elsewhere."""
    _require(isinstance(seq, SequenceOf) and inner.domain == inner.codomain == seq.inner,
             "copy_op needs an endomorphism of the sequence's inner space")
    head = (n,)
    return LocalOp(
        seq, seq,
        lambda idx: _prefix(inner.col(idx[1:]), head) if idx[0] == n else {},
        lambda idx: _prefix(inner.adj_col(idx[1:]), head) if idx[0] == n else {},
    )


def diagonal_op(seq: SequenceOf, inner: LocalOp) -> LocalOp:
    """``inner (+) inner (+) ...`` on ``seq``."""
    _require(isinstance(seq, SequenceOf) and inner.domain == inner.codomain == seq.inner,
             "diagonal_op needs an endomorphism of the sequence's inner space")
    return LocalOp(
        seq, seq,
        lambda idx: _prefix(inner.col(idx[1:]), idx[:1]),
        lambda idx: _prefix(inner.adj_col(idx[1:]), idx[:1]),
        band=inner.band,
    )


def part_inclusion(space: Sum, parts: Sequence[int]) -> LocalOp:
    """Isometric inclusion of the listed parts of ``space``.

    With one part the domain is that part itself, otherwise the ``Sum`` of the
    selected parts in the given order.
    """
    parts = tuple(parts)
    _require(isinstance(space, Sum) and len(set(parts)) == len(parts)
             and all(0 <= k < len(space.parts) for k in parts), "bad part selection")
    if len(parts) == 1:
        k = parts[0]
        return LocalOp(
            space.parts[k], space,
            lambda idx: {(k,) + idx: 1.0},
            lambda idx: {idx[1:]: 1.0} if idx[0] == k else {},
        )
    where = {k: pos for pos, k in enumerate(parts)}
    return LocalOp(
        Sum(tuple(space.parts[k] for k in parts)), space,
        lambda idx: {(parts[idx[0]],) + idx[1:]: 1.0},
        lambda idx: {(where[idx[0]],) + idx[1:]: 1.0} if idx[0] in where else {},
    )


def copy_inclusion(seq: SequenceOf, n: int = 0) -> LocalOp:
    """Isometric inclusion ``seq.inner -> seq`` onto copy ``n``."""
    _require(isinstance(seq, SequenceOf), "copy_inclusion needs a SequenceOf space")
    return LocalOp(
        seq.inner, seq,
        lambda idx: {(n,) + idx: 1.0},
        lambda idx: {idx[1:]: 1.0} if idx[0] == n else {},
        band=n,
    )


def stacked_op(domain: Space, inner: Space, ops: Sequence[LocalOp | None]) -> LocalOp:
    """Column operator ``h -> (X_0 h, X_1 h, ..., X_{k-1} h, 0, 0, ...)`` into ``l2(inner)``."""
    seq = SequenceOf(inner)
    for op in ops:
        _require(op is None or (op.domain == domain and op.codomain == inner),
                 f"stacked block {op} does not map {domain} -> {inner}")
    live = [(n, op) for n, op in enumerate(ops) if op is not None]

    def column(idx):
        acc: dict = {}
        for n, op in live:
            acc.update(_prefix(op.col(idx), (n,)))
        return acc

    def adjoint_column(idx):
        n = idx[0]
        if n >= len(ops) or ops[n] is None:
            return {}
        return ops[n].adj_col(idx[1:])

    return LocalOp(domain, seq, column, adjoint_column, band=len(ops))
