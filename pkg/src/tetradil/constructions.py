"""Builders for the concrete operator families.

The example triple lives on ``H = l2(C^2) (+) l2(C^2) (+) l2(C^2) (+) l2(C^2)``:

    A = diag(0, 0, H, 0),   B = 0,   P = [[0,0,0,0],[0,0,0,0],[0,T_z,0,0],[I,0,0,0]]

with ``H(c0, c1, ...) = (H1 c0, 0, ...)`` and ``H1 = [[0, alpha], [0, 0]]``.
Parts are numbered from 0 in code, so the ``H`` block sits in part 2.

Two routes build the dilation on ``K = H (+) l2(D)``: :func:`explicit_dilation`
and :func:`adjoint_dilation` write out the infinite block matrices column by
column; :func:`toeplitz_dilation` assembles the general lower-triangular form
from Toeplitz operators.  They are kept independent so that agreement between
them means something.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares

from .dense import dense_matrix, lift
from .hardy import OperatorSymbol, extract_symbol, shift_op, symbol_sup_norm, toeplitz_from_symbol
from .operators import (LocalOp, _apply, _prefix, block_op, commutator_op, copy_inclusion,
                        copy_op, identity_op, matrix_op, part_inclusion, stacked_op,
                        window_equality, zero_op)
from .report import FAIL, PASS, UNKNOWN, Check, bound_check
from .spaces import Finite, SequenceOf, Space, Sum, window
from .tetrablock import (DefectData, DilationTriple, FundamentalPair, OperatorTriple,
                         make_defect)

C2 = Finite(2)
L2C2 = SequenceOf(C2)
PAL_SPACE = Sum((L2C2, L2C2, L2C2, L2C2))
PAL_DEFECT_SPACE = Sum((L2C2, L2C2))
ADJ_DEFECT_SPACE = Sum((L2C2, L2C2, C2))


@dataclass(frozen=True)
class PalParameters:
    alpha: complex
    window_depth: int = 8
    strict: bool = field(default=True, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "alpha", complex(self.alpha))
        if self.strict and abs(self.alpha) > 1 + 1e-12:
            raise ValueError(f"|alpha| = {abs(self.alpha):.6g} exceeds 1")
        if self.window_depth < 1:
            raise ValueError("window_depth must be positive")


def _params(p) -> PalParameters:
    return p if isinstance(p, PalParameters) else PalParameters(p)


def h1_matrix(alpha: complex) -> np.ndarray:
    return np.array([[0, alpha], [0, 0]], dtype=complex)


def h_op(alpha: complex) -> LocalOp:
    """``H`` on ``l2(C^2)``: ``H1`` on copy 0, zero elsewhere."""
    return copy_op(L2C2, 0, matrix_op(h1_matrix(alpha)))


def _diag(space: Sum, blocks: dict) -> LocalOp:
    n = len(space.parts)
    rows = [[blocks.get(i) if i == j else None for j in range(n)] for i in range(n)]
    return block_op(space.parts, space.parts, rows)


def pal_triple(params) -> OperatorTriple:
    params = _params(params)
    sp = PAL_SPACE.parts
    a = _diag(PAL_SPACE, {2: h_op(params.alpha)})
    b = zero_op(PAL_SPACE)
    blocks = [[None] * 4 for _ in range(4)]
    blocks[2][1] = shift_op(C2, 1)
    blocks[3][0] = identity_op(L2C2)
    p = block_op(sp, sp, blocks)
    return OperatorTriple(a, b, p, check_depth=params.window_depth)


def pal_defect() -> DefectData:
    """``D_P = diag(0, 0, I, I)`` with defect space ``l2(C^2) (+) l2(C^2)`` (parts 2 and 3)."""
    dp = _diag(PAL_SPACE, {2: identity_op(L2C2), 3: identity_op(L2C2)})
    return make_defect(dp, PAL_DEFECT_SPACE, part_inclusion(PAL_SPACE, (2, 3)))


def pal_fundamentals(params) -> FundamentalPair:
    """``F1 = [[H, 0], [0, 0]]`` and ``F2 = 0`` on the defect space."""
    params = _params(params)
    f1 = _diag(PAL_DEFECT_SPACE, {0: h_op(params.alpha)})
    return FundamentalPair(f1, zero_op(PAL_DEFECT_SPACE))


# -- explicit banded dilations -----------------------------------------------

def _banded_dilation(a: LocalOp, b: LocalOp, p: LocalOp, dmap: LocalOp, f: LocalOp,
                     name: str = "V") -> DilationTriple:
    """The three block matrices with first column ``(A | F^*D, 0, ...)`` etc.

    Writes out, on ``K = H (+) l2(D)`` (indices ``(0, h...)`` and ``(1, n, e...)``)::

        V1 = [[A, 0], [(F^*D, 0, ...)^t, band F on the diagonal, F^* below]]
        V2 = [[B, 0], [(F D, F^*D, 0, ...)^t, F one below, F^* two below]]
        V3 = [[P, 0], [(0, D, 0, ...)^t, identity two below]]
    """
    hs, ds = a.domain, f.domain
    big = Sum((hs, SequenceOf(ds)))
    fh, dh = f.H, dmap.H

    def into_h(d):
        return _prefix(d, (0,))

    def into_copy(d, n):
        return _prefix(d, (1, n))

    # V1
    def v1_col(idx):
        if idx[0] == 0:
            h = idx[1:]
            out = into_h(a.col(h))
            out.update(into_copy(_apply(fh, dmap.col(h)), 0))
            return out
        n, e = idx[1], idx[2:]
        out = into_copy(f.col(e), n)
        out.update(into_copy(fh.col(e), n + 1))
        return out

    def v1_adj(idx):
        if idx[0] == 0:
            return into_h(a.adj_col(idx[1:]))
        n, e = idx[1], idx[2:]
        out = into_copy(fh.col(e), n)
        if n >= 1:
            out.update(into_copy(f.col(e), n - 1))
        if n == 0:
            out.update(into_h(_apply(dh, f.col(e))))
        return out

    # V2
    def v2_col(idx):
        if idx[0] == 0:
            h = idx[1:]
            dh_ = dmap.col(h)
            out = into_h(b.col(h))
            out.update(into_copy(_apply(f, dh_), 0))
            out.update(into_copy(_apply(fh, dh_), 1))
            return out
        n, e = idx[1], idx[2:]
        out = into_copy(f.col(e), n + 1)
        out.update(into_copy(fh.col(e), n + 2))
        return out

    def v2_adj(idx):
        if idx[0] == 0:
            return into_h(b.adj_col(idx[1:]))
        n, e = idx[1], idx[2:]
        out: dict = {}
        if n >= 1:
            out.update(into_copy(fh.col(e), n - 1))
        if n >= 2:
            out.update(into_copy(f.col(e), n - 2))
        if n == 0:
            out.update(into_h(_apply(dh, fh.col(e))))
        elif n == 1:
            out.update(into_h(_apply(dh, f.col(e))))
        return out

    # V3
    def v3_col(idx):
        if idx[0] == 0:
            h = idx[1:]
            out = into_h(p.col(h))
            out.update(into_copy(dmap.col(h), 1))
            return out
        return {(1, idx[1] + 2) + idx[2:]: 1.0}

    def v3_adj(idx):
        if idx[0] == 0:
            return into_h(p.adj_col(idx[1:]))
        n, e = idx[1], idx[2:]
        if n == 1:
            return into_h(dh.col(e))
        if n >= 2:
            return {(1, n - 2) + e: 1.0}
        return {}

    band = 2 + max(a.band, b.band, p.band, f.band, dmap.band)
    v1 = LocalOp(big, big, v1_col, v1_adj, band=band, name=f"{name}1")
    v2 = LocalOp(big, big, v2_col, v2_adj, band=band, name=f"{name}2")
    v3 = LocalOp(big, big, v3_col, v3_adj, band=band, name=f"{name}3")
    return DilationTriple(big, v1, v2, v3, part_inclusion(big, (0,)))


def _is_zero(op: LocalOp, depth: int) -> bool:
    return window_equality(op, zero_op(op.domain, op.codomain), window(op.domain, depth))[0]


def explicit_dilation(t: OperatorTriple, fp: FundamentalPair, d: DefectData,
                      depth: int = 8) -> DilationTriple:
    """Explicit dilation for triples whose fundamental pair has ``F2 = 0`` and ``F1^2 = 0``."""
    if d.space != fp.space:
        raise ValueError("fundamental pair and defect data live on different spaces")
    if not _is_zero(fp.f2, depth):
        raise ValueError("construction needs F2 = 0")
    if not _is_zero(fp.f1 @ fp.f1, depth):
        raise ValueError("construction needs F1^2 = 0")
    return _banded_dilation(t.a, t.b, t.p, d.dp_map, fp.f1, "V")


@dataclass(frozen=True)
class AdjointData:
    dp_star: LocalOp  # D_{P*} on H
    space: Space      # defect space of P*
    embed: LocalOp
    dp_star_map: LocalOp
    g1: LocalOp
    g2: LocalOp


def adjoint_defect() -> DefectData:
    """``D_{P*} = I (+) I (+) (I - T_z T_z^*) (+) 0``; its range is parts 0, 1 and copy 0 of part 2."""
    dp = _diag(PAL_SPACE, {0: identity_op(L2C2), 1: identity_op(L2C2),
                           2: copy_op(L2C2, 0, identity_op(C2))})
    k0, k1, k2 = (identity_op(L2C2), identity_op(L2C2), copy_inclusion(L2C2, 0))
    embed = block_op(PAL_SPACE.parts, ADJ_DEFECT_SPACE.parts,
                     [[k0, None, None], [None, k1, None], [None, None, k2], [None, None, None]])
    return make_defect(dp, ADJ_DEFECT_SPACE, embed)


def adjoint_dilation(params):
    """Dilation ``(W1, W2, W3)`` of ``(A^*, B^*, P^*)`` on ``H (+) l2(D_{P*})``.

    ``G1 = 0 (+) H1^*`` acts on the copy-0 piece of the defect space; ``G2 = 0``.
    Returns ``(DilationTriple, AdjointData, DefectData)``.
    """
    params = _params(params)
    t = pal_triple(params)
    d = adjoint_defect()
    g1 = _diag(ADJ_DEFECT_SPACE, {2: matrix_op(h1_matrix(params.alpha).conj().T)})
    g2 = zero_op(ADJ_DEFECT_SPACE)
    dil = _banded_dilation(t.a.H, t.b.H, t.p.H, d.dp_map, g1, "W")
    data = AdjointData(d.dp, d.space, d.embed, d.dp_map, g1, g2)
    return dil, data, d


# -- Toeplitz-form dilation --------------------------------------------------

@dataclass(frozen=True)
class XiCandidate:
    xi: LocalOp
    residual: float = 0.0


def toeplitz_symbols(fp: FundamentalPair, xi: LocalOp):
    """``phi1 = F1 + Xi z + F2^* z^2`` and ``phi2 = F2 + Xi^* z + F1^* z^2``."""
    ds = fp.space
    phi1 = OperatorSymbol(ds, {0: fp.f1, 1: xi, 2: fp.f2.H})
    phi2 = OperatorSymbol(ds, {0: fp.f2, 1: xi.H, 2: fp.f1.H})
    return phi1, phi2


def toeplitz_dilation(t: OperatorTriple, fp: FundamentalPair, xi, d: DefectData) -> DilationTriple:
    """``V_k = [[T_k, 0], [C_k, T_phi_k]]`` with ``C1 = (Xi D, F2^* D, 0, ...)^t``,
    ``C2 = (Xi^* D, F1^* D, 0, ...)^t``, ``C3 = (0, D, 0, ...)^t`` and ``phi3 = z^2``."""
    xi = xi.xi if isinstance(xi, XiCandidate) else xi
    hs, ds = t.space, d.space
    dm = d.dp_map
    phi1, phi2 = toeplitz_symbols(fp, xi)
    c1 = stacked_op(hs, ds, [xi @ dm, fp.f2.H @ dm])
    c2 = stacked_op(hs, ds, [xi.H @ dm, fp.f1.H @ dm])
    c3 = stacked_op(hs, ds, [None, dm])
    rows = cols = (hs, SequenceOf(ds))
    v1 = block_op(rows, cols, [[t.a, None], [c1, toeplitz_from_symbol(phi1)]])
    v2 = block_op(rows, cols, [[t.b, None], [c2, toeplitz_from_symbol(phi2)]])
    v3 = block_op(rows, cols, [[t.p, None], [c3, shift_op(ds, 2)]])
    big = v1.domain
    return DilationTriple(big, v1, v2, v3, part_inclusion(big, (0,)))


XI_ANCHORS = {
    "xi-identity-1": "(Xi F1^* - Xi^* F2^*) D_P P = 0",
    "xi-identity-2": "[F2, F2^*] - [F1, F1^*] = [Xi, Xi^*]",
    "xi-identity-3": "[F1, F2] = 0",
    "xi-identity-4": "[Xi, F2] = [Xi^*, F1]",
    "xi-identity-5": "Xi D_P P = 0 and Xi^* D_P P = 0",
    "xi-sup-norm": "sup_{|z|=1} ||F1 + Xi z + F2^* z^2|| <= 1",
}


@dataclass
class XiReport:
    checks: list
    sup_lower: float
    sup_upper: float

    @property
    def identities_pass(self) -> bool:
        return all(c.passed for c in self.checks if c.name.startswith("xi-identity"))

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def by_name(self, name: str) -> Check:
        return next(c for c in self.checks if c.name == name)


def xi_conditions(fp: FundamentalPair, xi, d: DefectData, p_op: LocalOp, depth: int = 8,
                  tol: float = 1e-12, grid_size: int = 1024) -> XiReport:
    """Evaluate the five operator identities on ``Xi`` plus the sup-norm bound on ``phi1``.

    The sup-norm check passes when the upper end of the bracket is ``<= 1 + tol``,
    fails when the lower end exceeds it, and is ``unknown`` in between.
    """
    xi = xi.xi if isinstance(xi, XiCandidate) else xi
    f1, f2 = fp.f1, fp.f2
    didx = window(d.space, depth)
    hidx = window(p_op.domain, depth)
    dpp = d.dp_map @ p_op

    def dev(s, t, idx):
        return window_equality(s, t, idx)[1]

    zero_hd = zero_op(p_op.domain, d.space)
    checks = [
        bound_check("xi-identity-1", XI_ANCHORS["xi-identity-1"],
                    dev((xi @ f1.H - xi.H @ f2.H) @ dpp, zero_hd, hidx), tol),
        bound_check("xi-identity-2", XI_ANCHORS["xi-identity-2"],
                    dev(commutator_op(f2, f2.H) - commutator_op(f1, f1.H),
                        commutator_op(xi, xi.H), didx), tol),
        bound_check("xi-identity-3", XI_ANCHORS["xi-identity-3"],
                    dev(f1 @ f2, f2 @ f1, didx), tol),
        bound_check("xi-identity-4", XI_ANCHORS["xi-identity-4"],
                    dev(commutator_op(xi, f2), commutator_op(xi.H, f1), didx), tol),
        bound_check("xi-identity-5", XI_ANCHORS["xi-identity-5"],
                    max(dev(xi @ dpp, zero_hd, hidx), dev(xi.H @ dpp, zero_hd, hidx)), tol),
    ]
    phi1, _ = toeplitz_symbols(fp, xi)
    sup = symbol_sup_norm(phi1, grid_size, depth)
    if sup.upper <= 1 + tol:
        status = PASS
    elif sup.lower > 1 + tol:
        status = FAIL
    else:
        status = UNKNOWN
    checks.append(Check("xi-sup-norm", XI_ANCHORS["xi-sup-norm"], status, sup.lower, tol,
                        max(0.0, sup.upper - 1.0)))
    return XiReport(checks, sup.lower, sup.upper)


def xi_search(fp: FundamentalPair, d: DefectData, p_op: LocalOp, depth: int = 3,
              budget: int = 200, seed: int = 0, restarts: int = 2, tol: float = 1e-8):
    """Look for ``Xi`` satisfying the five identities with ``||phi1||_inf <= 1``.

    ``Xi`` ranges over matrices on the depth-``depth`` window of the defect
    space.  The identities are written as dense matrices on a wider window
    (margin = operator band + 1) so that products involving the finite-support
    ``Xi`` are exact, and the stacked residual is minimised by nonlinear least
    squares from ``Xi = 0``, ``Xi = F1^*`` and ``restarts`` seeded random
    points, in that order.  A candidate is re-verified exactly with
    :func:`xi_conditions`.  Returns ``None`` when nothing is found within
    ``budget`` residual evaluations per start, which proves nothing.
    """
    ds, hs = d.space, p_op.domain
    f1, f2 = fp.f1, fp.f2
    dpp = d.dp_map @ p_op
    margin = max(f1.band, f2.band, dpp.band, 1) + 1
    w = window(ds, depth)
    r = window(ds, depth + margin)
    rh = window(hs, depth + margin)
    pos = {k: i for i, k in enumerate(r)}
    wpos = np.array([pos[k] for k in w])
    nw, nr = len(w), len(r)

    F1 = dense_matrix(f1, r, r)
    F2 = dense_matrix(f2, r, r)
    M = dense_matrix(dpp, r, rh)
    K2 = dense_matrix(commutator_op(f2, f2.H) - commutator_op(f1, f1.H), r, r)
    K3 = dense_matrix(commutator_op(f1, f2), r, r)

    def embed(x):
        z = x[: nw * nw] + 1j * x[nw * nw:]
        xi = np.zeros((nr, nr), dtype=complex)
        xi[np.ix_(wpos, wpos)] = z.reshape(nw, nw)
        return xi

    def residual(x):
        X = embed(x)
        Xh = X.conj().T
        parts = [
            (X @ F1.conj().T - Xh @ F2.conj().T) @ M,
            K2 - (X @ Xh - Xh @ X),
            K3,
            (X @ F2 - F2 @ X) - (Xh @ F1 - F1 @ Xh),
            X @ M,
            Xh @ M,
        ]
        flat = np.concatenate([q.ravel() for q in parts])
        return np.concatenate([flat.real, flat.imag])

    def pack(m):
        m = m[np.ix_(wpos, wpos)]
        return np.concatenate([m.real.ravel(), m.imag.ravel()])

    rng = np.random.default_rng(seed)
    starts = [np.zeros(2 * nw * nw), pack(F1.conj().T)]
    starts += [rng.standard_normal(2 * nw * nw) * 0.1 for _ in range(restarts)]
    for x0 in starts:
        res0 = float(np.linalg.norm(residual(x0)))
        if res0 < tol:
            x, res = x0, res0
        else:
            sol = least_squares(residual, x0, max_nfev=budget, xtol=1e-15, ftol=1e-15, gtol=1e-15)
            x, res = sol.x, float(np.linalg.norm(sol.fun))
        if res >= tol:
            continue
        X = embed(x)
        xi = lift(ds, r, X)
        report = xi_conditions(fp, xi, d, p_op, depth + margin, tol=max(tol, 1e-10))
        sup = report.by_name("xi-sup-norm")
        if report.identities_pass and sup.status == PASS:
            return XiCandidate(xi, res)
    return None


# -- reverse direction helpers -----------------------------------------------

def lower_right(dil: DilationTriple, op: LocalOp) -> LocalOp:
    """Compression of ``op`` to the ``l2(D)`` summand of ``K``."""
    inc = part_inclusion(dil.big_space, (1,))
    return inc.H @ op @ inc


def lower_right_symbol(dil: DilationTriple, op: LocalOp, depth: int = 8) -> dict:
    """Fourier coefficients read off the lower-right corner of ``op`` (see :func:`extract_symbol`)."""
    return extract_symbol(lower_right(dil, op), depth)


def pal_suite_objects(params, depth: int = 8):
    """The example triple, its defect data, fundamental pair and explicit dilation."""
    params = _params(params)
    t = pal_triple(params)
    d = pal_defect()
    fp = pal_fundamentals(params)
    return t, d, fp, explicit_dilation(t, fp, d, depth)
