"""Tetrablock geometry and the operator predicates built on it.

Geometry: ``pi(A) = (a11, a22, det A)`` and a membership oracle for the closed
tetrablock (images of contractions) and its distinguished boundary (images of
unitaries), decided by minimising over the fibre of ``pi``.

Operators: defect operators, fundamental operators, the tetrablock-isometry
test (``V3`` isometric, ``||V1||, ||V2|| <= 1``, ``V1 = V2^* V3``, commuting) and
the compression test for dilations.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import least_squares, minimize

from .dense import (lift, operator_norm_estimate, pinv_hermitian, psd_sqrt_dense,
                    range_projector, spectral_norm, truncate_dense, NotPSDError)
from .operators import (LocalOp, _apply, commutator_op, identity_op, part_inclusion,
                        window_equality)
from .report import FAIL, PASS, Check, bound_check
from .spaces import Space, SpaceMismatch, Sum, window


class NotContractionError(ValueError):
    pass


class FundamentalSolveError(RuntimeError):
    """No admissible fundamental pair at this depth; the offending pair is attached."""

    def __init__(self, message: str, pair: "FundamentalPair"):
        super().__init__(message)
        self.pair = pair


# -- geometry ----------------------------------------------------------------

@dataclass(frozen=True)
class TetrablockPoint:
    x1: complex
    x2: complex
    x3: complex

    def __iter__(self):
        return iter((self.x1, self.x2, self.x3))


def parse_point(text: str) -> TetrablockPoint:
    """Parse ``"re,im;re,im;re,im"``."""
    parts = text.split(";")
    if len(parts) != 3:
        raise ValueError(f"expected three 're,im' pairs separated by ';', got {text!r}")
    return TetrablockPoint(*(parse_complex(p) for p in parts))


def parse_complex(text: str) -> complex:
    bits = text.strip().split(",")
    if len(bits) != 2:
        raise ValueError(f"expected 're,im', got {text!r}")
    z = complex(float(bits[0]), float(bits[1]))
    if not np.isfinite(z.real) or not np.isfinite(z.imag):
        raise ValueError(f"non-finite scalar {text!r}")
    return z


def pi_map(m) -> TetrablockPoint:
    a = np.asarray(m, dtype=complex)
    if a.shape != (2, 2):
        raise ValueError("pi is defined on 2x2 matrices")
    return TetrablockPoint(complex(a[0, 0]), complex(a[1, 1]),
                           complex(a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]))


@dataclass
class MembershipResult:
    member: bool | None
    witness: np.ndarray
    achieved_norm: float
    bracket: tuple
    mode: str
    unitary_deviation: float | None = None


def _fibre(p: TetrablockPoint, t, th):
    """Matrices in pi^{-1}(p) with a12 = sqrt|c| e^{t + i th}, a21 = c / a12."""
    x1, x2, x3 = p
    c = x1 * x2 - x3
    t, th = np.broadcast_arrays(np.asarray(t, float), np.asarray(th, float))
    a12 = np.sqrt(abs(c)) * np.exp(t + 1j * th)
    out = np.empty(t.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = x1
    out[..., 1, 1] = x2
    out[..., 0, 1] = a12
    out[..., 1, 0] = c / a12
    return out


def _unitary_residual(a: np.ndarray) -> np.ndarray:
    g = a.conj().T @ a - np.eye(2)
    return np.concatenate([g.real.ravel(), g.imag.ravel()])


def membership_oracle(p: TetrablockPoint, mode: str = "closure", tol: float = 1e-6,
                      grid: int = 64) -> MembershipResult:
    """Decide membership of ``p`` in the closed tetrablock or its distinguished boundary.

    Minimises ``||A||`` over 2x2 matrices with ``pi(A) = p``.  The off-diagonal
    product is forced to ``c = x1 x2 - x3``; the fibre is searched over the
    modulus split and phase of ``a12`` on a ``grid x grid`` mesh, then refined
    locally.  ``bracket`` is ``(lower bound, best norm found)``.  Boundary mode
    first looks for a unitary in the fibre (Gauss-Newton on ``A^*A - I``) and
    falls back to the norm minimisation only when none is found.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if mode not in ("closure", "boundary"):
        raise ValueError(f"unknown mode {mode!r}")
    x1, x2, x3 = p
    c = x1 * x2 - x3
    lower = float(max(abs(x1), abs(x2), abs(x3) ** 0.5, abs(c) ** 0.5))

    if mode == "boundary":
        u, uok, udev = _unitary_search(p, grid)
        if udev <= tol:
            norm = spectral_norm(u)
            return MembershipResult(True, u, norm, (lower, norm), mode, udev)
    result = _closure_search(p, lower, tol, grid, mode)
    if mode == "boundary":
        result.unitary_deviation = udev
        if result.member is not False:
            # inside the closure but no unitary in the fibre was found
            result.member = False if uok else None
    return result


def _closure_search(p: TetrablockPoint, lower: float, tol: float, grid: int,
                    mode: str) -> MembershipResult:
    x1, x2, x3 = p
    c = x1 * x2 - x3
    if c == 0:
        # a12 * a21 = 0: the best choice is the diagonal, whose norm meets the lower bound
        witness = np.diag([x1, x2]).astype(complex)
        best, ok = max(abs(x1), abs(x2)), True
    else:
        n0 = spectral_norm(_fibre(p, 0.0, 0.0))
        span = max(np.log(n0 / abs(c) ** 0.5), 0.0)
        ts = np.linspace(-span, span, grid) if span > 0 else np.zeros(1)
        ths = 2 * np.pi * np.arange(grid) / grid
        tt, hh = np.meshgrid(ts, ths, indexing="ij")
        norms = np.linalg.norm(_fibre(p, tt, hh), ord=2, axis=(-2, -1))
        starts = np.argsort(norms, axis=None)[:3]
        best, witness, ok = np.inf, None, False

        def f(v):
            return spectral_norm(_fibre(p, v[0], v[1]))

        for s in starts:
            i, j = np.unravel_index(s, norms.shape)
            res = minimize(f, [tt[i, j], hh[i, j]], method="Nelder-Mead",
                           options={"xatol": 1e-12, "fatol": 1e-14, "maxiter": 4000})
            if res.fun < best:
                best, witness, ok = float(res.fun), _fibre(p, *res.x), bool(res.success)

    if best <= 1 + tol:
        member = True
    elif lower > 1 + tol or ok:
        member = False
    else:
        member = None
    return MembershipResult(member, witness, float(best), (lower, float(best)), mode)


def _unitary_search(p: TetrablockPoint, grid: int):
    """Closest-to-unitary matrix in the fibre: ``(matrix, converged, ||A^*A - I||)``."""
    x1, x2, x3 = p
    if x1 * x2 - x3 == 0:
        u = np.diag([x1, x2]).astype(complex)
        return u, True, spectral_norm(u.conj().T @ u - np.eye(2))
    # for a unitary |a12| = |a21|, so the modulus split sits near t = 0
    ts = np.linspace(-4.0, 4.0, grid)
    ths = 2 * np.pi * np.arange(grid) / grid
    tt, hh = np.meshgrid(ts, ths, indexing="ij")
    mats = _fibre(p, tt, hh)
    gram = np.conj(np.swapaxes(mats, -1, -2)) @ mats - np.eye(2)
    score = np.sum(np.abs(gram) ** 2, axis=(-2, -1))
    u, uok, ubest = None, False, np.inf
    for s in np.argsort(score, axis=None)[:3]:
        i, j = np.unravel_index(s, score.shape)
        res = least_squares(lambda v: _unitary_residual(_fibre(p, v[0], v[1])),
                            [tt[i, j], hh[i, j]], xtol=1e-15, ftol=1e-15, gtol=1e-15)
        cand = _fibre(p, *res.x)
        dev = spectral_norm(cand.conj().T @ cand - np.eye(2))
        if dev < ubest:
            u, uok, ubest = cand, bool(res.success), dev
        if ubest < 1e-13:
            break
    return u, uok, float(ubest)


# -- operator triples --------------------------------------------------------

def _commutator_deviation(s: LocalOp, t: LocalOp, depth: int) -> float:
    return window_equality(s @ t, t @ s, window(s.domain, depth))[1]


@dataclass(frozen=True)
class OperatorTriple:
    a: LocalOp
    b: LocalOp
    p: LocalOp
    check_depth: int = field(default=8, compare=False)
    validate: bool = field(default=True, compare=False, repr=False)

    def __post_init__(self):
        space = self.a.domain
        for op in (self.a, self.b, self.p):
            if op.domain != space or op.codomain != space:
                raise SpaceMismatch("triple members must be endomorphisms of one space")
        if self.validate:
            for s, t in ((self.a, self.b), (self.a, self.p), (self.b, self.p)):
                dev = _commutator_deviation(s, t, self.check_depth)
                if dev > 1e-12:
                    raise ValueError(f"triple does not commute on the window (deviation {dev:.3e})")

    @property
    def space(self) -> Space:
        return self.a.domain

    @property
    def ops(self) -> tuple:
        return self.a, self.b, self.p

    def adjoint(self) -> "OperatorTriple":
        return OperatorTriple(self.a.H, self.b.H, self.p.H, self.check_depth, self.validate)


@dataclass(frozen=True)
class DilationTriple:
    big_space: Space
    v1: LocalOp
    v2: LocalOp
    v3: LocalOp
    embed: LocalOp

    def triple(self) -> OperatorTriple:
        return OperatorTriple(self.v1, self.v2, self.v3, validate=False)

    def compress(self, op: LocalOp) -> LocalOp:
        return self.embed.H @ op @ self.embed


# -- defect and fundamental operators ----------------------------------------

@dataclass(frozen=True)
class DefectData:
    """``dp`` is D_P on H; ``dp_map`` is the same operator viewed as H -> defect space."""
    dp: LocalOp
    projector: LocalOp
    is_projection: bool
    space: Space
    embed: LocalOp
    dp_map: LocalOp


def make_defect(dp: LocalOp, space: Space, embed: LocalOp, *, projector: LocalOp | None = None,
                is_projection: bool = True) -> DefectData:
    return DefectData(dp, projector if projector is not None else dp, is_projection,
                      space, embed, embed.H @ dp)


def _is_unit_column(col: dict, idx, tol=1e-12) -> bool:
    return (abs(col.get(idx, 0) - 1) <= tol
            and all(abs(v) <= tol for k, v in col.items() if k != idx))


def _defect_subspace(q: LocalOp, space: Space, depth: int):
    """Split off whole ``Sum`` parts on which the projection ``q`` is the identity."""
    if isinstance(space, Sum):
        keep = []
        for k, part in enumerate(space.parts):
            cols = [((k,) + r) for r in window(part, depth)]
            if all(_is_unit_column(q.col(i), i) for i in cols):
                keep.append(k)
            elif not all(all(abs(v) <= 1e-12 for v in q.col(i).values()) for i in cols):
                break
        else:
            if 0 < len(keep) < len(space.parts):
                emb = part_inclusion(space, keep)
                return emb.domain, emb
    return space, identity_op(space)


def defect_operator(p: LocalOp, depth: int = 8, clamp_tol: float = 1e-10) -> DefectData:
    """D_P = (I - P^*P)^{1/2}.

    When ``I - P^*P`` is a projection on the window it is returned as is (exact);
    the defect space is then the sum of the parts it keeps whole, when there is
    such a split.  Otherwise the square root of the dense window is lifted back
    as a finite-support operator and the ambient space serves as defect space.
    """
    space = p.domain
    if p.codomain != space:
        raise SpaceMismatch("defect operator needs an endomorphism")
    if spectral_norm(truncate_dense(p, depth).matrix) > 1 + clamp_tol:
        raise NotContractionError("P is not a contraction")
    ident = identity_op(space)
    q = ident - p.H @ p
    idx = window(space, depth)
    idem, _ = window_equality(q @ q, q, idx)
    herm, _ = window_equality(q, q.H, idx)
    if idem and herm:
        dspace, embed = _defect_subspace(q, space, depth)
        return make_defect(q, dspace, embed)
    try:
        root = psd_sqrt_dense(truncate_dense(q, depth), clamp_tol)
    except NotPSDError as exc:
        raise NotContractionError(str(exc)) from exc
    dp = lift(space, idx, root.matrix)
    proj = lift(space, idx, range_projector(root.matrix))
    return make_defect(dp, space, ident, projector=proj, is_projection=False)


@dataclass(frozen=True)
class FundamentalPair:
    f1: LocalOp
    f2: LocalOp
    residual1: float = 0.0
    residual2: float = 0.0

    @property
    def space(self) -> Space:
        return self.f1.domain


def fundamental_residuals(t: OperatorTriple, d: DefectData, f1: LocalOp, f2: LocalOp,
                          depth: int = 8) -> tuple[float, float]:
    """Window deviations of ``A - B^*P - D F1 D`` and ``B - A^*P - D F2 D``."""
    idx = window(t.space, depth)
    dm = d.dp_map
    r1 = window_equality(t.a - t.b.H @ t.p, dm.H @ f1 @ dm, idx)[1]
    r2 = window_equality(t.b - t.a.H @ t.p, dm.H @ f2 @ dm, idx)[1]
    return r1, r2


def solve_fundamental(t: OperatorTriple, d: DefectData, depth: int = 8,
                      tol: float = 1e-10) -> FundamentalPair:
    rhs1 = t.a - t.b.H @ t.p
    rhs2 = t.b - t.a.H @ t.p
    if d.is_projection:
        f1 = d.embed.H @ rhs1 @ d.embed
        f2 = d.embed.H @ rhs2 @ d.embed
    else:
        idx = window(d.space, depth)
        dinv = pinv_hermitian(truncate_dense(d.dp, depth).matrix, 1e-10)
        f1 = lift(d.space, idx, dinv @ truncate_dense(rhs1, depth).matrix @ dinv)
        f2 = lift(d.space, idx, dinv @ truncate_dense(rhs2, depth).matrix @ dinv)
    r1, r2 = fundamental_residuals(t, d, f1, f2, depth)
    pair = FundamentalPair(f1, f2, r1, r2)
    if max(r1, r2) > tol:
        raise FundamentalSolveError(
            f"no admissible fundamental pair at depth {depth} (residuals {r1:.3e}, {r2:.3e})", pair)
    return pair


def fundamental_relations_check(t: OperatorTriple, d: DefectData, fp: FundamentalPair,
                                depth: int = 8, tol: float = 1e-12):
    """``D A = F1 D + F2^* D P`` and ``D B = F2 D + F1^* D P``; returns ``(ok, (dev1, dev2))``."""
    dm = d.dp_map
    idx = window(t.space, depth)
    dev1 = window_equality(dm @ t.a, fp.f1 @ dm + fp.f2.H @ dm @ t.p, idx)[1]
    dev2 = window_equality(dm @ t.b, fp.f2 @ dm + fp.f1.H @ dm @ t.p, idx)[1]
    return max(dev1, dev2) <= tol, (dev1, dev2)


def commutator_balance(fp: FundamentalPair, depth: int = 8) -> float:
    """``|| [F1, F1^*] - [F2, F2^*] ||`` on the dense window."""
    gap = commutator_op(fp.f1, fp.f1.H) - commutator_op(fp.f2, fp.f2.H)
    return spectral_norm(truncate_dense(gap, depth).matrix)


# -- isometry and dilation predicates ----------------------------------------

def tetrablock_isometry_check(tr: OperatorTriple, depth: int = 8, tol: float = 1e-12,
                              norm_tol: float = 1e-10, max_norm_depth: int = 256,
                              labels: Sequence[str] = ("V1", "V2", "V3")) -> list[Check]:
    v1n, v2n, v3n = labels
    v1, v2, v3 = tr.ops
    idx = window(tr.space, depth)
    checks = []
    dev = window_equality(v3.H @ v3, identity_op(tr.space), idx)[1]
    checks.append(bound_check(f"isometry-{v3n}", f"{v3n}^* {v3n} = I", dev, tol))
    for name, op in ((v1n, v1), (v2n, v2)):
        est = operator_norm_estimate(op, tol=norm_tol, max_depth=max_norm_depth)
        status = PASS if est.upper <= 1 + tol else FAIL
        checks.append(Check(f"norm-{name}", f"||{name}|| <= 1", status, est.lower, tol,
                            max(0.0, est.upper - 1.0)))
    dev = window_equality(v1, v2.H @ v3, idx)[1]
    checks.append(bound_check(f"{v1n}={v2n}*{v3n}", f"{v1n} = {v2n}^* {v3n}", dev, tol))
    for (sn, s), (tn, t) in (((v1n, v1), (v2n, v2)), ((v1n, v1), (v3n, v3)),
                             ((v2n, v2), (v3n, v3))):
        dev = _commutator_deviation(s, t, depth)
        checks.append(bound_check(f"commute-{sn}{tn}", f"{sn} {tn} = {tn} {sn}", dev, tol))
    return checks


def random_monomials(count: int, max_degree: int = 4, seed: int = 0) -> list[tuple]:
    """Seeded random words in the letters 1, 2, 3 of length 1..max_degree."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        deg = int(rng.integers(1, max_degree + 1))
        out.append(tuple(int(x) for x in rng.integers(1, 4, size=deg)))
    return out


def monomial_name(word: Sequence[int]) -> str:
    return "*".join(f"x{k}" for k in word) if word else "1"


def _apply_word(ops: Sequence[LocalOp], word: Sequence[int], d: dict) -> dict:
    # the rightmost letter acts first
    for k in reversed(word):
        d = _apply(ops[k - 1], d)
    return d


def dilation_compression_check(t: OperatorTriple, dil: DilationTriple,
                               monomials: Sequence[Sequence[int]], depth: int = 8,
                               tol: float = 1e-10) -> list[Check]:
    """For each word q: ``P_H q(V1, V2, V3)|_H = q(A, B, P)`` on the window of H."""
    if dil.embed.domain != t.space or dil.embed.codomain != dil.big_space:
        raise SpaceMismatch("dilation embedding does not match the triple's space")
    idx = window(t.space, depth)
    big, small = (dil.v1, dil.v2, dil.v3), t.ops
    checks = []
    for word in monomials:
        worst = 0.0
        for i in idx:
            up = _apply_word(big, word, dil.embed.col(i))
            got = _apply(dil.embed.H, up)
            want = _apply_word(small, word, {i: 1.0})
            for k, v in want.items():
                got[k] = got.get(k, 0) - v
            worst = max(worst, sum(abs(v) ** 2 for v in got.values()) ** 0.5)
        name = monomial_name(word)
        checks.append(bound_check(f"compress-{name}", f"P_H q(V)|_H = q(A,B,P), q = {name}",
                                  worst, tol))
    return checks
