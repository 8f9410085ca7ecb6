"""Batch front end: ``tetra <subcommand> [options]``.

Each subcommand builds a list of checks and writes one report.  Exit status is
0 when every check passes, 1 when any check fails or is undecided, and 2 on a
usage error.
"""
from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass

import numpy as np

from . import constructions as cons
from .dense import dense_matrix, operator_norm_estimate
from .operators import identity_op, window_equality, zero_op
from .report import FAIL, PASS, UNKNOWN, Check, Report, bound_check, emit_report
from .spaces import window
from .tetrablock import (FundamentalSolveError, NotContractionError, commutator_balance,
                         defect_operator, dilation_compression_check,
                         fundamental_relations_check, membership_oracle, parse_complex,
                         parse_point, random_monomials, solve_fundamental,
                         tetrablock_isometry_check)

SUBCOMMANDS = ("verify-pal", "verify-adjoint", "verify-toeplitz-form", "xi-check",
               "xi-search", "membership")
MONOMIAL_COUNT = 100
NORM_FORMULA_TOL = 1e-8
MEMBERSHIP_TOL = 1e-6


class UsageError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    alpha: complex = 0.25
    window_depth: int = 8
    norm_depth_max: int = 256
    tol: float = 1e-10
    grid_size: int = 1024
    seed: int = 0
    output_format: str = "json"
    point: str | None = None
    mode: str = "closure"
    xi: str = "f1-adjoint"
    membership_tol: float = MEMBERSHIP_TOL

    def __post_init__(self):
        if self.window_depth < 2:
            raise UsageError("--depth must be at least 2")
        if not self.tol > 0 or not self.membership_tol > 0:
            raise UsageError("--tol must be positive")
        if self.norm_depth_max < 4:
            raise UsageError("--norm-depth must be at least 4")
        if self.grid_size < 4:
            raise UsageError("--grid must be at least 4")
        if self.output_format not in ("json", "text"):
            raise UsageError("--format must be json or text")

    def echo(self, subcommand: str) -> dict:
        a = complex(self.alpha)
        out = {
            "subcommand": subcommand,
            "alpha": [a.real, a.imag],
            "windowDepth": self.window_depth,
            "normDepthMax": self.norm_depth_max,
            "tol": self.tol,
            "gridSize": self.grid_size,
            "seed": self.seed,
            "outputFormat": self.output_format,
        }
        if subcommand == "membership":
            out.update(point=self.point, mode=self.mode, membershipTol=self.membership_tol)
        if subcommand == "xi-check":
            out["xi"] = self.xi
        return out


def _params(cfg: RunConfig) -> cons.PalParameters:
    return cons.PalParameters(cfg.alpha, cfg.window_depth, strict=False)


def _coinvariance_checks(dil, labels, depth, tol) -> list[Check]:
    """``V_k^*`` maps ``H`` into ``H``: the upper-right blocks vanish."""
    e = dil.embed
    idx = window(e.domain, depth)
    out = []
    for name, v in zip(labels, (dil.v1, dil.v2, dil.v3)):
        leak = v.H @ e - e @ (e.H @ v.H @ e)
        dev = window_equality(leak, zero_op(e.domain, e.codomain), idx)[1]
        out.append(bound_check(f"co-invariance-{name}", f"(I - E E^*) {name}^* E = 0", dev, tol))
    return out


def _compression_summary(t, dil, cfg, tol, name="compression-random-monomials") -> Check:
    words = random_monomials(MONOMIAL_COUNT, 4, cfg.seed)
    checks = dilation_compression_check(t, dil, words, cfg.window_depth, tol)
    worst = max((c.deviation for c in checks), default=0.0)
    return bound_check(name, f"P_H q(V)|_H = q(A,B,P) for {len(words)} seeded words of degree <= 4",
                       worst, tol, value=float(len(words)))


def _norm_formula(dil, alpha: complex, cfg: RunConfig, labels=("V1", "V2")) -> list[Check]:
    out = []
    for name, op in zip(labels, (dil.v1, dil.v2)):
        est = operator_norm_estimate(op, tol=cfg.tol, max_depth=cfg.norm_depth_max)
        dev = max(abs(est.lower - abs(alpha)), abs(est.upper - abs(alpha)))
        out.append(bound_check(f"norm-formula-{name}", f"||{name}|| = |alpha|", dev,
                               NORM_FORMULA_TOL, value=est.lower))
    return out


def suite_verify_pal(cfg: RunConfig) -> list[Check]:
    params = _params(cfg)
    depth, tol = cfg.window_depth, 1e-12
    alpha = params.alpha
    t = cons.pal_triple(params)
    checks: list[Check] = []

    d = defect_operator(t.p, depth)
    expected = cons.pal_defect()
    dev = window_equality(d.dp, expected.dp, window(t.space, depth))[1]
    checks.append(bound_check("defect-projection", "D_P = 0 (+) 0 (+) I (+) I", dev, tol))

    try:
        fp = solve_fundamental(t, d, depth, tol)
    except FundamentalSolveError as exc:
        fp = exc.pair
    checks.append(bound_check("fundamental-residual-1", "A - B^* P = D_P F1 D_P",
                              fp.residual1, tol))
    checks.append(bound_check("fundamental-residual-2", "B - A^* P = D_P F2 D_P",
                              fp.residual2, tol))
    closed = cons.pal_fundamentals(params)
    if fp.space == closed.space:
        didx = window(fp.space, depth)
        dev = max(window_equality(fp.f1, closed.f1, didx)[1],
                  window_equality(fp.f2, closed.f2, didx)[1])
    else:
        dev = float("inf")
    checks.append(bound_check("fundamental-closed-form", "F1 = [[H, 0], [0, 0]], F2 = 0",
                              dev if np.isfinite(dev) else 1.0, tol))
    _, (r1, r2) = fundamental_relations_check(t, d, fp, depth, tol)
    checks.append(bound_check("fundamental-relations",
                              "D_P A = F1 D_P + F2^* D_P P and D_P B = F2 D_P + F1^* D_P P",
                              max(r1, r2), tol))

    dil = cons.explicit_dilation(t, closed, expected, depth)
    checks += tetrablock_isometry_check(dil.triple(), depth, tol, cfg.tol, cfg.norm_depth_max)
    checks += _norm_formula(dil, alpha, cfg)
    checks += _coinvariance_checks(dil, ("V1", "V2", "V3"), depth, tol)
    checks.append(_compression_summary(t, dil, cfg, 1e-10))

    gap = commutator_balance(closed, depth)
    checks.append(bound_check("obstruction-gap", "||[F1, F1^*] - [F2, F2^*]|| = |alpha|^2",
                              abs(gap - abs(alpha) ** 2), tol, value=gap))
    return checks


def suite_verify_adjoint(cfg: RunConfig) -> list[Check]:
    params = _params(cfg)
    depth, tol = cfg.window_depth, 1e-12
    t = cons.pal_triple(params)
    dil, data, d = cons.adjoint_dilation(params)
    idx = window(t.space, depth)
    checks = []
    ident = identity_op(t.space)
    dev = window_equality(data.dp_star @ data.dp_star, ident - t.p @ t.p.H, idx)[1]
    checks.append(bound_check("adjoint-defect", "D_{P*}^2 = I - P P^*", dev, tol))
    dm = data.dp_star_map
    dev = window_equality(t.a.H - t.b @ t.p.H, dm.H @ data.g1 @ dm, idx)[1]
    checks.append(bound_check("adjoint-fundamental-1", "A^* - B P^* = D_{P*} G1 D_{P*}", dev, tol))
    dev = window_equality(t.b.H - t.a @ t.p.H, dm.H @ data.g2 @ dm, idx)[1]
    checks.append(bound_check("adjoint-fundamental-2", "B^* - A P^* = D_{P*} G2 D_{P*}", dev, tol))
    checks += tetrablock_isometry_check(dil.triple(), depth, tol, cfg.tol, cfg.norm_depth_max,
                                        labels=("W1", "W2", "W3"))
    checks += _coinvariance_checks(dil, ("W1", "W2", "W3"), depth, tol)
    adj = t.adjoint()
    checks.append(_compression_summary(adj, dil, cfg, 1e-10))
    return checks


def _xi_for(cfg: RunConfig, fp):
    if cfg.xi == "f1-adjoint":
        return fp.f1.H
    if cfg.xi == "zero":
        return zero_op(fp.space)
    raise UsageError(f"unknown --xi choice {cfg.xi!r}")


def suite_xi_check(cfg: RunConfig) -> list[Check]:
    params = _params(cfg)
    t = cons.pal_triple(params)
    d = cons.pal_defect()
    fp = cons.pal_fundamentals(params)
    rep = cons.xi_conditions(fp, _xi_for(cfg, fp), d, t.p, cfg.window_depth, 1e-12, cfg.grid_size)
    return rep.checks


def suite_verify_toeplitz_form(cfg: RunConfig) -> list[Check]:
    params = _params(cfg)
    depth, tol = cfg.window_depth, 1e-12
    t = cons.pal_triple(params)
    d = cons.pal_defect()
    fp = cons.pal_fundamentals(params)
    xi = fp.f1.H
    rep = cons.xi_conditions(fp, xi, d, t.p, depth, tol, cfg.grid_size)
    checks = list(rep.checks)
    checks.append(bound_check("xi-sup-norm-value", "sup ||F1 + F1^* z|| = |alpha|",
                              abs(rep.sup_lower - abs(params.alpha)), NORM_FORMULA_TOL,
                              value=rep.sup_lower))

    toe = cons.toeplitz_dilation(t, fp, xi, d)
    checks += tetrablock_isometry_check(toe.triple(), depth, tol, cfg.tol, cfg.norm_depth_max)
    sec = cons.explicit_dilation(t, fp, d, depth)
    kidx = window(sec.big_space, depth)
    dev = max(window_equality(a, b, kidx)[1]
              for a, b in zip((toe.v1, toe.v2, toe.v3), (sec.v1, sec.v2, sec.v3)))
    checks.append(bound_check("toeplitz-matches-explicit",
                              "Toeplitz form with Xi = F1^* equals the explicit dilation", dev, tol))

    coeffs = {}
    for name, v in (("V1", sec.v1), ("V2", sec.v2)):
        coeffs[name] = cons.lower_right_symbol(sec, v, depth)
    ds = window(fp.space, depth)
    f1 = dense_matrix(fp.f1, ds, ds)
    f2 = dense_matrix(fp.f2, ds, ds)
    c1 = coeffs["V1"]
    checks.append(bound_check("symbol-lambda0", "lambda_0 = F1",
                              float(np.max(np.abs(c1[0] - f1), initial=0.0)), tol))
    checks.append(bound_check("symbol-lambda2", "lambda_2 = F2^*",
                              float(np.max(np.abs(c1[2] - f2.conj().T), initial=0.0)), tol))
    neg = max(float(np.max(np.abs(m), initial=0.0))
              for c in coeffs.values() for n, m in c.items() if n < 0)
    checks.append(bound_check("symbol-analytic", "negative Fourier coefficients vanish", neg, tol))
    return checks


def suite_xi_search(cfg: RunConfig) -> list[Check]:
    params = _params(cfg)
    t = cons.pal_triple(params)
    d = cons.pal_defect()
    fp = cons.pal_fundamentals(params)
    cand = cons.xi_search(fp, d, t.p, depth=3, seed=cfg.seed)
    if cand is None:
        return [Check("xi-search-found", "some Xi satisfies the identities and the norm bound",
                      UNKNOWN, None, 1e-8, 0.0)]
    checks = [bound_check("xi-search-found", "some Xi satisfies the identities and the norm bound",
                          cand.residual, 1e-8, value=cand.residual)]
    rep = cons.xi_conditions(fp, cand, d, t.p, cfg.window_depth, 1e-10, cfg.grid_size)
    return checks + rep.checks


def suite_membership(cfg: RunConfig) -> list[Check]:
    if cfg.point is None:
        raise UsageError("membership needs --point")
    p = parse_point(cfg.point)
    res = membership_oracle(p, cfg.mode, cfg.membership_tol)
    status = {True: PASS, False: FAIL, None: UNKNOWN}[res.member]
    name = "membership" if cfg.mode == "closure" else "boundary-membership"
    anchor = ("min ||A|| over pi(A) = p is <= 1" if cfg.mode == "closure"
              else "p = pi(U) for a unitary U")
    if cfg.mode == "closure":
        dev = max(0.0, res.achieved_norm - 1.0)
    else:
        dev = res.unitary_deviation
    return [Check(name, anchor, status, res.achieved_norm, cfg.membership_tol, dev)]


SUITES = {
    "verify-pal": suite_verify_pal,
    "verify-adjoint": suite_verify_adjoint,
    "verify-toeplitz-form": suite_verify_toeplitz_form,
    "xi-check": suite_xi_check,
    "xi-search": suite_xi_search,
    "membership": suite_membership,
}


def run_suite(subcommand: str, config: RunConfig) -> Report:
    if subcommand not in SUITES:
        raise UsageError(f"unknown subcommand {subcommand!r}")
    report = Report(config.echo(subcommand))
    report.extend(SUITES[subcommand](config))
    return report


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="tetra", description="Verify tetrablock dilation identities.")
    ap.add_argument("subcommand", choices=SUBCOMMANDS)
    ap.add_argument("--alpha", default="0.25,0", help="complex parameter as re,im")
    ap.add_argument("--point", help='tetrablock point as "re,im;re,im;re,im"')
    ap.add_argument("--mode", choices=("closure", "boundary"), default="closure")
    ap.add_argument("--xi", choices=("f1-adjoint", "zero"), default="f1-adjoint")
    ap.add_argument("--depth", type=int, default=8)
    ap.add_argument("--norm-depth", type=int, default=256)
    ap.add_argument("--tol", type=float, default=None)
    ap.add_argument("--grid", type=int, default=1024)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--format", choices=("json", "text"), default="json")
    ap.add_argument("--out", help="write the report here instead of stdout")
    return ap


def config_from_args(ns) -> RunConfig:
    try:
        alpha = parse_complex(ns.alpha)
    except ValueError as exc:
        raise UsageError(f"bad --alpha: {exc}") from exc
    if ns.point is not None:
        try:
            parse_point(ns.point)
        except ValueError as exc:
            raise UsageError(f"bad --point: {exc}") from exc
    return RunConfig(
        alpha=alpha, window_depth=ns.depth, norm_depth_max=ns.norm_depth,
        tol=1e-10 if ns.tol is None else ns.tol, grid_size=ns.grid, seed=ns.seed,
        output_format=ns.format, point=ns.point, mode=ns.mode, xi=ns.xi,
        membership_tol=MEMBERSHIP_TOL if ns.tol is None else ns.tol,
    )


def main(argv=None) -> int:
    ap = build_parser()
    ns = ap.parse_args(argv)  # argparse exits with status 2 on its own errors
    try:
        cfg = config_from_args(ns)
        report = run_suite(ns.subcommand, cfg)
    except (UsageError, NotContractionError) as exc:
        print(f"tetra: error: {exc}", file=sys.stderr)
        return 2
    data = emit_report(report, cfg.output_format)
    if ns.out:
        with open(ns.out, "wb") as fh:
            fh.write(data)
    else:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
    return report.exit_status


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
