"""Command-line front end.

Exit codes: 0 success, 2 malformed input, 3 no case applies, 4 alpha/beta do
not interlace, 5 construction failed, 6 a verification check failed, 7 the
SU(3) analysis was requested for n != 3.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
import time
from typing import Sequence

import numpy as np

from . import io
from .builder import build_from_params, exponent_roots, wronskian_constant
from .builder import invariance_residual
from .cases import classify
from .errors import (IntegerDifference, InvalidRank, InvalidStrengths, NotInterlacing,
                     TodaHyperError, WrongRank)
from .exponents import fuchs_check, local_exponents, shifted_exponents
from .gamma import as_fraction, mass_targets, super_gamma
from .hypergeo import hg_params, interlace

log = logging.getLogger("toda_hyper")

EXIT_OK, EXIT_MALFORMED, EXIT_NO_CASE, EXIT_NOT_INTERLACING = 0, 2, 3, 4
EXIT_CONSTRUCTION, EXIT_VERIFICATION, EXIT_WRONG_RANK = 5, 6, 7

DEFAULT_TOLERANCES = {
    "invariance": 1e-8, "wronskian": 1e-8, "rn": 1e-8, "single_valued": 1e-7,
    "toda": 1e-5, "jacobi": 1e-5, "slopes": 1e-2, "mass": 1e-2,
    "fit": 1e-6, "f_prime": 1e-5, "cdgB": 1e-3, "re_F": 1e-3, "im_F": 1e-4, "ie": 1e-2,
}


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _check(value: float, tol: float) -> dict:
    value = float(value)
    return {"value": value, "tol": tol, "pass": bool(np.isfinite(value) and value <= tol)}


def _all_pass(checks: dict) -> bool:
    return all(c["pass"] for c in checks.values())


# -- context ---------------------------------------------------------------------------

class Context:
    def __init__(self, args: argparse.Namespace):
        self.args = args
        self.instance = None
        self.checkpoint = None
        if getattr(args, "checkpoint", None):
            self.checkpoint = io.load_checkpoint(args.checkpoint)
        if args.instance:
            self.instance = io.load_instance(args.instance)
        if self.instance is None and self.checkpoint is None:
            raise CliError(EXIT_MALFORMED, "--instance FILE is required")
        if self.instance is None:
            if self.checkpoint.data is None:
                raise CliError(EXIT_MALFORMED, "checkpoint carries no instance")
            self.instance = io.Instance(self.checkpoint.data)
        self.tol = dict(DEFAULT_TOLERANCES)
        self.tol.update(self.instance.tolerances)
        for item in args.tol or []:
            name, _, val = item.partition("=")
            if name not in DEFAULT_TOLERANCES or not val:
                raise CliError(EXIT_MALFORMED, f"bad --tol {item!r}; names: {', '.join(DEFAULT_TOLERANCES)}")
            try:
                self.tol[name] = float(val)
            except ValueError:
                raise CliError(EXIT_MALFORMED, f"bad --tol value {val!r}") from None
        tau = args.override_tau if args.override_tau is not None else self.instance.override_tau
        try:
            self.tau = None if tau is None else as_fraction(tau)
        except (ValueError, ZeroDivisionError):
            raise CliError(EXIT_MALFORMED, f"bad --override-tau {tau!r}") from None
        self.grid = args.grid or self.instance.grid
        self.seed = args.seed

    @property
    def data(self):
        return self.instance.data

    def params(self):
        case = classify(self.data)
        if self.tau is None and not case.matched:
            raise CliError(EXIT_NO_CASE, f"no case applies: {case.reason}; use --override-tau")
        return case, hg_params(self.data, case, self.tau)

    def solution(self):
        if self.checkpoint is not None:
            return self.checkpoint
        case, params = self.params()
        try:
            ok = interlace(params.alpha, params.beta)
        except IntegerDifference as exc:
            raise CliError(EXIT_NOT_INTERLACING, str(exc)) from None
        if not ok:
            raise CliError(EXIT_NOT_INTERLACING,
                           f"alpha={[str(a) for a in params.alpha]} and beta="
                           f"{[str(b) for b in params.beta]} do not interlace modulo Z")
        try:
            sol = build_from_params(params, self.data, case)
        except TodaHyperError as exc:
            raise CliError(EXIT_CONSTRUCTION, f"construction failed: {exc}") from None
        self.checkpoint = sol
        return sol


# -- report pieces --------------------------------------------------------------------

def _exponent_block(data, tau=None) -> dict:
    ex = local_exponents(super_gamma(data))
    out = {"at0": ex.at0, "at1": ex.at1, "atInf": ex.atInf, "fuchs_defect": fuchs_check(ex)}
    if tau is not None:
        sh = shifted_exponents(ex, tau)
        out.update(tau=tau, shifted_at1=sh.shifted_at1, shifted_atInf=sh.shifted_atInf,
                   shifted_fuchs_defect=fuchs_check(sh))
    return out


def _params_block(params) -> dict:
    out = params.to_json()
    try:
        out["interlacing"] = interlace(params.alpha, params.beta)
    except IntegerDifference as exc:
        out["interlacing"] = None
        out["interlacing_note"] = str(exc)
    return out


def _construction_block(sol, ctx: Context) -> tuple[dict, dict]:
    f, m = sol.form, sol.mono
    rng = np.random.default_rng(ctx.seed)
    pts = []
    while len(pts) < 20:
        z = complex(rng.uniform(-2, 2), rng.uniform(-2, 2))
        if min(abs(z), abs(z - 1)) >= 0.2:
            pts.append(z)
    rn = float(np.max(np.abs(sol.R_n(np.array(pts)) - 1)))
    try:
        wronskian_constant(sol.sys, sol.tau)
        wr = 0.0
    except TodaHyperError:
        wr = math.inf
    diag = {"invariance_residual": invariance_residual(f.P, [m.M0, m.M1]),
            "nullspace_dimension": f.nullity, "lambda": f.lam, "abs_c": abs(f.c), "c": f.c,
            "singular_values": np.asarray(f.singular_values), "branch": sol.branch}
    checks = {"invariance": _check(diag["invariance_residual"], ctx.tol["invariance"]),
              "nullspace": {"value": f.nullity, "tol": 1, "pass": f.nullity == 1},
              "rn": _check(rn, ctx.tol["rn"]),
              "wronskian": _check(wr, ctx.tol["wronskian"])}
    return diag, checks


def _verification_checks(sol, ctx: Context) -> tuple[dict, dict]:
    from .probes import (asymptotic_strengths, default_grid, detour_paths, mass_quadrature,
                         single_valued_check, toda_residual)
    details, checks = {}, {}
    a, b = detour_paths()
    checks["single_valued"] = _check(single_valued_check(sol, -0.5, a, b), ctx.tol["single_valued"])
    res = toda_residual(sol, default_grid(40, ctx.seed))
    checks["toda"] = _check(res.toda, ctx.tol["toda"])
    checks["jacobi"] = _check(res.jacobi_max, ctx.tol["jacobi"])
    details["jacobi_per_m"] = res.jacobi
    if sol.data is not None:
        sg = super_gamma(sol.data)
        worst = 0.0
        slopes = {}
        for p in ("0", "1", "inf"):
            s = asymptotic_strengths(sol, p)
            target = np.array([-2 * float(g) for g in sg.upper[p]])
            slopes[p] = {"fitted": s, "expected": target}
            worst = max(worst, float(np.max(np.abs(s - target))))
        details["slopes"] = slopes
        checks["slopes"] = _check(worst, ctx.tol["slopes"])
        mass = mass_quadrature(sol)
        details["mass"] = {"estimate": mass.estimate, "target": mass.target,
                           "coarse": mass.coarse}
        checks["mass"] = _check(float(np.max(mass.relative_error)), ctx.tol["mass"])
    return details, checks


def _su3_block(sol, ctx: Context) -> tuple[dict, dict]:
    from .su3 import (coeffs_closed_form, extract_cd, fit_coefficients,
                      hypergeometricity_check, pohozaev_checks, shift_coeffs)
    data = sol.data
    co = coeffs_closed_form(data)
    fit = fit_coefficients(sol, tol=ctx.tol["fit"])
    case = sol.case if sol.case is not None else classify(data)
    tau = ctx.tau if ctx.tau is not None else case.tau
    block = {"closed_form": co, "fitted": fit}
    checks = {}
    worst = max(abs(complex(getattr(fit, k)) - float(getattr(co, k))) for k in "ABCDG")
    worst = max(worst, abs(complex(fit.E_plus_F) - float(co.E_plus_F)))
    checks["fit_vs_closed_form"] = _check(worst, ctx.tol["fit"])
    if tau is not None:
        block["primed"] = shift_coeffs(co, as_fraction(tau))
        hc = hypergeometricity_check(co, case, fit, tau=tau, f_tol=ctx.tol["f_prime"])
        block["hypergeometricity"] = hc
        checks["C_prime"] = {"value": str(hc.C_prime), "tol": "exact", "pass": hc.C_prime == 0}
        checks["G_prime"] = {"value": str(hc.G_prime), "tol": "exact", "pass": hc.G_prime == 0}
        checks["F_prime"] = _check(abs(hc.F_prime), ctx.tol["f_prime"])
    asym = extract_cd(sol)
    block["asymptotics"] = asym
    pz = pohozaev_checks(sol, asym, co, fit)
    block["pohozaev"] = pz
    r = pz.residuals
    checks["cdgB"] = _check(r["cdgB"], ctx.tol["cdgB"])
    checks["re_F"] = _check(r["re_F"], ctx.tol["re_F"])
    checks["im_F"] = _check(r["im_F_fitted"], ctx.tol["im_F"])
    checks["ie"] = _check(r["ie_relative"], ctx.tol["ie"])
    return block, checks


# -- commands ---------------------------------------------------------------------------

def cmd_classify(ctx: Context) -> tuple[dict, int]:
    case = classify(ctx.data)
    rep = {"instance": ctx.data.to_json(), "case": case, "exponents": _exponent_block(ctx.data)}
    if not case.matched:
        rep["verdict"] = "None"
        rep["hint"] = ("no necessary-condition case holds at z = 1; the ODE cannot become "
                       "hypergeometric after a shift (pass --override-tau to force one)")
    else:
        rep["verdict"] = f"case {case.case_index}"
    return rep, EXIT_OK


def cmd_exponents(ctx: Context) -> tuple[dict, int]:
    case = classify(ctx.data)
    tau = ctx.tau if ctx.tau is not None else case.tau
    rep = {"instance": ctx.data.to_json(), "exponents": _exponent_block(ctx.data, tau)}
    if tau is not None:
        params = hg_params(ctx.data, case, tau)
        roots = exponent_roots(params)
        rep["indicial_roots"] = {str(k): v for k, v in roots.items()}
    return rep, EXIT_OK


def cmd_hgparams(ctx: Context) -> tuple[dict, int]:
    case, params = ctx.params()
    return {"instance": ctx.data.to_json(), "case": case, "params": _params_block(params)}, EXIT_OK


def _write_outputs(ctx: Context, sol, rep: dict) -> None:
    out = ctx.args.out
    if ctx.grid:
        if not out:
            raise CliError(EXIT_MALFORMED, "--grid needs --out")
        rows = io.write_grid_csv(out + ".grid.csv", sol, ctx.grid)
        rep["grid"] = {"spec": ctx.grid, "rows": rows, "file": out + ".grid.csv"}
    if out and ctx.args.command in ("construct", "verify"):
        io.save_checkpoint(out + ".checkpoint.json", sol)
        rep["checkpoint"] = out + ".checkpoint.json"


def cmd_construct(ctx: Context) -> tuple[dict, int]:
    case, params = ctx.params()
    sol = ctx.solution()
    diag, checks = _construction_block(sol, ctx)
    rep = {"instance": ctx.data.to_json(), "case": case, "params": _params_block(params),
           "exponents": _exponent_block(ctx.data, params.tau),
           "construction": diag, "checks": checks}
    _write_outputs(ctx, sol, rep)
    rep["passed"] = _all_pass(checks)
    return rep, EXIT_OK if rep["passed"] else EXIT_VERIFICATION


def cmd_verify(ctx: Context) -> tuple[dict, int]:
    sol = ctx.solution()
    diag, checks = _construction_block(sol, ctx)
    details, more = _verification_checks(sol, ctx)
    checks.update(more)
    rep = {"instance": ctx.data.to_json(), "case": sol.case, "params": _params_block(sol.params),
           "construction": diag, "verification": details, "checks": checks}
    if sol.data is not None:
        rep["mass_targets"] = [4 * math.pi * float(t) for t in mass_targets(sol.data)]
    _write_outputs(ctx, sol, rep)
    rep["passed"] = _all_pass(checks)
    return rep, EXIT_OK if rep["passed"] else EXIT_VERIFICATION


def cmd_su3(ctx: Context) -> tuple[dict, int]:
    if ctx.data.n != 3:
        raise CliError(EXIT_WRONG_RANK, f"su3 needs n = 3, got n = {ctx.data.n}")
    sol = ctx.solution()
    block, checks = _su3_block(sol, ctx)
    rep = {"instance": ctx.data.to_json(), "su3": block, "checks": checks,
           "passed": _all_pass(checks)}
    return rep, EXIT_OK if rep["passed"] else EXIT_VERIFICATION


COMMANDS = {"classify": cmd_classify, "exponents": cmd_exponents, "hgparams": cmd_hgparams,
            "construct": cmd_construct, "verify": cmd_verify, "su3": cmd_su3}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="toda-hyper",
                                description="Toda systems with three singular sources and "
                                            "their hypergeometric equations")
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--instance", metavar="FILE", help="JSON instance file")
    p.add_argument("--checkpoint", metavar="FILE", help="solution checkpoint (verify, su3)")
    p.add_argument("--out", metavar="PREFIX", help="write PREFIX.report.json and other artifacts")
    p.add_argument("--grid", metavar="SPEC", help='sample grid, e.g. "re=-2:3:101,im=-2:2:81"')
    p.add_argument("--tol", metavar="NAME=VAL", action="append", help="override a tolerance")
    p.add_argument("--override-tau", metavar="VAL", help="force the shift tau")
    p.add_argument("--seed", type=int, default=0, help="seed for random test points")
    return p


def _configure_logging() -> None:
    level = os.environ.get("TODA_HYPER_LOG", "WARNING").upper()
    num = int(level) if level.isdigit() else getattr(logging, level, logging.WARNING)
    logging.basicConfig(level=num, stream=sys.stderr,
                        format="%(asctime)s %(levelname)s %(name)s: %(message)s")


def main(argv: Sequence[str] | None = None) -> int:
    _configure_logging()
    args = build_parser().parse_args(argv)
    start = time.perf_counter()
    try:
        ctx = Context(args)
        rep, code = COMMANDS[args.command](ctx)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except WrongRank as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_WRONG_RANK
    except NotInterlacing as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NOT_INTERLACING
    except (InvalidStrengths, InvalidRank) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MALFORMED
    except TodaHyperError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VERIFICATION if args.command in ("verify", "su3") else EXIT_CONSTRUCTION
    rep["command"] = args.command
    rep["exit_code"] = code
    log.info("%s finished in %.2f s with exit code %d", args.command,
             time.perf_counter() - start, code)
    if args.out:
        io.write_json(args.out + ".report.json", rep)
    else:
        json.dump(io.encode(rep), sys.stdout, indent=2)
        sys.stdout.write("\n")
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
