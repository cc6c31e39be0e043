"""Command-line entry point: ``goebel <subcommand> [flags]``.

Exit codes: 0 success, 1 a verification failed, 2 usage error,
3 resource error (digit budget, p-adic budget or precision).
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import io
import json
import os
import sys
import time
from fractions import Fraction
from pathlib import Path

import mpmath

from . import asymptotics as asy
from . import random_mod, theorems
from .exact import (
    EXCEEDS_CAP,
    BudgetExceeded,
    GoebelParams,
    eval_exact,
    eval_prefix,
    is_integral,
    naive_N,
    t_sequence,
)
from .padic import (
    NON_INTEGRAL,
    BudgetUnderflow,
    PrimePowerContext,
    check_key_lemma,
    compute_N,
    nu_p,
    nu_p_factorial,
    padic_eval,
    totient,
)
from .reports import VerdictReport

EXIT_OK, EXIT_FAILED, EXIT_USAGE, EXIT_RESOURCE = 0, 1, 2, 3
FORMATS = ("plain", "csv", "json")


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------


def _scalar(x):
    if isinstance(x, bool) or x is None:
        return x
    if isinstance(x, Fraction):
        return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    if isinstance(x, asy.HighPrecReal):
        return x.decimal()
    if isinstance(x, mpmath.mpf):
        return mpmath.nstr(x, 15)
    return x


def _plain_value(x) -> str:
    x = _scalar(x)
    if x is True:
        return "true"
    if x is False:
        return "false"
    if x is None:
        return ""
    return str(x)


def _csv(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_plain_value(v) for v in row])
    return buf.getvalue()


def _jsonable(x):
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, asy.HighPrecReal):
        return {"value": x.decimal(), "err": mpmath.nstr(x.err, 3)}
    return _scalar(x)


def format_output(result, fmt: str) -> str:
    """Deterministic text rendering of a command result."""
    if fmt not in FORMATS:
        raise ValueError(f"unknown format {fmt!r}")
    if isinstance(result, theorems.NTable):
        if fmt == "json":
            return json.dumps(
                {
                    "k_range": list(result.k_range),
                    "l_range": list(result.l_range),
                    "cap": result.cap,
                    "entries": result.entries,
                }
            ) + "\n"
        return result.to_csv()
    if isinstance(result, VerdictReport):
        if fmt == "json":
            return json.dumps(_jsonable(result.to_dict())) + "\n"
        reports = result.parts or [result]
        if fmt == "csv":
            return _csv(
                ["claim", "passed", "checked", "counterexamples"],
                [(r.claim, r.passed, r.checked, len(r.counterexamples)) for r in reports],
            )
        lines = [part.summary() for part in result.parts] + [result.summary()]
        return "\n".join(lines) + "\n"
    if isinstance(result, random_mod.ResidueSetReport):
        result = result.to_dict()
    if isinstance(result, asy.HighPrecReal):
        if fmt == "json":
            return json.dumps(_jsonable(result)) + "\n"
        if fmt == "csv":
            return _csv(["value", "err"], [(result.decimal(), mpmath.nstr(result.err, 3))])
        return result.decimal() + "\n"
    if isinstance(result, dict):
        if fmt == "json":
            return json.dumps(_jsonable(result)) + "\n"
        if fmt == "csv":
            return _csv(list(result), [[_jsonable(v) for v in result.values()]])
        return "".join(f"{k}: {_plain_value(_jsonable(v))}\n" for k, v in result.items())
    if isinstance(result, list):
        if result and all(isinstance(r, dict) for r in result):
            if fmt == "json":
                return json.dumps(_jsonable(result)) + "\n"
            header = list(result[0])
            return _csv(header, [[_jsonable(r[h]) for h in header] for r in result])
        if fmt == "json":
            return json.dumps(_jsonable(result)) + "\n"
        if fmt == "csv":
            return _csv(["value"], [[v] for v in result])
        return ", ".join(_plain_value(v) for v in result) + "\n"
    if fmt == "json":
        return json.dumps(_jsonable(result)) + "\n"
    if fmt == "csv":
        return _csv(["value"], [[result]])
    return _plain_value(result) + "\n"


# ---------------------------------------------------------------------------
# handlers: each returns (result, exit code)
# ---------------------------------------------------------------------------


def _params(args) -> GoebelParams:
    return GoebelParams(args.k, args.l)


def _jobs(args) -> int:
    env = os.environ.get("GOEBEL_JOBS")
    if env:
        return max(1, int(env))
    return args.jobs or os.cpu_count() or 1


def cmd_eval(args):
    params = _params(args)
    if args.log:
        return asy.log_g(params, args.n, args.digits), EXIT_OK
    value = eval_exact(params, args.n)
    if args.format == "plain":
        return value, EXIT_OK
    return {"k": args.k, "l": args.l, "n": args.n, "value": value, "integral": is_integral(value)}, EXIT_OK


def cmd_prefix(args):
    return eval_prefix(_params(args), args.n), EXIT_OK


def cmd_nkl(args):
    params = _params(args)
    value = naive_N(params, args.cap) if args.naive else compute_N(params, args.cap)
    return value, EXIT_OK


def cmd_table(args):
    table = theorems.build_table(
        (args.kmin, args.kmax), (args.lmin, args.lmax), args.cap, jobs=_jobs(args)
    )
    if args.compare:
        reference = theorems.NTable.from_csv(Path(args.compare).read_text(), args.cap)
        report = theorems.compare_table(table, reference)
        return report, EXIT_OK if report.passed else EXIT_FAILED
    return table, EXIT_OK


def cmd_const(args):
    return asy.goebel_constant(_params(args), args.digits, depth=args.depth), EXIT_OK


def cmd_cn(args):
    params = _params(args)
    if args.n is not None:
        return asy.C_of_n(params, args.n, args.digits), EXIT_OK
    rows = []
    for n in range(1, args.nmax + 1):
        value = asy.C_of_n(params, n, args.digits)
        rows.append({"k": args.k, "l": args.l, "n": n, "value": value.decimal(),
                     "err": mpmath.nstr(value.err, 3)})
    return rows, EXIT_OK


def cmd_somos(args):
    if args.n is not None:
        return asy.somos_sequence(args.n), EXIT_OK
    return asy.somos_constant(args.k, args.digits), EXIT_OK


def cmd_coeffs(args):
    return asy.asym_coeffs(args.k, args.rmax), EXIT_OK


def cmd_eulerian(args):
    poly = asy.eulerian_polynomial(args.r)
    if args.format == "plain":
        return str(poly), EXIT_OK
    return list(poly.coefficients), EXIT_OK


def cmd_epsilon(args):
    value = asy.epsilon(_params(args), args.n, args.digits)
    bound = asy.epsilon_bound(args.k, args.n)
    return {
        "k": args.k,
        "l": args.l,
        "n": args.n,
        "value": value.decimal(),
        "err": mpmath.nstr(value.err, 3),
        "bound": mpmath.nstr(bound, args.digits),
        "below_bound": bool(value.upper < bound),
    }, EXIT_OK


def cmd_expand(args):
    params = _params(args)
    expansion = asy.asymptotic_expansion(params, args.order, args.digits)
    log_value = asy.expansion_eval(expansion, args.n, args.order)
    ratio = asy.expansion_ratio(expansion, args.n, args.order, asy.log_g(params, args.n, args.digits))
    return {
        "k": args.k,
        "l": args.l,
        "n": args.n,
        "order": args.order,
        "log_value": log_value.decimal(),
        "ratio": ratio.decimal(),
    }, EXIT_OK


def cmd_converge(args):
    rows = asy.convergence_report(_params(args), range(args.nmin, args.nmax + 1), args.order)
    return [
        {"n": r["n"], "rho": mpmath.nstr(r["rho"], args.digits), "err": mpmath.nstr(r["err"], 3)}
        for r in rows
    ], EXIT_OK


def cmd_random(args):
    return random_mod.residue_set(_params(args), args.p, args.r), EXIT_OK


def cmd_scan_primes(args):
    return random_mod.scan_nonintegral_primes(_params(args), args.pmax), EXIT_OK


def cmd_padic(args):
    state = padic_eval(PrimePowerContext(args.p, args.r), _params(args), args.n)
    if state is NON_INTEGRAL:
        return {"n": args.n, "state": "F"}, EXIT_OK
    return {"n": args.n, "state": "residue", "a": state.a, "b": state.b}, EXIT_OK


def cmd_tseq(args):
    return t_sequence(args.k, Fraction(args.t0), args.n, start=args.start), EXIT_OK


def cmd_nu(args):
    if args.factorial:
        return nu_p_factorial(args.p, int(args.x)), EXIT_OK
    return nu_p(args.p, Fraction(args.x)), EXIT_OK


def cmd_totient(args):
    return totient(args.m), EXIT_OK


def cmd_verify(args):
    claim = args.claim
    if claim == "main1":
        report = theorems.verify_min7_reduction()
    elif claim == "n7":
        report = theorems.classify_N7(args.kmax or 200, args.lmax or 200)
    elif claim == "table":
        table = theorems.build_table((2, 17), (2, 17), args.cap, jobs=_jobs(args))
        report = theorems.compare_table(table, theorems.load_table1())
    elif claim == "random":
        report = random_mod.verify_random_theorem(args.kmax or 10, args.pmax or 50, args.rmax or 3)
    elif claim == "key-lemma":
        kmax, lmax = args.kmax or 9, args.lmax or 11
        report = check_key_lemma(
            range(1, kmax + 1), range(1, lmax + 1), args.n or 7, args.p or 3, args.r or 2
        )
    elif claim == "lower-bound":
        report = asy.check_lower_bound(
            _params(args), Fraction(args.t0), args.nmax or 12, start=args.start
        )
    else:  # argparse restricts the choices
        raise AssertionError(claim)
    return report, EXIT_OK if report.passed else EXIT_FAILED


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def _common() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=FORMATS, default="plain")
    common.add_argument("--out", help="write output to this path instead of stdout")
    common.add_argument("--digits", type=int, default=30)
    common.add_argument("--cap", type=int, default=5000)
    common.add_argument("--jobs", type=int, default=None)
    common.add_argument("--verbose", action="store_true")
    return common


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="goebel", description=__doc__)
    sub = parser.add_subparsers(dest="command", metavar="command")
    sub.required = True
    common = _common()

    def add(name, func, help_text, *, kl=False, **flags):
        p = sub.add_parser(name, parents=[common], help=help_text)
        if kl:
            p.add_argument("--k", type=int, required=True)
            p.add_argument("--l", type=int, required=True)
        for flag, kwargs in flags.items():
            p.add_argument("--" + flag.replace("_", "-"), **kwargs)
        p.set_defaults(func=func)
        return p

    req_int = {"type": int, "required": True}
    add("eval", cmd_eval, "exact g_{k,l}(n), or its logarithm with --log", kl=True,
        n=req_int, log={"action": "store_true"})
    add("prefix", cmd_prefix, "g_{k,l}(1..n)", kl=True, n=req_int)
    add("nkl", cmd_nkl, "first non-integral index N_{k,l}", kl=True,
        naive={"action": "store_true", "help": "brute force with exact rationals"})
    add("table", cmd_table, "grid of N_{k,l}",
        kmin={"type": int, "default": 2}, kmax=req_int,
        lmin={"type": int, "default": 2}, lmax=req_int,
        compare={"help": "CSV table to diff against"})
    add("const", cmd_const, "constant C_{k,l}", kl=True, depth={"type": int, "default": None})
    add("cn", cmd_cn, "C_{k,l}(n), or the sequence n = 1..nmax", kl=True,
        n={"type": int, "default": None}, nmax={"type": int, "default": 15})
    add("somos", cmd_somos, "k-Somos constant, or s_n with --n",
        k={"type": int, "default": 2}, n={"type": int, "default": None})
    add("coeffs", cmd_coeffs, "asymptotic coefficients a_{k,0..rmax}",
        k=req_int, rmax={"type": int, "default": 6})
    add("eulerian", cmd_eulerian, "Eulerian polynomial A_r", r=req_int)
    add("epsilon", cmd_epsilon, "epsilon_{k,l}(n) and the 2n/exp(k^(n-1)) bound", kl=True, n=req_int)
    add("expand", cmd_expand, "evaluate the asymptotic expansion", kl=True, n=req_int,
        order={"type": int, "default": 6})
    add("converge", cmd_converge, "scaled residuals of the expansion", kl=True,
        nmin={"type": int, "default": 14}, nmax={"type": int, "default": 22},
        order={"type": int, "default": 5})
    add("random", cmd_random, "residue set G^r_{k,l,p}", kl=True, p=req_int, r=req_int)
    add("scan-primes", cmd_scan_primes, "primes p with g(p) not p-integral", kl=True,
        pmax=req_int)
    add("padic", cmd_padic, "p-adic state of g_{k,l}(n) at budget r", kl=True,
        p=req_int, r=req_int, n=req_int)
    add("tseq", cmd_tseq, "comparison sequence t_k(n)", k=req_int,
        t0={"required": True}, n=req_int, start={"type": int, "default": 0})
    add("nu", cmd_nu, "p-adic valuation of x (or of x! with --factorial)",
        p=req_int, x={"required": True}, factorial={"action": "store_true"})
    add("totient", cmd_totient, "Euler's totient", m=req_int)

    verify = sub.add_parser("verify", parents=[common], help="run a finite verification")
    verify.add_argument("claim", choices=["main1", "n7", "table", "random", "key-lemma", "lower-bound"])
    for flag in ("k", "l", "kmax", "lmax", "pmax", "rmax", "p", "r", "n", "nmax"):
        verify.add_argument("--" + flag, type=int, default=None)
    verify.add_argument("--t0", default=None)
    verify.add_argument("--start", type=int, default=0)
    verify.set_defaults(func=cmd_verify)
    return parser


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        # argparse writes usage and --help through sys.stdout / sys.stderr
        with contextlib.redirect_stdout(stdout), contextlib.redirect_stderr(stderr):
            args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    started = time.perf_counter()
    try:
        result, code = args.func(args)
    except (BudgetExceeded, BudgetUnderflow, asy.PrecisionError) as exc:
        print(f"goebel: resource error: {exc}", file=stderr)
        return EXIT_RESOURCE
    except (ValueError, TypeError) as exc:
        print(f"goebel: {exc}", file=stderr)
        return EXIT_USAGE
    text = format_output(result, args.format)
    if args.out:
        Path(args.out).write_text(text)
    else:
        stdout.write(text)
    if args.verbose:
        print(f"goebel {args.command}: {time.perf_counter() - started:.3f}s", file=stderr)
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
