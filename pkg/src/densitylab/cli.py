"""Command-line front end.

Every subcommand writes a CSV table (``--format csv``, the default) or a JSON
document (``--format json``) to stdout or ``--output``. Subcommands that also
produce verdicts or flags (``weyl``, ``cylinder``, ``classify``, ``witness``,
``cover``, ``counterexample``, ``correlate``) append a blank line and a JSON
summary after the CSV table.

Exit status: 0 on success, 1 when ``selftest`` finds a failing check, 2 on a
malformed spec or out-of-range parameter.

Spec grammars
-------------
sets (``--set``)
    hindman | evens | all | empty | blocks b=3/5 | ab a=1/3 b=2/3 |
    rot alpha=golden u=0 v=1/2 x0=0 | periodic m=3 r=0,1 | intervals [0,5)[9,12)
sequences (``--seq``)
    id | pow b=1 c=1.4142135623730951 | powsum b= c= d= a= | powlog b= c= d= |
    powlogsum b= c= d= a= | log | poly2log | prime c=0.5 | list 1,4,9
families (``--folner``)
    initial | dyadic | shifted p=2 | list [0,10)[5,25)
expressions (``--expr``)
    E | E@3 | ~E | (E | E@1) | ((E@1 | ~E@2) & E@3)

The ``DENSITYLAB_THREADS`` environment variable sets the default worker count;
output never depends on it.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction

import numpy as np

from . import experiments
from ._parallel import THREADS_ENV
from .constructions import parse_real, parse_set
from .correspondence import DEFAULT_GAP_EPS, averaged_correlation, correspondence_table
from .engine import banach_lower_bound, upper_density_along
from .errors import DensityLabError
from .expr import parse_expr
from .folner import parse_family
from .selftest import run_selftest
from .sequences import parse_sequence
from .sets import DensityValue, as_window
from .weyl import TrigPoly, correlation_vs_product, default_grid, ergodicity_scan, spectral_identity_check


class UsageError(Exception):
    pass


def _positive_int(text: str) -> int:
    try:
        v = int(float(text)) if "e" in text.lower() else int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return v


def _int_list(text: str) -> list[int]:
    out = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        try:
            v = float(part) if "e" in part.lower() else int(part)
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad integer {part!r} in list") from None
        if v != int(v) or v < 0:
            raise argparse.ArgumentTypeError(f"bad integer {part!r} in list")
        out.append(int(v))
    if not out:
        raise argparse.ArgumentTypeError("empty list")
    return out


def _window(text: str):
    parts = text.replace("[", "").replace(")", "").split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError("window must be 'lo,hi'")
    try:
        return as_window((int(parts[0]), int(parts[1])))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _dv_row(v: DensityValue) -> str:
    return f"{v.numer},{v.denom},{v.decimal()}"


def _frac_json(x: Fraction) -> dict:
    return {"value": f"{x.numerator}/{x.denominator}",
            "decimal": DensityValue(x.numerator, x.denominator).decimal() if 0 <= x <= 1 else str(float(x))}


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _with_summary(csv_text: str, summary: dict) -> str:
    return csv_text + "\n" + _dump(summary)


# -- subcommands ------------------------------------------------------------------


def cmd_density(args):
    src = parse_set(args.set)
    fam = parse_family(args.folner)
    expr = parse_expr(args.expr)
    if args.nmax < 1:
        raise UsageError("--nmax must be >= 1")
    tr = upper_density_along(src, fam, args.nmax, expr)
    if args.format == "json":
        return _dump({"set": src.spec(), "folner": fam.spec(), "expr": args.expr,
                      "rows": [{"N": N, "value": str(v), "decimal": v.decimal(), "running_max": str(m)}
                               for N, v, m in tr.rows()]})
    lines = ["N,numer,denom,decimal"] + [f"{N},{_dv_row(v)}" for N, v, _ in tr.rows()]
    return "\n".join(lines) + "\n"


def cmd_banach(args):
    src = parse_set(args.set)
    expr = parse_expr(args.expr)
    stride = args.stride or experiments.default_stride(args.L)
    b = banach_lower_bound(src, args.L, args.B, stride, expr)
    if args.format == "json":
        return _dump({"set": src.spec(), "expr": args.expr, "L": b.L, "B": b.B, "stride": b.stride,
                      "value": str(b.value), "decimal": b.value.decimal(), "witness": str(b.witness),
                      "windows_scanned": b.n_windows})
    return ("L,B,stride,numer,denom,decimal,witness_lo,witness_hi\n"
            f"{b.L},{b.B},{b.stride},{_dv_row(b.value)},{b.witness.lo},{b.witness.hi}\n")


def cmd_cover(args):
    rep = experiments.covering_curve(parse_set(args.set), parse_sequence(args.seq), args.ks,
                                     args.L, args.B, args.stride)
    if args.format == "json":
        return _dump(rep.summary())
    return _with_summary(rep.to_csv(), {"monotone": rep.is_monotone()})


def cmd_counterexample(args):
    if args.nmax < 1:
        raise UsageError("--nmax must be >= 1")
    table = experiments.hindman_counterexample(args.nmax, args.ks)
    if args.format == "json":
        return _dump(table.summary())
    return _with_summary(table.to_csv(), {"all_within_bound": table.all_within})


def cmd_weyl(args):
    seq = parse_sequence(args.seq)
    if args.grid == "default":
        grid = default_grid()
    else:
        try:
            grid = [float(Fraction(x)) for x in args.grid.split(",") if x.strip()]
        except (ValueError, ZeroDivisionError):
            raise UsageError(f"bad grid {args.grid!r}") from None
    rep = ergodicity_scan(seq, args.ns, grid)
    if args.format == "json":
        data = json.loads(rep.verdict_json())
        data["rows"] = [{"x": x, "N": N, "magnitude": round(float(rep.magnitudes[i, j]), 12)}
                        for i, x in enumerate(rep.x_grid) for j, N in enumerate(rep.checkpoints)]
        return _dump(data)
    return rep.to_csv() + "\n" + rep.verdict_json() + "\n"


def cmd_spectral(args):
    seq = parse_sequence(args.seq)
    alpha = float(parse_real(args.alpha, name="alpha"))
    rng = np.random.default_rng(args.seed)
    rows = []
    for i in range(args.trials):
        f = TrigPoly.random(rng, args.degree)
        res = spectral_identity_check(seq, alpha, f, args.n, args.grid_size)
        rows.append((i, res))
    if args.format == "json":
        return _dump({"seq": seq.spec(), "alpha": args.alpha, "N": args.n, "degree": args.degree,
                      "rows": [{"trial": i, "lhs": repr(r.lhs), "rhs": repr(r.rhs), "gap": repr(r.gap)}
                               for i, r in rows]})
    lines = ["trial,N,degree,lhs,rhs,gap"]
    lines += [f"{i},{args.n},{args.degree},{r.lhs!r},{r.rhs!r},{r.gap!r}" for i, r in rows]
    return "\n".join(lines) + "\n"


def cmd_correlate(args):
    src = parse_set(args.set)
    if args.window is not None:
        window = args.window
    else:
        window = parse_family(args.folner).window(args.k)
    if args.seq:
        avg, prod = correlation_vs_product(parse_sequence(args.seq), src, args.H, window)
        data = {"set": src.spec(), "seq": args.seq, "window": str(window), "N_avg": args.H,
                "average": _frac_json(avg), "product": _frac_json(prod)}
        if args.format == "json":
            return _dump(data)
        return ("N_avg,average_numer,average_denom,average_decimal,product_decimal\n"
                f"{args.H},{avg.numerator},{avg.denominator},{data['average']['decimal']},"
                f"{data['product']['decimal']}\n")
    ac = averaged_correlation(src, window, args.H)
    summary = {"set": src.spec(), "window": str(ac.window), "H": args.H,
               "final": _frac_json(ac.final), "reference": _frac_json(ac.reference),
               "boundary": str(ac.boundary), "min_excess": str(ac.min_excess())}
    if args.format == "json":
        summary["partials"] = [str(p) for p in ac.partials]
        return _dump(summary)
    return _with_summary(ac.to_csv(), summary)


def cmd_cylinder(args):
    src = parse_set(args.set)
    exprs = [parse_expr(e) for e in (args.expr or ["E"])]
    table = correspondence_table(src, exprs, parse_family(args.folner), args.nmax, Fraction(args.eps))
    if args.format == "json":
        return table.to_json() + "\n"
    return _with_summary(table.to_csv(), table.summary())


def cmd_witness(args):
    res = experiments.complement_witness_search(parse_set(args.set), args.hmax, args.L, args.B, args.stride)
    if args.format == "json":
        return _dump(res.summary())
    return _with_summary(res.to_csv(), res.summary())


def cmd_classify(args):
    seq = parse_sequence(args.seq)
    sets = {}
    for spec in args.sets.split(";"):
        spec = spec.strip()
        if spec:
            sets[spec] = parse_set(spec)
    if not sets:
        raise UsageError("--sets is empty")
    res = experiments.sweeping_classifier(seq, sets, args.ks, args.L, args.B, args.stride)
    if args.format == "json":
        return _dump(res.summary())
    return _with_summary(res.to_csv(), res.summary())


def cmd_selftest(args):
    report, ok = run_selftest(args.seed, args.threads)
    return report, (0 if ok else 1)


# -- parser ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="densitylab", description=__doc__,
                                formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--output", "-o", help="write here instead of stdout")
    common.add_argument("--seed", type=int, default=0, help="seed for randomized parts")
    common.add_argument("--threads", type=_positive_int, default=None,
                        help=f"worker threads (default: ${THREADS_ENV} or 1)")

    def add(name, fn, help_text):
        sp = sub.add_parser(name, parents=[common], help=help_text, description=help_text)
        sp.set_defaults(func=fn)
        return sp

    def scan_opts(sp, L=1024, B=65536):
        sp.add_argument("--L", type=_positive_int, default=L, help="window length")
        sp.add_argument("--B", type=_positive_int, default=B, help="search bound: windows lie in [0, B)")
        sp.add_argument("--stride", type=_positive_int, default=None, help="start spacing (default L/8)")

    sp = add("density", cmd_density, "window densities along a Følner family (CSV: N,numer,denom,decimal)")
    sp.add_argument("--set", required=True)
    sp.add_argument("--folner", default="initial")
    sp.add_argument("--nmax", type=int, required=True)
    sp.add_argument("--expr", default="E")

    sp = add("banach", cmd_banach, "best-window lower bound for upper Banach density "
                                   "(CSV: L,B,stride,numer,denom,decimal,witness_lo,witness_hi)")
    sp.add_argument("--set", required=True)
    sp.add_argument("--expr", default="E")
    scan_opts(sp)

    sp = add("cover", cmd_cover, "covering curve of unions of shifts "
                                 "(CSV: K,shifts,numer,denom,decimal,witness_lo,witness_hi)")
    sp.add_argument("--set", required=True)
    sp.add_argument("--seq", default="id")
    sp.add_argument("--ks", type=_int_list, required=True)
    scan_opts(sp)

    sp = add("counterexample", cmd_counterexample, "union densities of Hindman's set along dyadic windows "
                                                   "(CSV: K,N,numer,denom,decimal,bound,within_bound)")
    sp.add_argument("--ks", type=_int_list, required=True)
    sp.add_argument("--nmax", type=int, required=True)

    sp = add("weyl", cmd_weyl, "Weyl sums on an x grid with decay verdicts (CSV: x,N,magnitude)")
    sp.add_argument("--seq", required=True)
    sp.add_argument("--ns", type=_int_list, required=True, help="checkpoints, e.g. 1e4,1e6")
    sp.add_argument("--grid", default="default", help="'default' or comma-separated x values")

    sp = add("spectral", cmd_spectral, "spectral identity on random trig polynomials "
                                       "(CSV: trial,N,degree,lhs,rhs,gap)")
    sp.add_argument("--seq", default="id")
    sp.add_argument("--alpha", default="golden")
    sp.add_argument("--degree", type=int, default=4)
    sp.add_argument("--n", type=_positive_int, default=1000)
    sp.add_argument("--grid-size", type=_positive_int, default=None)
    sp.add_argument("--trials", type=_positive_int, default=5)

    sp = add("correlate", cmd_correlate, "shift-averaged self-correlation (CSV: h,numer,denom,decimal; "
                                         "with --seq: correlation along the sequence vs the product)")
    sp.add_argument("--set", required=True)
    sp.add_argument("--window", type=_window, default=None, help="lo,hi")
    sp.add_argument("--folner", default="dyadic")
    sp.add_argument("--k", type=int, default=10, help="family index used when --window is absent")
    sp.add_argument("--H", type=_positive_int, default=1000)
    sp.add_argument("--seq", default=None)

    sp = add("cylinder", cmd_cylinder, "expression densities along a family (CSV: exprId,N,numer,denom,decimal)")
    sp.add_argument("--set", required=True)
    sp.add_argument("--expr", action="append", help="repeatable")
    sp.add_argument("--folner", default="dyadic")
    sp.add_argument("--nmax", type=_positive_int, required=True)
    sp.add_argument("--eps", default=str(DEFAULT_GAP_EPS), help="MONOTONE-GAP threshold")

    sp = add("witness", cmd_witness, "search h with large E^c ∩ (E - h) "
                                     "(CSV: h,numer,denom,decimal,witness_lo,witness_hi,best)")
    sp.add_argument("--set", required=True)
    sp.add_argument("--hmax", type=_positive_int, default=10)
    scan_opts(sp)

    sp = add("classify", cmd_classify, "sweeping-out evidence (CSV: set,K,numer,denom,decimal)")
    sp.add_argument("--seq", required=True)
    sp.add_argument("--sets", required=True, help="';'-separated set specs")
    sp.add_argument("--ks", type=_int_list, default=[1, 8, 32, 128])
    scan_opts(sp)

    add("selftest", cmd_selftest, "run the seeded property suite")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.threads is not None:
        os.environ[THREADS_ENV] = str(args.threads)
    try:
        out = args.func(args)
    except (DensityLabError, UsageError, ValueError, OverflowError, IndexError) as exc:
        print(f"densitylab {args.command}: error: {exc}", file=sys.stderr)
        return 2
    code = 0
    if isinstance(out, tuple):
        out, code = out
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(out)
    else:
        sys.stdout.write(out)
    return code


if __name__ == "__main__":
    sys.exit(main())
