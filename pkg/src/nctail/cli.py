"""Command-line front end: ``nctail <command> ...`` or ``python -m nctail``.

Exit status is 0 on success, 1 when ``table`` finds a row outside the
tolerance, 2 for usage errors and 3 when a computation fails.
"""
import argparse
import csv
import io
import math
import os
import statistics
import sys
import time

import numpy as np

from . import core
from .errors import DomainError, NctError, NumericError, RangeError
from .gold import FIGURE1, TABLE1
from .quadrature import panel_nodes

EXIT_OK = 0
EXIT_TABLE_FAIL = 1
EXIT_USAGE = 2
EXIT_NUMERIC = 3


class UsageError(Exception):
    pass


def _sci(v):
    """17 significant digits, enough to round-trip any double."""
    return f"{v:.16e}"


def _short(v):
    return repr(float(v))


def _finite(text):
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not math.isfinite(v):
        raise argparse.ArgumentTypeError(f"must be finite: {text!r}")
    return v


def _count(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1: {text!r}")
    return v


def _config(args):
    n_subs = getattr(args, "n_subs", None)
    if n_subs is None:
        env = os.environ.get("NCT_N_SUBS")
        if env:
            try:
                n_subs = _count(env)
            except argparse.ArgumentTypeError as exc:
                raise UsageError(f"NCT_N_SUBS: {exc}") from None
    kw = {}
    if n_subs is not None:
        kw["n_subs"] = n_subs
    eps_r = getattr(args, "eps_r", None)
    if eps_r is not None:
        kw["eps_r"] = eps_r
    try:
        return core.ToleranceConfig(**kw)
    except DomainError as exc:
        raise UsageError(str(exc)) from None


def _read_rows(source):
    """Rows of ``x,nu,delta`` from a path or ``-`` for stdin; a header is optional."""
    if source == "-":
        text = sys.stdin.read()
    else:
        try:
            with open(source, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise UsageError(f"cannot read {source}: {exc}") from None
    rows = []
    for lineno, rec in enumerate(csv.reader(io.StringIO(text)), start=1):
        if not rec or not "".join(rec).strip() or rec[0].lstrip().startswith("#"):
            continue
        if len(rec) != 3:
            raise UsageError(f"line {lineno}: expected x,nu,delta, got {len(rec)} fields")
        try:
            rows.append(tuple(_finite(v.strip()) for v in rec))
        except argparse.ArgumentTypeError as exc:
            if lineno == 1 and not rows:
                continue  # header
            raise UsageError(f"line {lineno}: {exc}") from None
    return rows


def _record(x, nu, delta, tp, wall_ns):
    return {
        "x": x, "nu": nu, "delta": delta,
        "lower": tp.lower, "upper": tp.upper,
        "native_tail": tp.native_tail.value,
        "reflected": tp.reflected,
        "quad_error": tp.quad_error,
        "wall_ns": wall_ns,
    }


def _json_line(rec):
    parts = []
    for key, val in rec.items():
        if isinstance(val, bool):
            text = "true" if val else "false"
        elif isinstance(val, int):
            text = str(val)
        elif isinstance(val, float):
            text = _sci(val)
        else:
            text = '"' + str(val) + '"'
        parts.append(f'"{key}": {text}')
    return "{" + ", ".join(parts) + "}"


def _text_line(rec):
    native = rec["native_tail"] + ("-after-reflection" if rec["reflected"] else "")
    return (f"x={_short(rec['x'])} nu={_short(rec['nu'])} delta={_short(rec['delta'])} "
            f"lower={_short(rec['lower'])} upper={_short(rec['upper'])} "
            f"native_tail={native} quad_error={_short(rec['quad_error'])}")


def _emit(rec, as_json, out):
    out.write((_json_line(rec) if as_json else _text_line(rec)) + "\n")


def _points(args):
    if args.input is not None:
        if any(v is not None for v in (args.x, args.nu, args.delta)):
            raise UsageError("--input cannot be combined with --x/--nu/--delta")
        return _read_rows(args.input)
    missing = [n for n in ("x", "nu", "delta") if getattr(args, n) is None]
    if missing:
        raise UsageError("missing " + ", ".join("--" + m for m in missing) + " (or use --input)")
    return [(args.x, args.nu, args.delta)]


def cmd_cdf(args, out):
    cfg = _config(args)
    for x, nu, delta in _points(args):
        t0 = time.perf_counter_ns()
        tp = core.cdf(x, nu, delta, cfg)
        _emit(_record(x, nu, delta, tp, time.perf_counter_ns() - t0), args.json, out)
    return EXIT_OK


def cmd_pdf(args, out):
    cfg = _config(args)
    for x, nu, delta in _points(args):
        t0 = time.perf_counter_ns()
        d = core.pdf(x, nu, delta, cfg)
        wall = time.perf_counter_ns() - t0
        if args.json:
            out.write(_json_line({"x": x, "nu": nu, "delta": delta, "pdf": d,
                                  "wall_ns": wall}) + "\n")
        else:
            out.write(f"x={_short(x)} nu={_short(nu)} delta={_short(delta)} pdf={_short(d)}\n")
    return EXIT_OK


def _check_p(p):
    if not 0.0 < p < 1.0:
        raise UsageError(f"--p must be in (0, 1), got {p!r}")


def cmd_quantile(args, out):
    cfg = _config(args)
    _check_p(args.p)
    t0 = time.perf_counter_ns()
    x = core.quantile(args.p, args.nu, args.delta, cfg, upper=args.upper)
    wall = time.perf_counter_ns() - t0
    tail = "upper" if args.upper else "lower"
    if args.json:
        out.write(_json_line({"p": args.p, "tail": tail, "nu": args.nu, "delta": args.delta,
                              "x": x, "wall_ns": wall}) + "\n")
    else:
        out.write(f"x={_short(x)}\n")
    return EXIT_OK


def cmd_solve(args, out):
    cfg = _config(args)
    _check_p(args.p)
    t0 = time.perf_counter_ns()
    if args.target == "delta":
        if args.x is None or args.nu is None:
            raise UsageError("solve delta needs --x and --nu")
        value = core.solve_delta(args.x, args.nu, args.p, cfg)
        known = {"x": args.x, "nu": args.nu}
    else:
        if args.x is None or args.delta is None:
            raise UsageError("solve nu needs --x and --delta")
        value = core.solve_nu(args.x, args.delta, args.p, cfg)
        known = {"x": args.x, "delta": args.delta}
    wall = time.perf_counter_ns() - t0
    if args.json:
        out.write(_json_line({**known, "p": args.p, args.target: value, "wall_ns": wall}) + "\n")
    else:
        out.write(f"{args.target}={_short(value)}\n")
    return EXIT_OK


def cmd_table(args, out):
    cfg = _config(args)
    failures = 0
    t0 = time.perf_counter()
    results = [core.cdf(r.x, r.nu, r.delta, cfg).lower for r in TABLE1]
    elapsed = time.perf_counter() - t0
    out.write(f"{'row':>3} {'x':>6} {'nu':>6} {'delta':>6} {'computed':>24} "
              f"{'gold':>24} {'rel_err':>9}  status\n")
    for i, (row, got) in enumerate(zip(TABLE1, results), start=1):
        rel = abs(got - row.cdf) / row.cdf
        ok = rel <= args.tol
        failures += not ok
        out.write(f"{i:>3} {row.x:>6g} {row.nu:>6g} {row.delta:>6g} {_sci(got):>24} "
                  f"{row.cdf_text:>24} {rel:>9.2e}  {'pass' if ok else 'FAIL'}\n")
    out.write(f"# {len(TABLE1) - failures}/{len(TABLE1)} within {args.tol:g}, "
              f"n_subs={cfg.n_subs}, {elapsed * 1e3:.2f} ms\n")
    return EXIT_OK if failures == 0 else EXIT_TABLE_FAIL


def cmd_integrand(args, out):
    cfg = _config(args)
    p = core.NctParams(args.x, args.nu, args.delta)
    if p.x == 0.0:
        raise UsageError("integrand needs x != 0")
    # negative x is evaluated through its reflection, as the CDF does
    q = p if p.x > 0.0 else core.NctParams(-p.x, p.nu, -p.delta)
    tp = core.cdf(p, config=cfg)
    win = tp.window
    g = core.integrand_g if win.tail is core.Tail.LOWER else core.integrand_g_upper
    out.write("z,g\n")
    if not win.degenerate:
        a, b, grade = core.quadrature_plan(q, win, cfg.n_subs)
        z = panel_nodes(a, b, cfg.n_subs, grade)
        for zi, gi in zip(z, np.atleast_1d(g(z, q))):
            out.write(f"{_sci(zi)},{_sci(gi)}\n")
    out.write(f"# tail={win.tail.value} reflected={'yes' if tp.reflected else 'no'} "
              f"A={_sci(win.a)} B={_sci(win.b)} analytic_head={_sci(win.analytic_head)} "
              f"eps_a={_sci(win.eps_a)}\n")
    out.write(f"# CDF lower={_sci(tp.lower)} upper={_sci(tp.upper)}\n")
    return EXIT_OK


def _sweep(text, name):
    """``value`` or ``lo:hi:n`` (n evenly spaced points, inclusive)."""
    parts = text.split(":")
    try:
        if len(parts) == 1:
            return [_finite(parts[0])]
        if len(parts) == 3:
            lo, hi, n = _finite(parts[0]), _finite(parts[1]), int(parts[2])
            if n < 0:
                raise ValueError
            return [float(v) for v in np.linspace(lo, hi, n)]
    except (ValueError, argparse.ArgumentTypeError):
        pass
    raise UsageError(f"--{name}: expected VALUE or LO:HI:N, got {text!r}")


def cmd_bench(args, out):
    cfg = _config(args)
    xs, nus, deltas = (_sweep(getattr(args, n), n) for n in ("x", "nu", "delta"))
    if args.reps < 1:
        raise UsageError("--reps must be >= 1")
    out.write("x,nu,delta,median_ns,evals_per_s\n")
    cells = [(x, nu, d) for x in xs for nu in nus for d in deltas]
    if cells:
        core.cdf(*cells[0], cfg)  # compile / warm caches outside the timing
    total_ns = 0
    for x, nu, d in cells:
        times = []
        for _ in range(args.reps):
            t0 = time.perf_counter_ns()
            core.cdf(x, nu, d, cfg)
            times.append(time.perf_counter_ns() - t0)
        med = statistics.median(times)
        total_ns += sum(times)
        out.write(f"{_short(x)},{_short(nu)},{_short(d)},{med:.0f},{1e9 / med:.1f}\n")
    n_evals = len(cells) * args.reps
    if n_evals:
        out.write(f"# {n_evals} evaluations in {total_ns / 1e9:.4f} s\n")
    return EXIT_OK


def _add_common(p, points=True):
    p.add_argument("--n-subs", type=_count, default=None,
                   help="Kronrod panels per window (default 16, or $NCT_N_SUBS)")
    p.add_argument("--eps-r", type=_finite, default=None, help="relative window tolerance")
    p.add_argument("--json", action="store_true", help="one JSON object per line")
    if points:
        p.add_argument("--x", type=_finite)
        p.add_argument("--nu", type=_finite)
        p.add_argument("--delta", type=_finite)
        p.add_argument("--input", metavar="FILE",
                       help="CSV rows x,nu,delta ('-' reads standard input)")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="nctail", description="Noncentral t distribution by direct quadrature.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("cdf", help="both tail probabilities")
    _add_common(p)
    p.set_defaults(func=cmd_cdf)

    p = sub.add_parser("pdf", help="probability density")
    _add_common(p)
    p.set_defaults(func=cmd_pdf)

    p = sub.add_parser("quantile", help="x with P(T <= x) = p")
    _add_common(p, points=False)
    p.add_argument("--p", type=_finite, required=True)
    p.add_argument("--nu", type=_finite, required=True)
    p.add_argument("--delta", type=_finite, required=True)
    p.add_argument("--upper", action="store_true", help="solve P(T > x) = p instead")
    p.set_defaults(func=cmd_quantile)

    p = sub.add_parser("solve", help="find delta or nu for a given lower-tail probability")
    _add_common(p, points=False)
    p.add_argument("target", choices=("delta", "nu"))
    p.add_argument("--p", type=_finite, required=True)
    p.add_argument("--x", type=_finite)
    p.add_argument("--nu", type=_finite)
    p.add_argument("--delta", type=_finite)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("table", help="reproduce the built-in reference table")
    _add_common(p, points=False)
    p.add_argument("--tol", type=_finite, default=1e-12, help="relative tolerance (1e-12)")
    p.set_defaults(func=cmd_table)

    p = sub.add_parser("integrand", help="dump the integrand at the Kronrod nodes as CSV")
    _add_common(p, points=False)
    p.add_argument("--x", type=_finite, default=FIGURE1.x)
    p.add_argument("--nu", type=_finite, default=FIGURE1.nu)
    p.add_argument("--delta", type=_finite, default=FIGURE1.delta)
    p.set_defaults(func=cmd_integrand)

    p = sub.add_parser("bench", help="time the CDF over a parameter sweep")
    _add_common(p, points=False)
    p.add_argument("--x", default="1:1000:4", help="VALUE or LO:HI:N")
    p.add_argument("--nu", default="1:1000:3")
    p.add_argument("--delta", default="0:1000:4")
    p.add_argument("--reps", type=int, default=32)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None, out=None):
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args, out)
    except UsageError as exc:
        print(f"nctail: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DomainError as exc:
        print(f"nctail: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NumericError, RangeError, NctError) as exc:
        print(f"nctail: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
