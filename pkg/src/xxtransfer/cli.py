"""Command-line entry point: ``xxtransfer {table1,figure,verify}``."""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import figures, verify
from .errors import NumericalError
from .optimizer import table_one
from .output import Table, render

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_NUMERICAL = 2
EXIT_VERIFY = 3


class ValidationError(ValueError):
    pass


def _sizes(text: str) -> list[int]:
    try:
        sizes = [int(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad size list {text!r}") from None
    if not sizes:
        raise argparse.ArgumentTypeError("empty size list")
    return sizes


def _j0(text: str):
    if text == "opt":
        return text
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError("j0 must be a number or 'opt'") from None
    if not 0 < value < 2**0.5:
        raise argparse.ArgumentTypeError("j0 must lie in (0, sqrt 2)")
    return value


def _odd_sizes(sizes, minimum=7):
    for m in sizes:
        if m % 2 == 0 or m < minimum:
            raise ValidationError(f"sizes must be odd N+2 >= {minimum}, got {m}")


def _emit(table: Table, args):
    text = render(table, args.format, timestamp=not args.no_timestamp)
    if args.out in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(args.out).write_text(text)


def cmd_table1(args) -> int:
    _odd_sizes(args.sizes)
    table = Table("table1", ["M", "delta_opt", "j0_opt", "t_star", "u_opt", "delta0", "reading_time"])
    for m in args.sizes:
        try:
            (p,) = table_one([m])
        except NumericalError as exc:
            raise type(exc)(f"row M={m}: {exc}") from exc
        table.add(m, p.delta_opt, p.j0_opt, p.t_star, p.u_opt, p.delta0, p.reading_time)
    _emit(table, args)
    return EXIT_OK


def _figure_kwargs(args) -> dict:
    name = args.name
    kw = {}
    if name == "utD":
        _odd_sizes(args.sizes or [51, 251])
        kw["sizes"] = args.sizes or [51, 251]
        kw["deltas"] = figures.parse_deltas(args.deltas, args.delta_min, args.delta_max)
    elif name in ("umax", "ctstar"):
        sizes = args.sizes or ([25, 51, 101, 251, 501, 1001, 2501] if name == "umax" else [51, 251, 1001])
        _odd_sizes(sizes)
        kw["sizes"] = sizes
    elif name == "group-velocity":
        kw["n_total"] = args.M or 51
        if args.deltas:
            kw["deltas"] = figures.parse_deltas(args.deltas, args.delta_min, args.delta_max)
    else:
        defaults = {"partial-sums": (51, 0.58), "magnetization": (250, 1.0),
                    "concurrence-map": (250, None), "min-fidelity": (251, None)}
        m_default, j0_default = defaults[name]
        m = args.M or m_default
        if m < 3:
            raise ValidationError("M must be at least 3")
        kw["n_total"] = m
        j0 = args.j0 if args.j0 is not None else j0_default
        if name in ("partial-sums", "magnetization"):
            kw["j0"] = figures.resolve_j0(j0, m)
        elif args.j0 is not None:
            kw["j0_values"] = [figures.resolve_j0(j0, m)]
        if name == "magnetization" and args.init:
            kw["init"] = args.init
        if name == "concurrence-map" and args.init:
            kw["init"] = args.init
        if name in ("magnetization", "concurrence-map", "min-fidelity"):
            if args.t_max is not None:
                kw["t_max"] = args.t_max
            if args.t_step is not None:
                kw["t_step"] = args.t_step
    return kw


def cmd_figure(args) -> int:
    table = figures.generate(args.name, **_figure_kwargs(args))
    _emit(table, args)
    return EXIT_OK


def cmd_verify(args) -> int:
    checks = verify.run(args.level)
    for c in checks:
        print(c.line())
    failed = sum(not c.ok for c in checks)
    print(f"{len(checks) - failed}/{len(checks)} checks passed")
    return EXIT_OK if failed == 0 else EXIT_VERIFY


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="xxtransfer", description="Quantum-state transfer through XX chains with weak end couplings."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def output_opts(p):
        p.add_argument("--out", "-o", default=None, help="output file (default: stdout)")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--no-timestamp", action="store_true", help="omit the generation time header")

    p = sub.add_parser("table1", help="optimal widths and couplings for a list of chain sizes")
    p.add_argument("--sizes", type=_sizes, default=[25, 51, 101], help="comma-separated N+2 values")
    output_opts(p)
    p.set_defaults(func=cmd_table1)

    p = sub.add_parser("figure", help="emit the data behind one of the standard plots")
    p.add_argument("name", choices=figures.FIGURES)
    p.add_argument("--sizes", type=_sizes, default=None)
    p.add_argument("--M", type=int, default=None, help="N+2 for single-size figures")
    p.add_argument("--j0", type=_j0, default=None, help="end coupling, or 'opt'")
    p.add_argument("--deltas", default="40log", help="'<n>log' or comma-separated widths")
    p.add_argument("--delta-min", type=float, default=0.01)
    p.add_argument("--delta-max", type=float, default=1.0)
    p.add_argument("--init", default=None,
                   choices=["updown"] + [k.value for k in figures.ChannelKind])
    p.add_argument("--t-max", type=float, default=None)
    p.add_argument("--t-step", type=float, default=None)
    output_opts(p)
    p.set_defaults(func=cmd_figure)

    p = sub.add_parser("verify", help="run the built-in consistency checks")
    p.add_argument("level", nargs="?", choices=verify.LEVELS, default="quick")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_VALIDATION
    try:
        return args.func(args)
    except BrokenPipeError:
        # downstream closed early (e.g. piped into head)
        sys.stdout = open(os.devnull, "w")
        return EXIT_OK
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
