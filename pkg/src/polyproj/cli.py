"""Command-line interface for the study harness.

Subcommands emit deterministic CSV tables:

    polyproj grad-error  [--polygon hex] [--schemes tri,quad]
                         [--orders 1,2,4,8,16,32] --out table.csv
    polyproj patch-test  --m {1,2} --mode {quadrature,projected}
                         [--scheme quad] [--order N] [--levels 1..5] --out run.csv
    polyproj converge    --problem {smooth1,varK} --m {1,2}
                         --mode {quadrature,projected,corrected}
                         [--scheme quad] [--order N] [--levels 1..5] --out run.csv

Exit codes: 0 on success, 2 on a validation error, 3 on solver failure.
"""

from __future__ import annotations

import argparse
import sys

from .errors import PolyProjError, SolverDiverged
from .geometry import polygon_registry, read_polygon_text
from .quadrature import QUADRANGULATION, TRIANGULATION
from .studies import (DEFAULT_LEVELS, GRAD_ERROR_ORDERS, PROBLEMS, run_convergence,
                      run_grad_error, run_patch_test)

_SCHEME_NAMES = {"tri": TRIANGULATION, "quad": QUADRANGULATION,
                 TRIANGULATION: TRIANGULATION, QUADRANGULATION: QUADRANGULATION}


def _parse_levels(text):
    """Accept '1..5' ranges or comma lists like '1,2,3'."""
    text = text.strip()
    if ".." in text:
        lo, hi = text.split("..", 1)
        levels = tuple(range(int(lo), int(hi) + 1))
    else:
        levels = tuple(int(t) for t in text.split(","))
    if not levels or any(k < 1 for k in levels):
        raise argparse.ArgumentTypeError(f"invalid level range {text!r}")
    return levels


def _parse_orders(text):
    return tuple(int(t) for t in text.split(","))


def _parse_schemes(text):
    try:
        return tuple(_SCHEME_NAMES[t.strip()] for t in text.split(","))
    except KeyError as err:
        raise argparse.ArgumentTypeError(f"unknown scheme {err.args[0]!r}") from None


def _scheme(text):
    if text not in _SCHEME_NAMES:
        raise argparse.ArgumentTypeError(f"unknown scheme {text!r}")
    return _SCHEME_NAMES[text]


def build_parser():
    parser = argparse.ArgumentParser(prog="polyproj",
                                     description="Polygonal FEM study harness")
    sub = parser.add_subparsers(dest="command", required=True)

    ge = sub.add_parser("grad-error", help="basis-gradient integration-error table")
    ge.add_argument("--polygon", default="hex",
                    help="registry name (hex, square, quad1, quad2, pentagon1, "
                         "pentagon2) or a path to a vertex file")
    ge.add_argument("--schemes", type=_parse_schemes,
                    default=(TRIANGULATION, QUADRANGULATION), metavar="tri,quad")
    ge.add_argument("--orders", type=_parse_orders, default=GRAD_ERROR_ORDERS,
                    metavar="1,2,4,8,16,32")
    ge.add_argument("--out", required=True, help="output CSV path ('-' for stdout)")

    pt = sub.add_parser("patch-test", help="polynomial patch test over mesh levels")
    pt.add_argument("--m", type=int, choices=(1, 2), required=True)
    pt.add_argument("--mode", choices=("quadrature", "projected"), required=True)
    pt.add_argument("--scheme", type=_scheme, default=QUADRANGULATION, metavar="{tri,quad}")
    pt.add_argument("--order", type=int, default=None,
                    help="subdomain degree of exactness (default: m)")
    pt.add_argument("--levels", type=_parse_levels, default=DEFAULT_LEVELS, metavar="1..K")
    pt.add_argument("--out", required=True)

    cv = sub.add_parser("converge", help="convergence study on a manufactured solution")
    cv.add_argument("--problem", choices=sorted(PROBLEMS), required=True)
    cv.add_argument("--m", type=int, choices=(1, 2), required=True)
    cv.add_argument("--mode", choices=("quadrature", "projected", "corrected"), required=True)
    cv.add_argument("--scheme", type=_scheme, default=QUADRANGULATION, metavar="{tri,quad}")
    cv.add_argument("--order", type=int, default=None)
    cv.add_argument("--levels", type=_parse_levels, default=DEFAULT_LEVELS, metavar="1..K")
    cv.add_argument("--out", required=True)
    return parser


def _emit(text, out):
    if out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w") as fh:
            fh.write(text)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "grad-error":
            polygon = args.polygon
            if polygon not in polygon_registry():
                polygon = read_polygon_text(polygon)
            table = run_grad_error(polygon, schemes=args.schemes, orders=args.orders)
            _emit(table.csv(), args.out)
        elif args.command == "patch-test":
            order = args.order if args.order is not None else args.m
            report = run_patch_test(args.m, args.mode, args.scheme, order, args.levels)
            _emit(report.csv(), args.out)
        else:
            order = args.order if args.order is not None else args.m
            report = run_convergence(args.problem, args.m, args.mode, args.scheme,
                                     order, args.levels)
            _emit(report.csv(), args.out)
    except SolverDiverged as err:
        print(f"polyproj: solver failure: {err}", file=sys.stderr)
        return 3
    except (PolyProjError, ValueError, OSError) as err:
        print(f"polyproj: {err}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
