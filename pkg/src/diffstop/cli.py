"""Command-line front end: JSON reports and CSV plot data.

Subcommands
-----------
fundamental   tabulate psi, phi and a Green-kernel row on a grid
solve         threshold, smooth-fit report (JSON), optional value samples
measure       representing measure of a named candidate (JSON document)
verify        birth-death-chain oracle run and comparison (JSON)
plot-data     CSV of x, t(x), s(x), V*(x), g(x), one file per alpha
sweep         alpha-grid of threshold / jump / atom / verdict rows

Numeric output uses 17 significant digits with '.' as the decimal mark and
no grouping, so identical invocations produce byte-identical files.  Errors
in numeric domains exit with code 1 and a machine-readable JSON object on
stderr; flag errors exit with code 2.  The environment variable
DIFFSTOP_SEED is reserved for future use: every computation here is
deterministic and ignores it.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .diffusion import fundamental, spec_from_config
from .errors import DiffstopError
from .oracle import compare, discretize, solve_chain_stopping
from .representation import (
    green_candidate,
    martin_measure,
    measure_to_doc,
    phi_candidate,
    psi_candidate,
    riesz_from_martin,
)
from .stopping import (
    default_reward,
    smooth_fit_report,
    st_table,
    value_candidate,
    value_function,
)


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _write(text: str, out: str | None) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _csv(header: list[str], rows) -> str:
    lines = [",".join(header)]
    lines.extend(",".join(_fmt(v) for v in row) for row in rows)
    return "\n".join(lines) + "\n"


def _spec_from_args(args):
    # flags map one-to-one onto the configuration-document schema
    return spec_from_config({"family": args.family, "mu": args.mu, "c": args.c})


def _cmd_fundamental(args) -> int:
    spec = _spec_from_args(args)
    fs = fundamental(spec, args.alpha)
    xs = np.linspace(args.range_from, args.range_to, args.points)
    rows = [(x, float(fs.psi(x)), float(fs.phi(x)), float(fs.green(args.x0, x)))
            for x in xs]
    if args.format == "json":
        doc = {
            "alpha": args.alpha,
            "theta": fs.theta,
            "gamma": fs.gamma,
            "wronskian": fs.wronskian,
            "rows": [{"x": r[0], "psi": r[1], "phi": r[2], "green_x0": r[3]}
                     for r in rows],
        }
        _write(json.dumps(doc, indent=2) + "\n", args.out)
    else:
        _write(_csv(["x", "psi", "phi", "green_x0"], rows), args.out)
    return 0


def _cmd_solve(args) -> int:
    report = smooth_fit_report(args.alpha, args.c)
    _write(json.dumps(report.to_doc(), indent=2) + "\n", args.out)
    if args.samples_out:
        xs = np.linspace(args.range_from, args.range_to, args.points)
        g = default_reward().value
        rows = [(x, float(value_function(args.alpha, args.c, x)), float(g(x)))
                for x in xs]
        with open(args.samples_out, "w") as fh:
            fh.write(_csv(["x", "value", "reward"], rows))
    return 0


def _cmd_measure(args) -> int:
    spec = _spec_from_args(args)
    x0 = 0.0 if args.x0 is None else args.x0
    if args.candidate == "green":
        cand = green_candidate(spec, args.alpha, args.y0, x0=x0)
    elif args.candidate == "psi":
        cand = psi_candidate(spec, args.alpha, x0=x0)
    elif args.candidate == "phi":
        cand = phi_candidate(spec, args.alpha, x0=x0)
    else:
        if args.family != "sticky_bm" or args.mu != 0.0:
            raise DiffstopError("the value candidate is defined for the "
                                "driftless sticky family only")
        cand = value_candidate(args.alpha, args.c, x0=args.x0)
    measure = martin_measure(spec, args.alpha, cand)
    if args.kind == "riesz":
        measure = riesz_from_martin(measure, spec, args.alpha)
    _write(json.dumps(measure_to_doc(measure), indent=2) + "\n", args.out)
    return 0


def _cmd_verify(args) -> int:
    if args.family != "sticky_bm" or args.mu != 0.0:
        raise DiffstopError("verify compares against the closed-form value, "
                            "which exists for the driftless sticky family only")
    spec = _spec_from_args(args)
    lo, hi = args.window
    chain = discretize(spec, lo, hi, args.n)
    sol = solve_chain_stopping(chain, args.alpha)
    rep = compare(chain, sol.values,
                  lambda x: value_function(args.alpha, args.c, x), jump_at=0.0)
    doc = {
        "window": [lo, hi],
        "n": args.n,
        "alpha": args.alpha,
        "c": args.c,
        "sup_error": rep.sup_error,
        "jump_estimate": rep.jump_estimate,
        "iterations": sol.iterations,
        "residual": sol.residual,
    }
    _write(json.dumps(doc, indent=2) + "\n", args.out)
    return 0


def _cmd_plot_data(args) -> int:
    alphas = args.alpha
    if len(alphas) > 1 and (not args.out or "{alpha}" not in args.out):
        raise DiffstopError("multiple alphas need --out with an {alpha} "
                            "placeholder")
    g = default_reward().value
    for alpha in alphas:
        xs = np.linspace(args.range_from, args.range_to, args.points)
        s, t = st_table(alpha, args.c, xs)
        v = value_function(alpha, args.c, xs)
        rows = list(zip(xs, t, s, np.atleast_1d(v), np.atleast_1d(g(xs))))
        text = _csv(["x", "t", "s", "value", "reward"], rows)
        out = args.out.format(alpha=_fmt(alpha)) if args.out else None
        _write(text, out)
    return 0


def _cmd_sweep(args) -> int:
    if args.step <= 0:
        raise DiffstopError("sweep step must be positive")
    alphas = []
    a = args.alpha_from
    while a <= args.alpha_to + 1e-12:
        alphas.append(round(a, 12))
        a += args.step
    entries = [smooth_fit_report(alpha, args.c).to_doc() for alpha in alphas]
    if args.format == "json":
        _write(json.dumps(entries, indent=2) + "\n", args.out)
    else:
        rows = [(e["alpha"], e["x_star"], e["jump"], e["sigma_atom"]) for e in entries]
        lines = ["alpha,x_star,jump,sigma_atom,verdict"]
        lines.extend(",".join(_fmt(v) for v in row) + "," + e["verdict"]
                     for row, e in zip(rows, entries))
        _write("\n".join(lines) + "\n", args.out)
    return 0


def _add_family_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--family", default="sticky_bm",
                   help="diffusion family (default: sticky_bm)")
    p.add_argument("--mu", type=float, default=0.0, help="drift (<= 0)")
    p.add_argument("--c", type=float, default=1.0, help="stickiness (> 0)")


def _add_range_flags(p: argparse.ArgumentParser, lo: float, hi: float,
                     points: int) -> None:
    p.add_argument("--from", dest="range_from", type=float, default=lo)
    p.add_argument("--to", dest="range_to", type=float, default=hi)
    p.add_argument("--points", type=int, default=points)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="diffstop",
        description="Excessive-function representations and smooth-fit "
                    "diagnostics for optimal stopping of 1D diffusions.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fundamental", help="tabulate psi, phi, Green row")
    _add_family_flags(p)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--x0", type=float, default=0.0)
    _add_range_flags(p, -3.0, 3.0, 61)
    p.add_argument("--format", choices=("json", "csv"), default="csv")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_fundamental)

    p = sub.add_parser("solve", help="threshold and smooth-fit report")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--c", type=float, default=1.0)
    p.add_argument("--samples-out", help="also write value samples CSV here")
    _add_range_flags(p, -3.0, 3.0, 121)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("measure", help="representing measure of a candidate")
    _add_family_flags(p)
    p.add_argument("--candidate", choices=("green", "psi", "phi", "value"),
                   required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--y0", type=float, default=0.7,
                   help="pole of the green candidate")
    p.add_argument("--x0", type=float, default=None,
                   help="normalization point (candidate default if omitted)")
    p.add_argument("--kind", choices=("martin", "riesz"), default="martin")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_measure)

    p = sub.add_parser("verify", help="chain-oracle run and comparison")
    _add_family_flags(p)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--window", type=float, nargs=2, default=(-6.0, 6.0),
                   metavar=("LO", "HI"))
    p.add_argument("--n", type=int, default=4001)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("plot-data", help="CSV of x, t, s, value, reward")
    p.add_argument("--alpha", type=float, action="append", required=True,
                   help="repeatable; one output file per alpha")
    p.add_argument("--c", type=float, default=1.0)
    _add_range_flags(p, -0.99, 2.0, 500)
    p.add_argument("--out", help="path; use {alpha} placeholder for sweeps")
    p.set_defaults(func=_cmd_plot_data)

    p = sub.add_parser("sweep", help="alpha sweep of smooth-fit verdicts")
    p.add_argument("--c", type=float, default=1.0)
    p.add_argument("--alpha-from", type=float, required=True)
    p.add_argument("--alpha-to", type=float, required=True)
    p.add_argument("--step", type=float, required=True)
    p.add_argument("--format", choices=("json", "csv"), default="csv")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_sweep)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except DiffstopError as err:
        payload = {"error": {"type": type(err).__name__, "message": str(err)}}
        sys.stderr.write(json.dumps(payload) + "\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
