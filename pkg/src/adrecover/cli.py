"""Command-line entry point.

Usage:
    adrecover damp --state rho1 --p 0.3
    adrecover recover --state rho1 --p 0.3 [--theta 61.3 --degrees]
    adrecover extend --state rho1 --p 0.5 --x 0.1
    adrecover sweep --state rho1 --p-grid 0:1:0.05 [--extended --x 0.1,0.5,0.8]
    adrecover robust --p-lower 0.1 --p-upper 0.9 --samples 10000 --theta-grid 0:2pi:pi/10
    adrecover reproduce table2 -o table2.json

Exit codes: 0 success, 1 I/O failure, 2 invalid input, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import __version__
from .channel import damp_two_closed_form
from .errors import AdRecoverError, NumericalError, ValidationError
from .experiments import TARGETS, frange, reproduce, rows_to_csv, rows_to_json, sweep_rows
from .metrics import concurrence, fidelity
from .recovery import ExtendedConfig, recovered_closed_form, run_extended, run_recovery_circuit
from .robust import DEFAULT_SAMPLES, DEFAULT_SEED, ThetaGrid, UncertaintySpec, optimize_theta
from .states import (NAMED_STATES, RngStream, load_state, random_density_matrix,
                     state_to_json, to_params)

SEED_ENV = "ADRECOVER_SEED"
OUTPUT_DECIMALS = 12


def parse_number(text: str) -> float:
    """Float, fraction, or multiple of pi: ``0.3``, ``1/3``, ``pi``, ``3pi/10``, ``-pi/4``."""
    t = text.strip().lower().replace("*", "").replace(" ", "")
    num, _, den = t.partition("/")
    try:
        if "pi" in num:
            coef = num.replace("pi", "")
            value = {"": 1.0, "+": 1.0, "-": -1.0}.get(coef)
            value = (float(coef) if value is None else value) * math.pi
        else:
            value = float(num)
        if den:
            value /= float(den)
    except ValueError:
        raise argparse.ArgumentTypeError(f"cannot parse number {text!r}") from None
    return value


def parse_grid(text: str) -> tuple[float, float, float]:
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"grid must be start:stop:step, got {text!r}")
    start, stop, step = (parse_number(s) for s in parts)
    if step <= 0 or stop < start:
        raise argparse.ArgumentTypeError(f"grid {text!r} is empty")
    return start, stop, step


def parse_list(text: str) -> list[float]:
    return [parse_number(s) for s in text.split(",") if s.strip()]


def default_seed() -> int:
    env = os.environ.get(SEED_ENV)
    return int(env) if env else DEFAULT_SEED


def _angle(value: float, degrees: bool) -> float:
    return math.radians(value) if degrees else value


def _resolve_state(args):
    """(params, label) from exactly one state source."""
    if args.random_state:
        rho = random_density_matrix(RngStream(args.seed, 0), 4, args.rank)
        return to_params(rho), f"random(seed={args.seed},rank={args.rank or 4})"
    name = args.state
    if name in NAMED_STATES:
        return NAMED_STATES[name], name
    return to_params(load_state(name)), name


def _rounded_state(rho) -> dict:
    # + 0.0 turns -0.0 into 0.0 so equal matrices print identically
    return state_to_json(np.round(np.asarray(rho), OUTPUT_DECIMALS) + 0.0)


def _emit(text: str, path: str | None) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _single_report(args, params, label, state, success) -> dict:
    rho = params.matrix()
    return {
        "command": args.command,
        "source": label,
        "seed": args.seed,
        "p": args.p,
        "state": _rounded_state(state),
        "success_probability": round(float(success), OUTPUT_DECIMALS),
        "fidelity": round(fidelity(rho, state), OUTPUT_DECIMALS),
        "concurrence": round(concurrence(state), OUTPUT_DECIMALS),
        "input_concurrence": round(concurrence(rho), OUTPUT_DECIMALS),
    }


def cmd_damp(args):
    params, label = _resolve_state(args)
    state = damp_two_closed_form(params, args.p)
    return json.dumps(_single_report(args, params, label, state, 1.0), indent=2) + "\n"


def cmd_recover(args):
    params, label = _resolve_state(args)
    if args.theta is None:
        out = recovered_closed_form(params, args.p)
    else:
        out = run_recovery_circuit(damp_two_closed_form(params, args.p),
                                   _angle(args.theta, args.degrees))
    report = _single_report(args, params, label, out.state, out.success_probability)
    if args.theta is not None:
        report["theta"] = _angle(args.theta, args.degrees)
    return json.dumps(report, indent=2) + "\n"


def cmd_extend(args):
    params, label = _resolve_state(args)
    out = run_extended(params, ExtendedConfig(x=args.x, p=args.p))
    report = _single_report(args, params, label, out.state, out.success_probability)
    report["x"] = args.x
    return json.dumps(report, indent=2) + "\n"


def cmd_sweep(args):
    params, label = _resolve_state(args)
    xs = args.x if args.extended else []
    if args.extended and not xs:
        raise ValidationError("--extended needs --x with at least one value")
    rows = sweep_rows(params, frange(*args.p_grid), xs)
    meta = {"command": "sweep", "source": label, "seed": args.seed}
    if args.format == "json":
        return rows_to_json(rows, meta)
    return rows_to_csv(rows, meta)


def cmd_robust(args):
    spec = UncertaintySpec(p_lower=args.p_lower, p_upper=args.p_upper,
                           n_samples=args.samples, master_seed=args.seed, rank=args.rank)
    start, stop, step = args.theta_grid
    grid = ThetaGrid(_angle(start, args.degrees), _angle(stop, args.degrees),
                     _angle(step, args.degrees))
    report = optimize_theta(grid, spec)
    return report.to_json() if args.format == "json" else report.to_csv()


def cmd_reproduce(args):
    fmt = args.format or ("json" if args.target == "table2" else "csv")
    return reproduce(args.target, fmt=fmt, n_samples=args.samples, seed=args.seed)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="adrecover",
        description="Amplitude damping and post-selected recovery of two-qubit mixed states.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=default_seed(),
                        help=f"master seed (default {DEFAULT_SEED}, env {SEED_ENV})")
    common.add_argument("-o", "--output", default=None, help="output file (default stdout)")
    common.add_argument("--degrees", action="store_true", help="angles are given in degrees")

    state = argparse.ArgumentParser(add_help=False)
    src = state.add_mutually_exclusive_group(required=True)
    src.add_argument("--state", help="rho1, rho2 or a JSON state file")
    src.add_argument("--random-state", action="store_true",
                     help="draw a random state from --seed (Ginibre, --rank)")
    state.add_argument("--rank", type=int, default=None, help="Ginibre rank for random states")

    p = sub.add_parser("damp", parents=[common, state], help="damp one state")
    p.add_argument("--p", type=parse_number, required=True)
    p.set_defaults(func=cmd_damp)

    p = sub.add_parser("recover", parents=[common, state], help="damp then recover one state")
    p.add_argument("--p", type=parse_number, required=True)
    p.add_argument("--theta", type=parse_number, default=None,
                   help="gate angle (default: matched angle atan(1/sqrt(1-p)))")
    p.set_defaults(func=cmd_recover)

    p = sub.add_parser("extend", parents=[common, state], help="prepare, damp, recover one state")
    p.add_argument("--p", type=parse_number, required=True)
    p.add_argument("--x", type=parse_number, required=True, help="x = tan^2(theta1)")
    p.set_defaults(func=cmd_extend)

    p = sub.add_parser("sweep", parents=[common, state], help="metrics along a p grid")
    p.add_argument("--p-grid", type=parse_grid, default=(0.0, 1.0, 0.05),
                   help="start:stop:step, stop inclusive (default 0:1:0.05)")
    p.add_argument("--extended", action="store_true", help="add extended-scheme columns")
    p.add_argument("--x", type=parse_list, default=[], help="comma-separated x values")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("robust", parents=[common], help="Monte-Carlo robust angle search")
    p.add_argument("--p-lower", type=parse_number, default=0.1)
    p.add_argument("--p-upper", type=parse_number, default=0.9)
    p.add_argument("--samples", type=int, default=DEFAULT_SAMPLES)
    p.add_argument("--rank", type=int, default=None)
    p.add_argument("--theta-grid", type=parse_grid, default=(0.0, 2 * math.pi, math.pi / 10))
    p.add_argument("--format", choices=("csv", "json"), default="json")
    p.set_defaults(func=cmd_robust)

    p = sub.add_parser("reproduce", parents=[common], help="regenerate a figure/table data file")
    p.add_argument("target", choices=TARGETS)
    p.add_argument("--samples", type=int, default=DEFAULT_SAMPLES)
    p.add_argument("--format", choices=("csv", "json"), default=None)
    p.set_defaults(func=cmd_reproduce)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        text = args.func(args)
        _emit(text, args.output)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 3
    except AdRecoverError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
