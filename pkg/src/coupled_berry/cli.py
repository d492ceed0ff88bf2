"""Command-line front end: ``coupled-berry {point,sweep-g,transition-sweep,verify}``.

Settings come from an optional ``key=value`` config file (``--config``) and are
overridden by explicit flags.  Exit codes: 0 success, 1 failed verification,
3 degenerate Schmidt data, 4 degenerate roots, 5 adiabaticity failure,
64 usage error.
"""

from __future__ import annotations

import argparse
import ast
import math
import operator
import sys

from .errors import CoupledBerryError
from .model import BRANCHES, Branch
from .oracles import DEFAULT_PERIOD
from .sweep import SweepSpec, UsageError, parse_config, run_point, run_sweep_g, run_transition_sweep, write_csv

EXIT_USAGE = 64

_OPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: operator.pow,
    ast.USub: operator.neg,
    ast.UAdd: operator.pos,
}


def parse_angle(text: str) -> float:
    """Evaluate a real number or a simple expression in ``pi`` such as ``9*pi/20``."""

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id == "pi":
            return math.pi
        if isinstance(node, ast.BinOp) and type(node.op) in _OPS:
            return _OPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _OPS:
            return _OPS[type(node.op)](ev(node.operand))
        raise ValueError(f"unsupported expression {text!r}")

    try:
        value = ev(ast.parse(text.strip(), mode="eval"))
    except (SyntaxError, ZeroDivisionError) as exc:
        raise ValueError(f"cannot parse angle {text!r}") from exc
    if not math.isfinite(value):
        raise ValueError(f"angle {text!r} is not finite")
    return value


def parse_g_range(text: str):
    parts = text.split(":")
    if len(parts) != 3:
        raise ValueError(f"expected min:max:steps, got {text!r}")
    return float(parts[0]), float(parts[1]), int(parts[2])


def parse_branches(text: str) -> tuple:
    if text == "all":
        return BRANCHES
    return tuple(Branch.parse(b.strip()) for b in text.split(","))


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--theta", help="polar angle in radians; expressions like pi/3 are accepted")
    common.add_argument("--g", help="single coupling value")
    common.add_argument("--g-range", help="uniform grid min:max:steps")
    common.add_argument("--branch", help="minus, zero, plus, a comma list, or all")
    common.add_argument("--oracle", choices=("none", "wilson", "ode", "all"))
    common.add_argument("--points", type=int, help="samples per loop for Wilson loops and tracking")
    common.add_argument("--period", type=float, help="traversal time for the ODE oracle")
    common.add_argument("--out", help="write CSV here instead of stdout")
    common.add_argument("--config", help="key=value settings file; flags take precedence")
    common.add_argument("--units", choices=("pi", "rad"), help="phase units in the CSV")
    common.add_argument("--jobs", type=int, help="worker processes for sweeps")
    common.add_argument("--tol-scale", type=float, help="multiply every verify tolerance by this factor")

    parser = _Parser(prog="coupled-berry", description="Geometric phases of two coupled spins in a rotating field.")
    sub = parser.add_subparsers(dest="mode", required=True, parser_class=_Parser)
    sub.add_parser("point", parents=[common], help="all phases at one (theta, g)")
    sub.add_parser("sweep-g", parents=[common], help="constant-theta loop over a g grid")
    sub.add_parser("transition-sweep", parents=[common], help="pole-to-pole loop over a g grid")
    sub.add_parser("verify", parents=[common], help="run the cross-check grid")
    return parser


_KEYS = ("theta", "g", "g-range", "branch", "oracle", "points", "period", "out", "units", "jobs", "tol-scale")


def merge_settings(args: argparse.Namespace) -> dict:
    settings = {}
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                settings.update(parse_config(fh.read()))
        except OSError as exc:
            raise UsageError(f"cannot read config: {exc}") from exc
    unknown = set(settings) - set(_KEYS)
    if unknown:
        raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
    if args.g is not None and args.g_range is not None:
        raise UsageError("give either --g or --g-range, not both")
    for key in _KEYS:
        value = getattr(args, key.replace("-", "_"))
        if value is not None:
            # a single g on the command line replaces a configured grid and vice versa
            if key in ("g", "g-range"):
                settings.pop("g-range" if key == "g" else "g", None)
            settings[key] = str(value)
    return settings


def spec_from_settings(mode: str, settings: dict) -> SweepSpec:
    kw = {"mode": mode}
    try:
        if "theta" in settings:
            kw["theta"] = parse_angle(settings["theta"])
        if "g" in settings and "g-range" in settings:
            raise UsageError("give either g or g-range, not both")
        if "g" in settings:
            g = float(settings["g"])
            kw.update(g_min=g, g_max=g, g_steps=1)
        elif "g-range" in settings:
            kw["g_min"], kw["g_max"], kw["g_steps"] = parse_g_range(settings["g-range"])
        elif mode == "point":
            raise UsageError("point needs --g")
        elif mode == "transition-sweep":
            kw.update(g_min=0.0, g_max=50.0, g_steps=101)
        if "branch" in settings:
            kw["branches"] = parse_branches(settings["branch"])
        for key, conv in (("points", int), ("period", float), ("jobs", int), ("tol-scale", float)):
            if key in settings:
                kw[key.replace("-", "_")] = conv(settings[key])
        for key in ("oracle", "units", "out"):
            if key in settings:
                kw[key] = settings[key]
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    kw.setdefault("period", DEFAULT_PERIOD)
    return SweepSpec(**kw)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        spec = spec_from_settings(args.mode, merge_settings(args))
        if spec.mode == "verify":
            from .verify import run_verify, summary_lines

            results, code = run_verify(spec, stream=sys.stdout)
            print("\n".join(summary_lines(results)))
            return code
        runner = {"point": run_point, "sweep-g": run_sweep_g, "transition-sweep": run_transition_sweep}[spec.mode]
        write_csv(runner(spec), spec, stream=sys.stdout)
        return 0
    except UsageError as exc:
        print(f"coupled-berry: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CoupledBerryError as exc:
        print(f"coupled-berry: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
