"""Command-line front end.

    circkit <algorithm> -f <gatecount|counts|ascii|simulate> [-o <pipeline>]
            [-n <int>] [-k <int>] [-e <expr>] [--seed <int>] [--base <preset>]

Exit status: 0 on success, 2 on usage errors, 1 on runtime errors.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from typing import Callable, Optional

from . import stdlib
from .circuit import Circuit, inline
from .errors import CircuitError
from .oracle import ExprSyntaxError, compile_oracle, parse_expr
from .resources import count, report
from .sim import run, run_interactive
from .text import serialize
from .transform import PRESETS, decompose_to_base, lower_controls


class UsageError(Exception):
    pass


def _need(args, name: str, minimum: int, default=None) -> int:
    value = getattr(args, name)
    if value is None:
        if default is None:
            raise UsageError(f"{args.algorithm}: parameter -{name} is required")
        value = default
    if value < minimum:
        raise UsageError(f"{args.algorithm}: parameter -{name} must be >= {minimum}, got {value}")
    return value


def _oracle(args) -> Circuit:
    if args.e is None:
        raise UsageError("oracle: parameter -e is required")
    try:
        e = parse_expr(args.e)
    except ExprSyntaxError as err:
        raise UsageError(f"oracle: parameter -e: {err}") from None
    from .oracle import arity
    n = arity(e) if args.n is None else args.n
    if n < arity(e):
        raise UsageError(f"oracle: parameter -n must be >= {arity(e)} for this expression")
    return compile_oracle(e, n).circuit


@dataclass(frozen=True)
class Algorithm:
    name: str
    circuit: Callable[[argparse.Namespace], Circuit]
    program: Optional[Callable] = None  # dynamic-lifting variant for -f simulate
    help: str = ""


REGISTRY: dict[str, Algorithm] = {}


def register(alg: Algorithm) -> Algorithm:
    REGISTRY[alg.name] = alg
    return alg


register(Algorithm("qft", lambda a: stdlib.qft(_need(a, "n", 1)), help="quantum Fourier transform on -n qubits"))
register(Algorithm("adder", lambda a: stdlib.adder(_need(a, "n", 1)), help="-n bit ripple-carry adder"))
register(Algorithm("mcx", lambda a: stdlib.mcx(_need(a, "k", 0)), help="X with -k controls"))
register(Algorithm("teleport", lambda a: stdlib.teleport_circuit(), stdlib.teleport(),
                   help="one-qubit teleportation"))
register(Algorithm("oracle", _oracle, help="reversible oracle for boolean expression -e"))
register(Algorithm("hierarchy", lambda a: stdlib.hierarchy(_need(a, "n", 1, 10), _need(a, "k", 1, 30)),
                   help="synthetic -n level hierarchy, -k repetitions per level"))


def _pipeline(name: str, base: str) -> Callable[[Circuit], Circuit]:
    if base not in PRESETS:
        raise UsageError(f"unknown --base preset {base!r} (choose from {', '.join(PRESETS)})")
    pipelines = {
        "none": lambda c: c,
        "inline": inline,
        "lower0": lambda c: lower_controls(c, 0),
        "lower1": lambda c: lower_controls(c, 1),
        "base": lambda c: decompose_to_base(c, PRESETS[base]),
        "base-ct": lambda c: decompose_to_base(c, PRESETS["clifford+t"]),
    }
    if name not in pipelines:
        raise UsageError(f"unknown pipeline {name!r} (choose from {', '.join(pipelines)})")
    return pipelines[name]


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def make_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="circkit", description="Generate, transform, count and simulate circuit families.")
    p.add_argument("algorithm", choices=sorted(REGISTRY), help="circuit family")
    p.add_argument("-f", dest="format", required=True, choices=["gatecount", "counts", "ascii", "simulate"])
    p.add_argument("-o", dest="pipeline", default="none", help="transformer pipeline: none, inline, lower0, "
                   "lower1, base, base-ct")
    p.add_argument("-n", type=int)
    p.add_argument("-k", type=int)
    p.add_argument("-e", help="boolean expression for the oracle family")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--base", default="clifford+t", help=f"base preset for -o base ({', '.join(PRESETS)})")
    return p


def execute(args: argparse.Namespace) -> str:
    alg = REGISTRY[args.algorithm]
    pipeline = _pipeline(args.pipeline, args.base)
    if args.format == "simulate" and alg.program is not None and args.pipeline == "none":
        result = run_interactive(alg.program, args.seed, [k for _, k in alg.circuit(args).inputs])
    elif args.format == "simulate":
        result = run(pipeline(alg.circuit(args)), seed=args.seed)
    else:
        c = pipeline(alg.circuit(args))
        if args.format == "ascii":
            return serialize(c)
        return report(count(c), "table" if args.format == "gatecount" else "machine")
    return "\n".join(result.transcript_lines() + result.state.dump()) + "\n"


def main(argv=None) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
        out = execute(args)
    except UsageError as err:
        parser.print_usage(sys.stderr)
        print(f"circkit: error: {err}", file=sys.stderr)
        return 2
    except (CircuitError, ValueError) as err:
        print(f"circkit: {type(err).__name__}: {err}", file=sys.stderr)
        return 1
    sys.stdout.write(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
