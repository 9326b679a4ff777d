#
# Copyright (c) 2025-2026, The jclosure Authors
#
# SPDX-License-Identifier: BSD 2-Clause License
#

"""Command-line interface.

This module provides the ``jclosure`` command. It supports:

- Global precision flags mapped onto a PrecisionContext
- A CommandManager registry dispatching subcommands to handlers
- Deterministic JSON on stdout, decimal strings for every number
- Errors as JSON on stderr with exit code 1 (computation) or 2 (usage)

Commands:

- eval, reduce, special: the j-jet, fundamental-domain reduction, CM test
- phi compute|eval|export|import: modular polynomials and their cache file
- indep, dimg: modular independence of j-values and orbit dimension
- solve khovanskii|curve|exp-curve: the Newton and box solvers
- iterj: the iterated system z = j_n(z) + a
- config FILE validate|xi|delta|ssclosure|submodular: closure geometry
- selftest: the acceptance suite
"""

import argparse
import sys
from collections.abc import Callable
from typing import Any

from loguru import logger

from jclosure.closure_geometry import (
    check_submodular,
    config_validate,
    delta,
    dim_delta,
    orbit_blocks,
    self_sufficient,
    ss_closure,
    xi_dim,
)
from jclosure.exceptions import (
    CommandError,
    InvalidArgumentError,
    JClosureError,
    ParseError,
    ValidationError,
)
from jclosure.numerics import PrecisionContext
from jclosure.serialization import JsonAdapter, dumps
from jclosure.workbench import Workbench

CommandHandler = Callable[[argparse.Namespace, Workbench, JsonAdapter], dict]

EXIT_OK = 0
EXIT_COMPUTATION = 1
EXIT_USAGE = 2


class _Parser(argparse.ArgumentParser):
    """Argument parser that reports errors as exceptions instead of exiting."""

    def error(self, message: str):
        raise CommandError(message)


class CommandManager:
    """Registry of command handlers.

    Handlers take the parsed arguments, the session workbench and the JSON
    adapter, and return the document to print. Built-in commands are registered
    on construction; more can be added with register_command().
    """

    def __init__(self):
        """Initialize the manager with the built-in commands."""
        self._handlers: dict[str, CommandHandler] = {}

        self.register_command("eval", _handle_eval)
        self.register_command("reduce", _handle_reduce)
        self.register_command("special", _handle_special)
        self.register_command("phi compute", _handle_phi_compute)
        self.register_command("phi eval", _handle_phi_eval)
        self.register_command("phi export", _handle_phi_export)
        self.register_command("phi import", _handle_phi_import)
        self.register_command("indep", _handle_indep)
        self.register_command("dimg", _handle_dimg)
        self.register_command("solve khovanskii", _handle_solve_khovanskii)
        self.register_command("solve curve", _handle_solve_curve)
        self.register_command("solve exp-curve", _handle_solve_exp_curve)
        self.register_command("iterj", _handle_iterj)
        self.register_command("config", _handle_config)
        self.register_command("selftest", _handle_selftest)

    @property
    def commands(self) -> list[str]:
        """Registered command names."""
        return sorted(self._handlers)

    def register_command(self, name: str, handler: CommandHandler) -> None:
        """Register a handler for a command name such as ``"phi eval"``.

        Raises:
            CommandError: If the handler is not callable.
        """
        if not callable(handler):
            raise CommandError("Command handler must be callable")
        self._handlers[name] = handler
        logger.debug(f"Registered handler for command: {name}")

    def execute(self, args: argparse.Namespace, bench: Workbench) -> dict:
        """Run the handler selected by the parsed arguments.

        Raises:
            CommandError: If no handler is registered for the command.
        """
        name = args.command
        if getattr(args, "subcommand", None):
            name = f"{name} {args.subcommand}"
        handler = self._handlers.get(name)
        if not handler:
            raise CommandError(f"No handler registered for command: {name}")
        return handler(args, bench, JsonAdapter(bench.ctx))


# Handlers


def _handle_eval(args, bench: Workbench, adapter: JsonAdapter) -> dict:
    z = bench.point(args.z)
    return adapter.format_jet(z, bench.evaluate(z))


def _handle_reduce(args, bench: Workbench, adapter: JsonAdapter) -> dict:
    z = bench.point(args.z)
    reduced, gamma = bench.reduce(z)
    return adapter.format_reduction(z, reduced, gamma)


def _handle_special(args, bench: Workbench, adapter: JsonAdapter) -> dict:
    z = bench.point(args.z)
    quadratic = bench.special(z)
    return {
        "z": adapter.complex(z.value),
        "special": quadratic is not None,
        "quadratic": list(quadratic) if quadratic else None,
    }


def _handle_phi_compute(args, bench: Workbench, adapter: JsonAdapter) -> dict:
    return adapter.format_polynomial(bench.phi(args.level))


def _handle_phi_eval(args, bench: Workbench, adapter: JsonAdapter) -> dict:
    return {"level": args.level, "value": adapter.complex(bench.phi_eval(args.level, args.x, args.y))}


def _handle_phi_export(args, bench: Workbench, adapter: JsonAdapter) -> dict:
    for level in args.levels or []:
        bench.phi(level)
    return {"path": args.path, "levels": bench.export_phi(args.path)}


def _handle_phi_import(args, bench: Workbench, adapter: JsonAdapter) -> dict:
    return {"path": args.path, "levels": bench.import_phi(args.path)}


def _handle_indep(args, bench: Workbench, adapter: JsonAdapter) -> dict:
    independent, level = bench.independent(args.x, args.y)
    return {"independent": independent, "level": level, "nmax": bench.ctx.nmax}


def _handle_dimg(args, bench: Workbench, adapter: JsonAdapter) -> dict:
    dimension, partition = bench.orbit_dimension(args.points, args.base)
    return {
        "dim_g": dimension,
        "blocks": [[k + 1 for k in block] for block in partition.blocks],
        "witnesses": [
            {"i": i + 1, "k": k + 1, "g": adapter.matrix(g), "level": level}
            for (i, k), (g, level) in sorted(partition.witnesses.items())
        ],
    }


def _solver_overrides(args) -> dict[str, Any]:
    names = ("density", "im_min", "im_max", "max_starts", "max_iter", "max_solutions")
    overrides = {name: getattr(args, name) for name in names if getattr(args, name, None) is not None}
    if getattr(args, "region", None):
        overrides["exp_region"] = tuple(args.region)
    return overrides


def _format_solutions(solutions, adapter: JsonAdapter, certificates=None) -> list[dict]:
    flags = certificates or [None] * len(solutions)
    return [adapter.format_solution(s, c) for s, c in zip(solutions, flags)]


def _handle_solve_khovanskii(args, bench: Workbench, adapter: JsonAdapter) -> dict:
    system, starts = bench.load_system(args.path)
    overrides = _solver_overrides(args)
    if starts:
        overrides["extra_starts"] = tuple(starts)
    solutions, certificates = bench.solve_system(system, **overrides)
    return {
        "system": str(system),
        "solutions": _format_solutions(solutions, adapter, certificates),
        "certified": sum(certificates),
    }


def _handle_solve_curve(args, bench: Workbench, adapter: JsonAdapter) -> dict:
    solutions = bench.solve_curve(args.polynomial, **_solver_overrides(args))
    return {"curve": args.polynomial, "solutions": _format_solutions(solutions, adapter)}


def _handle_solve_exp_curve(args, bench: Workbench, adapter: JsonAdapter) -> dict:
    solutions = bench.solve_exp_curve(args.polynomial, **_solver_overrides(args))
    return {"curve": args.polynomial, "solutions": _format_solutions(solutions, adapter)}


def _handle_iterj(args, bench: Workbench, adapter: JsonAdapter) -> dict:
    system, solutions, certificates, scalar = bench.iterated(
        args.n, args.a, **_solver_overrides(args)
    )
    documents = _format_solutions(solutions, adapter, certificates)
    for document, residual in zip(documents, scalar):
        document["scalar_residual"] = adapter.real(residual)
    return {
        "n": args.n,
        "a": args.a,
        "system": str(system),
        "solutions": documents,
        "certified": sum(certificates),
    }


def _parse_blocks(text: str | None) -> list[int]:
    if not text:
        return []
    try:
        return [int(part) - 1 for part in text.split(",") if part.strip()]
    except ValueError as e:
        raise CommandError(f"--blocks expects comma-separated block numbers, got {text!r}") from e


def _handle_config(args, bench: Workbench, adapter: JsonAdapter) -> dict:
    c = bench.configuration(args.path)
    ctx = bench.ctx
    match args.action:
        case "validate":
            return adapter.format_validation(config_validate(c, ctx, bench.phi_cache))
        case "xi":
            return adapter.format_xi(xi_dim(c, ctx))
        case "delta":
            return adapter.format_delta(delta(c, ctx))
        case "ssclosure":
            chosen = _parse_blocks(args.blocks)
            closure, report = ss_closure(chosen, c, ctx)
            return {
                "blocks": [[k + 1 for k in block] for block in orbit_blocks(c)],
                "from": [b + 1 for b in chosen],
                "closure": [b + 1 for b in closure],
                "report": adapter.format_delta(report),
                "dim_delta": dim_delta(chosen, c, ctx),
                "self_sufficient": self_sufficient(chosen, c, ctx),
            }
        case "submodular":
            if not args.other:
                raise CommandError("config submodular needs --other FILE")
            other = bench.configuration(args.other)
            return adapter.format_submodular(check_submodular(c, other, ctx))
    raise CommandError(f"unknown config action {args.action!r}")


def _handle_selftest(args, bench: Workbench, adapter: JsonAdapter) -> dict:
    from jclosure.selftest import run_selftest

    return run_selftest(bench, quick=args.quick)


# Parser


def _add_solver_flags(parser: argparse.ArgumentParser, *, strip: bool = True) -> None:
    if strip:
        parser.add_argument("--im-min", type=float, help="Lower bound of Im z")
        parser.add_argument("--im-max", type=float, help="Upper bound of Im z")
    parser.add_argument("--density", type=int, help="Grid points per axis per variable")
    parser.add_argument("--max-starts", type=int, help="Cap on Newton start tuples")
    parser.add_argument("--max-iter", type=int, help="Newton iteration cap")
    parser.add_argument("--max-solutions", type=int, help="Stop after this many solutions")


def build_parser() -> argparse.ArgumentParser:
    """Build the argument parser for every command."""
    parser = _Parser(prog="jclosure", description=__doc__.splitlines()[0])
    parser.add_argument("--prec", type=int, default=256, help="Working precision in bits")
    parser.add_argument("--tol", help="Comparison tolerance (default 2^-(prec/2))")
    parser.add_argument("--nmax", type=int, default=8, help="Largest Φ_N level searched")
    parser.add_argument("--height", type=int, default=10**6, help="Integer relation height bound")
    parser.add_argument("--seed", type=int, default=0, help="Seed for start sampling")
    parser.add_argument("--phi-cache", help="Φ_N cache file")
    parser.add_argument(
        "--json", action=argparse.BooleanOptionalAction, default=True, help="Emit JSON"
    )
    parser.add_argument("--verbose", action="store_true", help="Log debug output to stderr")

    commands = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    for name, text in (
        ("eval", "j and its first three derivatives"),
        ("reduce", "Reduce into the fundamental domain"),
        ("special", "Special (CM) point test"),
    ):
        sub = commands.add_parser(name, help=text)
        sub.add_argument("z", help="Point, e.g. '0.3+1.2i' or '(1+sqrt(-3))/2'")

    phi = commands.add_parser("phi", help="Modular polynomials")
    phi_commands = phi.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)
    compute = phi_commands.add_parser("compute", help="Compute Φ_N")
    compute.add_argument("level", type=int)
    evaluate = phi_commands.add_parser("eval", help="Evaluate Φ_N(x, y)")
    evaluate.add_argument("level", type=int)
    evaluate.add_argument("x")
    evaluate.add_argument("y")
    export = phi_commands.add_parser("export", help="Write the Φ cache")
    export.add_argument("path")
    export.add_argument("--levels", type=int, nargs="*", help="Levels to compute first")
    load = phi_commands.add_parser("import", help="Read a Φ cache file")
    load.add_argument("path")

    indep = commands.add_parser("indep", help="Modular independence of two j-values")
    indep.add_argument("x")
    indep.add_argument("y")

    dimg = commands.add_parser("dimg", help="Orbit dimension dim_G(points | base)")
    dimg.add_argument("points", nargs="+")
    dimg.add_argument("--base", nargs="*", default=[])

    solve = commands.add_parser("solve", help="Khovanskii and curve solvers")
    solve_commands = solve.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)
    system = solve_commands.add_parser("khovanskii", help="Solve a system file")
    system.add_argument("path")
    _add_solver_flags(system)
    curve = solve_commands.add_parser("curve", help="Find (z, j(z)) on p(X, Y) = 0")
    curve.add_argument("polynomial")
    _add_solver_flags(curve)
    exp_curve = solve_commands.add_parser("exp-curve", help="Find (z, e^z) on p(X, Y) = 0")
    exp_curve.add_argument("polynomial")
    exp_curve.add_argument("--region", type=float, nargs=4, metavar=("RE0", "RE1", "IM0", "IM1"))
    _add_solver_flags(exp_curve, strip=False)

    iterj = commands.add_parser("iterj", help="Solve z = j_n(z) + a")
    iterj.add_argument("n", type=int)
    iterj.add_argument("a")
    _add_solver_flags(iterj)

    config = commands.add_parser("config", help="Closure geometry of a configuration file")
    config.add_argument("path")
    config.add_argument("action", choices=["validate", "xi", "delta", "ssclosure", "submodular"])
    config.add_argument("--blocks", help="Comma-separated orbit block numbers (ssclosure)")
    config.add_argument("--other", help="Second configuration file (submodular)")

    selftest = commands.add_parser("selftest", help="Run the acceptance suite")
    selftest.add_argument("--quick", action="store_true", help="Smaller randomized samples")

    return parser


def _render_text(document: dict) -> str:
    return "".join(f"{key}: {document[key]}\n" for key in sorted(document))


def _report_error(error: Exception, code: int) -> int:
    document: dict[str, Any] = {"error": type(error).__name__, "message": str(error)}
    if isinstance(error, ValidationError):
        document["violations"] = error.violations
    logger.error(f"{type(error).__name__}: {error}")
    sys.stderr.write(dumps(document))
    return code


def main(argv: list[str] | None = None) -> int:
    """Run the command line and return the exit code."""
    try:
        args = build_parser().parse_args(argv)
    except CommandError as e:
        return _report_error(e, EXIT_USAGE)

    logger.remove()
    logger.add(sys.stderr, level="DEBUG" if args.verbose else "WARNING")

    try:
        ctx = PrecisionContext(bits=args.prec, tol=args.tol, height_bound=args.height, nmax=args.nmax)
        bench = Workbench(ctx, phi_cache=args.phi_cache, seed=args.seed)
    except (InvalidArgumentError, ValueError, ParseError) as e:
        return _report_error(CommandError(f"invalid global flags: {e}"), EXIT_USAGE)

    try:
        document = CommandManager().execute(args, bench)
    except (CommandError, ParseError, OSError) as e:
        return _report_error(e, EXIT_USAGE)
    except JClosureError as e:
        return _report_error(e, EXIT_COMPUTATION)

    sys.stdout.write(dumps(document) if args.json else _render_text(document))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
