#
# Copyright (c) 2025-2026, The jclosure Authors
#
# SPDX-License-Identifier: BSD 2-Clause License
#

"""Tests for the jclosure command line.

Tests cover:
- CommandManager registration and dispatch
- Point, Φ_N and orbit commands
- Solver commands
- Configuration actions, including 1-based block numbers
- Exit codes and JSON error documents
- Text output
"""

import argparse
import json
import tempfile
import unittest
from pathlib import Path

from jclosure.cli import EXIT_COMPUTATION, EXIT_OK, EXIT_USAGE, CommandManager, build_parser
from jclosure.exceptions import CommandError
from jclosure.khovanskii import build_iterated_system
from jclosure.numerics import parse_complex
from jclosure.workbench import Workbench
from tests.test_helpers import (
    CLOSURE_CONFIGURATION,
    CTX,
    EXAMPLE_CONFIGURATION,
    assert_close,
    error_document,
    run_cli,
    write_json,
)

PREC = ("--prec", "128")


def run_json(*argv: str) -> dict:
    """Run a command that must succeed and return its document."""
    code, out, err = run_cli(*PREC, *argv)
    if code != EXIT_OK:
        raise AssertionError(f"exit {code}: {err}")
    return json.loads(out)


class TestCommandManager(unittest.TestCase):
    """Test suite for CommandManager."""

    def test_builtin_commands(self):
        commands = CommandManager().commands
        for name in ("eval", "phi compute", "solve exp-curve", "config", "selftest"):
            self.assertIn(name, commands)

    def test_register_command(self):
        manager = CommandManager()
        manager.register_command("ping", lambda args, bench, adapter: {"pong": True})
        args = argparse.Namespace(command="ping")
        self.assertEqual(manager.execute(args, Workbench(CTX)), {"pong": True})

    def test_register_non_callable(self):
        with self.assertRaises(CommandError):
            CommandManager().register_command("bad", "not callable")

    def test_unknown_command(self):
        with self.assertRaises(CommandError):
            CommandManager().execute(argparse.Namespace(command="nope"), Workbench(CTX))

    def test_parser_raises_instead_of_exiting(self):
        with self.assertRaises(CommandError):
            build_parser().parse_args(["eval"])


class TestPointCommands(unittest.TestCase):
    """Test suite for eval, reduce, special and dimg."""

    def test_eval(self):
        document = run_json("eval", "i")
        self.assertEqual(document["z"], "1.0i")
        assert_close(self, parse_complex(document["j"], CTX), 1728)

    def test_reduce(self):
        document = run_json("reduce", "0.5i")
        self.assertEqual(document["reduced"], "2.0i")
        self.assertEqual(document["gamma"], [["0", "-1"], ["1", "0"]])

    def test_special(self):
        self.assertEqual(run_json("special", "rho")["quadratic"], [1, -1, 1])
        document = run_json("special", "0.3+(pi/3)*i")
        self.assertFalse(document["special"])
        self.assertIsNone(document["quadratic"])

    def test_dimg(self):
        document = run_json("dimg", "2i", "i")
        self.assertEqual(document["dim_g"], 1)
        self.assertEqual(document["blocks"], [[1, 2]])
        self.assertEqual(document["witnesses"][0]["level"], 2)
        self.assertEqual(run_json("dimg", "2i", "i", "--base", "3i")["dim_g"], 0)


class TestPhiCommands(unittest.TestCase):
    """Test suite for the phi and indep commands."""

    def test_compute(self):
        document = run_json("phi", "compute", "2")
        self.assertEqual((document["deg_x"], document["deg_y"]), (3, 3))
        self.assertIn([0, 0, "-157464000000000"], document["terms"])

    def test_eval(self):
        self.assertEqual(run_json("phi", "eval", "2", "1728", "287496")["value"], "0")

    def test_export_and_import(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = str(Path(tmp) / "phi.txt")
            self.assertEqual(run_json("phi", "export", path, "--levels", "2")["levels"], [2])
            self.assertEqual(run_json("phi", "import", path)["levels"], [2])

    def test_cache_flag(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "phi.txt"
            run_json("--phi-cache", str(path), "phi", "compute", "2")
            self.assertTrue(path.read_text().startswith("PHI 2 3 3"))

    def test_indep(self):
        document = run_json("--nmax", "3", "indep", "1728", "287496")
        self.assertEqual(document, {"independent": False, "level": 2, "nmax": 3})

    def test_invalid_level(self):
        code, _, err = run_cli(*PREC, "phi", "compute", "0")
        self.assertEqual(code, EXIT_COMPUTATION)
        self.assertEqual(error_document(err)["error"], "InvalidArgumentError")


class TestSolveCommands(unittest.TestCase):
    """Test suite for the solve and iterj commands."""

    def test_khovanskii(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = write_json(
                tmp, "system.json", {"equations": ["j(X1) - 287496"], "starts": [["0.05+2.1i"]]}
            )
            document = run_json("solve", "khovanskii", path, "--max-solutions", "1")
        self.assertEqual(document["system"], "{j(X1) - 287496}")
        self.assertEqual(document["certified"], 1)
        reduced = parse_complex(document["solutions"][0]["reduced"][0], CTX)
        assert_close(self, reduced, CTX.mpc(0, 2), 1e-20)

    def test_exp_curve(self):
        document = run_json("solve", "exp-curve", "X*Y - 1")
        self.assertEqual(len(document["solutions"]), 1)
        found = parse_complex(document["solutions"][0]["points"][0], CTX)
        assert_close(self, found, CTX.mp.lambertw(1), 1e-20)

    def test_iterj(self):
        document = run_json("iterj", "1", "10", "--max-solutions", "1")
        self.assertEqual(document["system"], str(build_iterated_system(1, 10)))
        self.assertEqual(document["certified"], 1)
        self.assertIn("scalar_residual", document["solutions"][0])


class TestConfigCommands(unittest.TestCase):
    """Test suite for the config command."""

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.example = write_json(self.tmp.name, "example.json", EXAMPLE_CONFIGURATION)
        self.closure = write_json(self.tmp.name, "closure.json", CLOSURE_CONFIGURATION)

    def tearDown(self):
        self.tmp.cleanup()

    def test_validate(self):
        document = run_json("config", self.example, "validate")
        self.assertTrue(document["valid"])
        self.assertEqual(document["degenerate_points"], [2])

    def test_validation_failure(self):
        data = dict(EXAMPLE_CONFIGURATION, relations=["X1 - 3*X2"])
        path = write_json(self.tmp.name, "bad.json", data)
        code, out, err = run_cli(*PREC, "config", path, "validate")
        self.assertEqual(code, EXIT_COMPUTATION)
        self.assertEqual(out, "")
        document = error_document(err)
        self.assertEqual(document["error"], "ValidationError")
        self.assertTrue(document["violations"])

    def test_xi_and_delta(self):
        self.assertEqual(
            run_json("config", self.example, "xi"),
            {"n_generators": 2, "relation_rank": 1, "xi_dim": 1},
        )
        self.assertEqual(
            run_json("config", self.example, "delta"),
            {"trdeg_estimate": 7, "dim_g": 1, "delta": 4},
        )

    def test_ssclosure(self):
        document = run_json("config", self.closure, "ssclosure", "--blocks", "1")
        self.assertEqual(document["blocks"], [[1], [2]])
        self.assertEqual(document["from"], [1])
        self.assertEqual(document["closure"], [1, 2])
        self.assertEqual(document["dim_delta"], -2)
        self.assertFalse(document["self_sufficient"])

    def test_bad_blocks(self):
        code, _, err = run_cli(*PREC, "config", self.closure, "ssclosure", "--blocks", "a")
        self.assertEqual(code, EXIT_USAGE)
        self.assertEqual(error_document(err)["error"], "CommandError")

    def test_submodular(self):
        document = run_json("config", self.closure, "submodular", "--other", self.closure)
        self.assertTrue(document["holds"])
        self.assertEqual(document["delta_union"], document["delta_a"])

    def test_submodular_needs_other(self):
        code, _, _ = run_cli(*PREC, "config", self.closure, "submodular")
        self.assertEqual(code, EXIT_USAGE)

    def test_missing_file(self):
        code, _, err = run_cli(*PREC, "config", f"{self.tmp.name}/absent.json", "xi")
        self.assertEqual(code, EXIT_USAGE)
        self.assertEqual(error_document(err)["error"], "FileNotFoundError")


class TestErrors(unittest.TestCase):
    """Test suite for exit codes and output modes."""

    def test_unknown_command(self):
        code, out, err = run_cli("frobnicate")
        self.assertEqual(code, EXIT_USAGE)
        self.assertEqual(out, "")
        self.assertEqual(error_document(err)["error"], "CommandError")

    def test_bad_flag_value(self):
        code, _, _ = run_cli("--prec", "abc", "eval", "i")
        self.assertEqual(code, EXIT_USAGE)

    def test_precision_below_minimum(self):
        code, _, err = run_cli("--prec", "32", "eval", "i")
        self.assertEqual(code, EXIT_USAGE)
        self.assertIn("invalid global flags", error_document(err)["message"])

    def test_real_point(self):
        code, _, err = run_cli(*PREC, "eval", "3")
        self.assertEqual(code, EXIT_USAGE)
        self.assertEqual(error_document(err)["error"], "ParseError")

    def test_text_output(self):
        code, out, _ = run_cli(*PREC, "--no-json", "special", "i")
        self.assertEqual(code, EXIT_OK)
        self.assertIn("special: True\n", out)
        self.assertIn("quadratic: [1, 0, 1]\n", out)


if __name__ == "__main__":
    unittest.main()
