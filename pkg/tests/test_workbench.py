#
# Copyright (c) 2025-2026, The jclosure Authors
#
# SPDX-License-Identifier: BSD 2-Clause License
#

"""Tests for the Workbench session object.

Tests cover:
- Reading points, values and constants
- Jets, reductions and the special-point test
- The Φ_N store, exact evaluation and the cache file
- Modular independence and orbit dimension
- System files, the solvers and the iterated system
"""

import tempfile
import unittest
from fractions import Fraction
from pathlib import Path

from jclosure.exceptions import InvalidArgumentError, ParseError, UnsupportedLevelError
from jclosure.halfplane import HPoint
from jclosure.workbench import Workbench
from tests.test_helpers import CTX, GENERIC, assert_close, write_json


class TestInputs(unittest.TestCase):
    """Test suite for Workbench input parsing."""

    def setUp(self):
        self.bench = Workbench(CTX)

    def test_defaults(self):
        bench = Workbench()
        self.assertEqual(bench.ctx.bits, 256)
        self.assertEqual(bench.seed, 0)

    def test_point(self):
        z = self.bench.point("2i")
        self.assertIsInstance(z, HPoint)
        self.assertIs(self.bench.point(z), z)
        assert_close(self, z.value, CTX.mpc(0, 2))

    def test_real_point_is_rejected(self):
        with self.assertRaises(ParseError):
            self.bench.point("3")

    def test_constant(self):
        self.assertEqual(self.bench.constant("1/2"), Fraction(1, 2))
        assert_close(self, self.bench.constant("i"), CTX.mpc(0, 1))

    def test_solve_config_uses_seed(self):
        bench = Workbench(CTX, seed=7)
        self.assertEqual(bench.solve_config().seed, 7)
        self.assertEqual(bench.solve_config(seed=3).seed, 3)


class TestPoints(unittest.TestCase):
    """Test suite for evaluate, reduce and special."""

    def setUp(self):
        self.bench = Workbench(CTX)

    def test_evaluate(self):
        assert_close(self, self.bench.evaluate("i").j, 1728)

    def test_reduce(self):
        reduced, gamma = self.bench.reduce("0.5i")
        assert_close(self, reduced.value, CTX.mpc(0, 2))
        self.assertEqual(gamma.rows(), [[0, -1], [1, 0]])

    def test_special(self):
        self.assertEqual(self.bench.special("i"), (1, 0, 1))
        self.assertIsNone(self.bench.special(GENERIC))


class TestModularPolynomials(unittest.TestCase):
    """Test suite for the Φ_N operations."""

    def setUp(self):
        self.bench = Workbench(CTX, level_ceiling=3)

    def test_phi(self):
        self.assertEqual(self.bench.phi(1).coeffs, {(1, 0): 1, (0, 1): -1})
        with self.assertRaises(InvalidArgumentError):
            self.bench.phi(0)
        with self.assertRaises(UnsupportedLevelError):
            self.bench.phi(4)

    def test_phi_eval(self):
        self.assertEqual(self.bench.phi_eval(2, "1728", "287496"), 0)
        value = self.bench.phi_eval(1, "i", "1")
        assert_close(self, value, CTX.mpc(-1, 1))

    def test_export_and_import(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "phi.txt"
            self.bench.phi(2)
            self.assertEqual(self.bench.export_phi(path), [2])
            other = Workbench(CTX, level_ceiling=0)
            self.assertEqual(other.import_phi(path), [2])
            self.assertEqual(other.phi(2).coeffs, self.bench.phi(2).coeffs)

    def test_cache_file(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "phi.txt"
            Workbench(CTX, phi_cache=path).phi(2)
            reloaded = Workbench(CTX, phi_cache=path, level_ceiling=1)
            self.assertEqual(reloaded.phi(2).level, 2)

    def test_independent(self):
        self.assertEqual(self.bench.independent("1728", "287496"), (False, 2))

    def test_orbit_dimension(self):
        dimension, partition = self.bench.orbit_dimension(["2i", "i", GENERIC])
        self.assertEqual(dimension, 2)
        self.assertEqual(partition.blocks, ((0, 1), (2,)))
        dimension, _ = self.bench.orbit_dimension(["2i", "i"], base=["3i"])
        self.assertEqual(dimension, 0)


class TestSolvers(unittest.TestCase):
    """Test suite for the solver operations."""

    def setUp(self):
        self.bench = Workbench(CTX)

    def test_load_system(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = write_json(
                tmp, "system.json", {"equations": ["j(X1) - 287496"], "starts": [["0.1+2.1i"]]}
            )
            system, starts = self.bench.load_system(path)
            self.assertEqual(system.n, 1)
            self.assertEqual(len(starts), 1)
            assert_close(self, starts[0][0], CTX.mpc("0.1", "2.1"))

    def test_load_system_errors(self):
        with tempfile.TemporaryDirectory() as tmp:
            with self.assertRaises(ParseError):
                self.bench.load_system(write_json(tmp, "empty.json", {"starts": []}))
            broken = Path(tmp) / "broken.json"
            broken.write_text("[")
            with self.assertRaises(ParseError):
                self.bench.load_system(broken)

    def test_solve_system(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = write_json(tmp, "system.json", {"equations": ["j(X1) - 287496"]})
            system, _ = self.bench.load_system(path)
        solutions, certificates = self.bench.solve_system(
            system, extra_starts=((CTX.mpc("0.05", "2.1"),),), max_solutions=1
        )
        self.assertEqual(len(solutions), 1)
        self.assertEqual(certificates, [True])

    def test_solve_curve(self):
        solutions = self.bench.solve_curve(
            "Y - 287496", re_min=-0.2, re_max=0.2, im_min=1.8, im_max=2.2
        )
        self.assertEqual(len(solutions), 1)
        assert_close(self, solutions[0].points[0], CTX.mpc(0, 2), 1e-20)

    def test_solve_exp_curve(self):
        solutions = self.bench.solve_exp_curve("X*Y - 1")
        self.assertEqual(len(solutions), 1)
        assert_close(self, solutions[0].points[0], CTX.mp.lambertw(1), 1e-20)

    def test_iterated(self):
        system, solutions, certificates, scalar = self.bench.iterated(1, "10", max_solutions=1)
        self.assertEqual(system.n, 1)
        self.assertEqual(len(solutions), 1)
        self.assertTrue(certificates[0])
        self.assertLess(scalar[0], 1e-18)


if __name__ == "__main__":
    unittest.main()
