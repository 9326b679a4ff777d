#
# Copyright (c) 2025-2026, The jclosure Authors
#
# SPDX-License-Identifier: BSD 2-Clause License
#

"""Tests for Khovanskii systems and the curve solvers.

Tests cover:
- System and configuration validation
- The evaluated Jacobian and numeric certificates
- Multi-start Newton, including deduplication modulo G at simple and
  multiple roots
- The iterated-j system, its seeds and variable lifting
- Plane curve parsing and evaluation
- Zeros of p(z, e^z) and p(z, j(z)) by box subdivision
"""

import unittest

from jclosure.exceptions import InvalidArgumentError, ParseError
from jclosure.halfplane import HPoint, find_modular_relation, sl2z_equivalent
from jclosure.jpolynomial import jp_parse
from jclosure.khovanskii import (
    KhovanskiiSystem,
    SolveConfig,
    Solution,
    build_iterated_system,
    ec_curve_solve,
    ec_exp_solve,
    iterate_j,
    iterated_seeds,
    jacobian,
    lift_variable,
    newton_solve,
    parse_curve,
    verify_certificate,
)
from jclosure.modular_forms import j_value, jet
from tests.test_helpers import CTX, GENERIC, assert_close, point


class TestKhovanskiiSystem(unittest.TestCase):
    """Test suite for KhovanskiiSystem and SolveConfig."""

    def test_square_check(self):
        with self.assertRaises(InvalidArgumentError):
            KhovanskiiSystem(())
        with self.assertRaises(InvalidArgumentError):
            KhovanskiiSystem.from_strings(["X1 - X2"])

    def test_polys_are_widened(self):
        s = KhovanskiiSystem.from_strings(["X1 - 1", "j(X2) - X1"])
        self.assertEqual([p.nvars for p in s.polys], [2, 2])

    def test_pure_j(self):
        self.assertTrue(KhovanskiiSystem.from_strings(["j(X1)^2 - 1728*j(X1)"]).pure_j)
        self.assertFalse(KhovanskiiSystem.from_strings(["X1*j(X1) - 1"]).pure_j)
        self.assertFalse(KhovanskiiSystem.from_strings(["j([[2,0],[0,1]]*X1) - 1"]).pure_j)

    def test_config_validation(self):
        for kwargs in (
            {"im_min": 0},
            {"re_min": 1, "re_max": 0},
            {"density": 0},
            {"damping": 0},
            {"max_iter": 0},
            {"exp_region": (1.0, 1.0, -1.0, 1.0)},
        ):
            with self.subTest(**kwargs), self.assertRaises(InvalidArgumentError):
                SolveConfig(**kwargs)

    def test_solution_assignment(self):
        solution = Solution((CTX.mpc(0, 2),), CTX.mpf(0), CTX.mpf(1), True)
        self.assertEqual(solution.assignment(), {0: HPoint(CTX.mpc(0, 2))})


class TestCertificates(unittest.TestCase):
    """Test suite for jacobian and verify_certificate."""

    def test_simple_root(self):
        s = KhovanskiiSystem.from_strings(["j(X1) - 287496"])
        self.assertTrue(verify_certificate(s, {0: point("2i")}, CTX))

    def test_singular_root(self):
        s = KhovanskiiSystem.from_strings(["j(X1) - 1728"])
        self.assertFalse(verify_certificate(s, {0: point("i")}, CTX))
        self.assertFalse(jacobian(s, {0: point("i")}, CTX).nonsingular)

    def test_not_a_root(self):
        s = KhovanskiiSystem.from_strings(["j(X1) - 287496"])
        self.assertFalse(verify_certificate(s, {0: point(GENERIC)}, CTX))

    def test_degenerate_third_derivative(self):
        # j″(ρ) = 0, and the Jacobian entry j‴ degenerates there.
        s = KhovanskiiSystem.from_strings(["j2(X1)"])
        self.assertFalse(verify_certificate(s, {0: point("rho")}, CTX))

    def test_jacobian_matrix(self):
        s = KhovanskiiSystem.from_strings(["X1 - 2*X2", "j(X2) - 287496"])
        evaluation = jacobian(s, {0: point("4i"), 1: point("2i")}, CTX)
        derivative = jet(point("2i"), CTX).j1
        assert_close(self, evaluation.matrix[0, 1], -2)
        assert_close(self, evaluation.det, derivative)
        self.assertTrue(evaluation.nonsingular)
        self.assertLessEqual(evaluation.smallest_sv, evaluation.largest_sv)


class TestNewtonSolve(unittest.TestCase):
    """Test suite for newton_solve."""

    def test_finds_orbit_of_classical_point(self):
        s = KhovanskiiSystem.from_strings(["j(X1) - 287496"])
        solutions = newton_solve(s, SolveConfig(max_solutions=1), CTX)
        self.assertEqual(len(solutions), 1)
        solution = solutions[0]
        self.assertTrue(solution.nonsingular)
        self.assertLessEqual(solution.residual, CTX.tol)
        self.assertTrue(sl2z_equivalent(HPoint(solution.points[0]), point("2i"), CTX))

    def test_start_with_wrong_arity(self):
        s = KhovanskiiSystem.from_strings(["j(X1) - 287496"])
        with self.assertRaises(InvalidArgumentError):
            newton_solve(s, SolveConfig(extra_starts=((1j, 2j),)), CTX)

    def test_iterated_fixed_points(self):
        s = build_iterated_system(1, 0)
        seeds = iterated_seeds(1, 0, CTX)
        self.assertTrue(seeds)
        cfg = SolveConfig(extra_starts=tuple(seeds), density=1, max_starts=1)
        solutions = newton_solve(s, cfg, CTX)
        self.assertTrue(solutions)
        for solution in solutions:
            z = solution.points[0]
            assert_close(self, iterate_j(z, 1, CTX), z, 1e-18)
            self.assertTrue(solution.nonsingular)


class TestNewtonDeduplication(unittest.TestCase):
    """Test suite for newton_solve on single equations in j(X1)."""

    ROOTS = (
        ("j(X1) - 287496", "2i", True),
        ("j(X1) - 1728", "i", False),
        ("j(X1)", "rho", False),
    )

    def test_one_solution_per_orbit(self):
        loose = CTX.mp.ldexp(1, -(CTX.bits // 8))
        for equation, root, simple in self.ROOTS:
            with self.subTest(equation=equation):
                solutions = newton_solve(KhovanskiiSystem.from_strings([equation]), SolveConfig(), CTX)
                points = [HPoint(s.points[0]) for s in solutions]
                related = [
                    (a, b)
                    for a in range(len(points))
                    for b in range(a + 1, len(points))
                    if find_modular_relation(points[a], points[b], CTX, loose) is not None
                ]
                self.assertEqual(related, [])
                self.assertEqual(len(solutions), 1)
                self.assertTrue(sl2z_equivalent(points[0], point(root), CTX, loose))
                self.assertEqual(solutions[0].nonsingular, simple)


class TestIteratedSystem(unittest.TestCase):
    """Test suite for build_iterated_system, iterate_j and lift_variable."""

    def test_shape(self):
        s = build_iterated_system(3, 5)
        self.assertEqual(s.n, 3)
        self.assertEqual(s.polys[0], jp_parse("X1 - j(X3) - 5"))
        self.assertEqual(s.polys[1], jp_parse("X2 - j(X1)"))
        self.assertEqual(s.polys[2], jp_parse("X3 - j(X2)"))

    def test_constants(self):
        s = build_iterated_system(1, CTX.mpf("0.5"), CTX)
        self.assertEqual(s.polys[0], jp_parse("X1 - j(X1) - 1/2"))
        with self.assertRaises(InvalidArgumentError):
            build_iterated_system(1, 0.5)
        with self.assertRaises(InvalidArgumentError):
            build_iterated_system(0, 1)

    def test_iterate_j(self):
        z = point(GENERIC).value
        self.assertEqual(iterate_j(z, 0, CTX), z)
        assert_close(self, iterate_j(z, 1, CTX), j_value(point(GENERIC), CTX))

    def test_lift_variable(self):
        s = build_iterated_system(1, 0)
        lifted = lift_variable(s, 0)
        self.assertEqual(lifted.n, 2)
        self.assertEqual(lifted.polys[1], jp_parse("j(X2) - X1"))
        with self.assertRaises(InvalidArgumentError):
            lift_variable(s, 1)


class TestCurves(unittest.TestCase):
    """Test suite for parse_curve and CurveSpec."""

    def test_parse(self):
        self.assertEqual(str(parse_curve("X*Y - 1")), "X*Y - 1")

    def test_rejections(self):
        with self.assertRaises(InvalidArgumentError):
            parse_curve("X^2 - 1")
        with self.assertRaises(ParseError):
            parse_curve("j(X) - Y")
        with self.assertRaises(ParseError):
            parse_curve("X*Z")

    def test_horizontal_lines_are_accepted(self):
        self.assertEqual(parse_curve("Y - 2").p.variables(), {1})

    def test_evaluate(self):
        value, dx, dy, scale = parse_curve("X*Y - 1").evaluate(2, 3, CTX)
        self.assertEqual((value, dx, dy, scale), (5, 3, 2, 7))


class TestCurveSolvers(unittest.TestCase):
    """Test suite for ec_exp_solve and ec_curve_solve."""

    def test_exp_omega_constant(self):
        solutions = ec_exp_solve(parse_curve("X*Y - 1"), SolveConfig(), CTX)
        self.assertEqual(len(solutions), 1)
        assert_close(self, solutions[0].points[0], CTX.mp.lambertw(1), 1e-20)
        self.assertTrue(solutions[0].nonsingular)
        self.assertEqual(solutions[0].multiplicity, 1)

    def test_exp_fixed_points(self):
        solutions = ec_exp_solve(parse_curve("Y - X"), SolveConfig(), CTX)
        self.assertEqual(len(solutions), 2)
        expected = -CTX.mp.lambertw(-1)
        found = sorted((s.points[0] for s in solutions), key=lambda z: z.imag)
        assert_close(self, found[0], expected.conjugate() if expected.imag > 0 else expected, 1e-20)
        assert_close(self, found[1], expected if expected.imag > 0 else expected.conjugate(), 1e-20)

    def test_exp_horizontal_line(self):
        solutions = ec_exp_solve(parse_curve("Y - 2"), SolveConfig(), CTX)
        self.assertEqual(len(solutions), 1)
        assert_close(self, solutions[0].points[0], CTX.mp.log(2), 1e-20)

    def test_j_curve(self):
        cfg = SolveConfig(re_min=-0.2, re_max=0.2, im_min=1.8, im_max=2.2)
        solutions = ec_curve_solve(parse_curve("Y - 287496"), cfg, CTX)
        self.assertEqual(len(solutions), 1)
        assert_close(self, solutions[0].points[0], CTX.mpc(0, 2), 1e-20)
        self.assertTrue(solutions[0].nonsingular)


if __name__ == "__main__":
    unittest.main()
