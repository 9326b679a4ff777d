#
# Copyright (c) 2025-2026, The jclosure Authors
#
# SPDX-License-Identifier: BSD 2-Clause License
#

"""Tests for the precision context, relation search and expression parsing.

Tests cover:
- PrecisionContext validation and tolerance derivation
- Integer relations among reals and complex values
- Minimal polynomial recognition
- The point expression parser
"""

import unittest

from jclosure.exceptions import InvalidArgumentError, ParseError
from jclosure.numerics import (
    PrecisionContext,
    complex_relation,
    integer_relation,
    min_poly_guess,
    parse_complex,
)
from tests.test_helpers import CTX, assert_close


class TestPrecisionContext(unittest.TestCase):
    """Test suite for PrecisionContext."""

    def test_defaults(self):
        ctx = PrecisionContext()
        self.assertEqual(ctx.bits, 256)
        self.assertEqual(ctx.tol, ctx.mp.ldexp(1, -128))
        self.assertEqual(ctx.nmax, 8)
        self.assertEqual(ctx.height_bound, 10**6)
        self.assertGreaterEqual(ctx.dps, 75)

    def test_invalid_fields(self):
        with self.assertRaises(InvalidArgumentError):
            PrecisionContext(bits=32)
        with self.assertRaises(InvalidArgumentError):
            PrecisionContext(tol=2)
        with self.assertRaises(InvalidArgumentError):
            PrecisionContext(height_bound=0)
        with self.assertRaises(InvalidArgumentError):
            PrecisionContext(nmax=0)

    def test_with_bits_rederives_tolerance(self):
        wider = CTX.with_bits(256)
        self.assertEqual(wider.bits, 256)
        self.assertEqual(wider.tol, wider.mp.ldexp(1, -128))

    def test_with_bits_keeps_explicit_tolerance(self):
        ctx = PrecisionContext(bits=128, tol="1e-20")
        wider = ctx.with_bits(256)
        self.assertEqual(wider.tol, ctx.tol)
        self.assertFalse(wider.tol_derived)

    def test_contexts_are_independent(self):
        PrecisionContext(bits=512)
        self.assertEqual(CTX.mp.prec, 128)


class TestIntegerRelation(unittest.TestCase):
    """Test suite for integer_relation and complex_relation."""

    def test_golden_ratio(self):
        M = CTX.mp
        phi = (1 + M.sqrt(5)) / 2
        relation = integer_relation([1, phi, phi**2], CTX)
        self.assertIsNotNone(relation)
        self.assertEqual(relation.coeffs, (1, 1, -1))
        self.assertEqual(relation.height, 1)

    def test_no_relation_within_bound(self):
        self.assertIsNone(integer_relation([1, CTX.mp.pi], CTX))

    def test_zero_entry_gives_unit_relation(self):
        relation = integer_relation([0, 1], CTX)
        self.assertEqual(relation.coeffs, (1, 0))

    def test_invalid_input(self):
        with self.assertRaises(InvalidArgumentError):
            integer_relation([], CTX)
        with self.assertRaises(InvalidArgumentError):
            integer_relation([1, CTX.mp.inf], CTX)

    def test_complex_relation(self):
        M = CTX.mp
        relation = complex_relation([M.mpc(0, 1), M.mpc(1, 1), 1], CTX)
        self.assertIsNotNone(relation)
        self.assertEqual(relation.coeffs, (1, -1, 1))


class TestMinPolyGuess(unittest.TestCase):
    """Test suite for min_poly_guess."""

    def test_square_root(self):
        self.assertEqual(min_poly_guess(CTX.mp.sqrt(2), 4, CTX), (1, 0, -2))

    def test_rho(self):
        rho = parse_complex("rho", CTX)
        self.assertEqual(min_poly_guess(rho, 2, CTX), (1, -1, 1))

    def test_integer(self):
        self.assertEqual(min_poly_guess(1728, 2, CTX), (1, -1728))

    def test_transcendental(self):
        self.assertIsNone(min_poly_guess(CTX.mp.pi, 2, CTX))

    def test_degree_bound(self):
        with self.assertRaises(InvalidArgumentError):
            min_poly_guess(2, 0, CTX)


class TestParseComplex(unittest.TestCase):
    """Test suite for parse_complex."""

    def test_suffix_form(self):
        assert_close(self, parse_complex("0.3+1.2i", CTX), CTX.mpc("0.3", "1.2"))
        assert_close(self, parse_complex("2i", CTX), CTX.mpc(0, 2))
        assert_close(self, parse_complex("-i", CTX), CTX.mpc(0, -1))

    def test_closed_forms(self):
        M = CTX.mp
        assert_close(self, parse_complex("(1+sqrt(-3))/2", CTX), parse_complex("rho", CTX))
        assert_close(self, parse_complex("rho", CTX), M.expjpi(M.mpf(1) / 3))
        assert_close(self, parse_complex("i*sqrt(2)", CTX), M.mpc(0, M.sqrt(2)))
        assert_close(self, parse_complex("2^3", CTX), 8)

    def test_full_precision_literals(self):
        value = parse_complex("0.1", CTX)
        self.assertEqual(value.real, CTX.mpf("0.1"))

    def test_rejects_other_text(self):
        for text in ("foo", "1+", "__import__('os')", "True", "x[0]"):
            with self.subTest(text=text), self.assertRaises(ParseError):
                parse_complex(text, CTX)


if __name__ == "__main__":
    unittest.main()
