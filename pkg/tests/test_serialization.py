#
# Copyright (c) 2025-2026, The jclosure Authors
#
# SPDX-License-Identifier: BSD 2-Clause License
#

"""Tests for the JSON adapter.

Tests cover:
- Decimal formatting of reals and complex numbers
- Matrices, jets, reductions and modular polynomials
- Solutions with fundamental-domain representatives
- Closure-geometry reports
- Deterministic dumps
"""

import json
import unittest

from jclosure.closure_geometry import DeltaReport, SubmodularityReport, XiReport, config_validate
from jclosure.halfplane import GL2Q, reduce_fundamental
from jclosure.khovanskii import Solution
from jclosure.modular_forms import jet
from jclosure.modular_polynomials import ModularPolynomial
from jclosure.numerics import parse_complex
from jclosure.serialization import JsonAdapter, dumps
from tests.test_helpers import CTX, EXAMPLE_CONFIGURATION, GENERIC, assert_close, configuration, point


class TestNumberFormatting(unittest.TestCase):
    """Test suite for JsonAdapter.real and JsonAdapter.complex."""

    def setUp(self):
        self.adapter = JsonAdapter(CTX, digits=10)

    def test_real(self):
        self.assertEqual(self.adapter.real(0), "0")
        self.assertEqual(self.adapter.real(CTX.mpf("1.5")), "1.5")

    def test_complex(self):
        self.assertEqual(self.adapter.complex(CTX.mpc("0.5", -2)), "0.5-2.0i")
        self.assertEqual(self.adapter.complex(CTX.mpc(0, 1)), "1.0i")
        self.assertEqual(self.adapter.complex(CTX.mpc(0, -1)), "-1.0i")
        self.assertEqual(self.adapter.complex(3), "3.0")

    def test_full_precision_is_readable(self):
        z = point(GENERIC).value
        text = JsonAdapter(CTX).complex(z)
        assert_close(self, parse_complex(text, CTX), z, 1e-30)

    def test_matrix(self):
        g = GL2Q.from_rows([["1/2", 0], [0, 1]])
        self.assertEqual(self.adapter.matrix(g), [["1/2", "0"], ["0", "1"]])


class TestDocuments(unittest.TestCase):
    """Test suite for the structured formatters."""

    def setUp(self):
        self.adapter = JsonAdapter(CTX, digits=10)

    def test_jet(self):
        z = point("2i")
        document = self.adapter.format_jet(z, jet(z, CTX))
        self.assertEqual(sorted(document), ["j", "j1", "j2", "j3", "z"])
        self.assertEqual(document["z"], "2.0i")
        assert_close(self, parse_complex(document["j"], CTX), 287496)

    def test_reduction(self):
        z = point("0.5i")
        reduced, gamma = reduce_fundamental(z, CTX)
        document = self.adapter.format_reduction(z, reduced, gamma)
        self.assertEqual(document["reduced"], "2.0i")
        self.assertEqual(document["gamma"], [["0", "-1"], ["1", "0"]])

    def test_polynomial(self):
        phi = ModularPolynomial(1, {(1, 0): 1, (0, 1): -1})
        self.assertEqual(
            self.adapter.format_polynomial(phi),
            {"level": 1, "deg_x": 1, "deg_y": 1, "terms": [[0, 1, "-1"], [1, 0, "1"]]},
        )

    def test_solution(self):
        solution = Solution(
            (CTX.mpc("2.25", 2), CTX.mpc(0, -1)), CTX.mpf(0), CTX.mpf(2), True, multiplicity=1
        )
        document = self.adapter.format_solution(solution, certified=True)
        self.assertEqual(document["points"], ["2.25+2.0i", "-1.0i"])
        self.assertEqual(document["reduced"], ["0.25+2.0i", None])
        self.assertEqual(document["residual"], "0")
        self.assertTrue(document["certified"])
        self.assertNotIn("certified", self.adapter.format_solution(solution))

    def test_validation(self):
        report = config_validate(configuration(EXAMPLE_CONFIGURATION), CTX)
        document = self.adapter.format_validation(report)
        self.assertTrue(document["valid"])
        self.assertEqual(document["degenerate_points"], [2])
        self.assertEqual(document["flags"], [])
        self.assertEqual(len(document["modular_residuals"][0]), 3)

    def test_reports(self):
        self.assertEqual(
            self.adapter.format_xi(XiReport(n_generators=2, relation_rank=1, xi_dim=1)),
            {"n_generators": 2, "relation_rank": 1, "xi_dim": 1},
        )
        self.assertEqual(
            self.adapter.format_delta(DeltaReport(trdeg_estimate=7, dim_g=1, delta=4)),
            {"trdeg_estimate": 7, "dim_g": 1, "delta": 4},
        )
        document = self.adapter.format_submodular(SubmodularityReport(2, 0, 1, 1))
        self.assertEqual(document["delta_union"], 2)
        self.assertTrue(document["holds"])


class TestDumps(unittest.TestCase):
    """Test suite for dumps."""

    def test_sorted_and_terminated(self):
        text = dumps({"b": 1, "a": "ρ"})
        self.assertTrue(text.endswith("}\n"))
        self.assertLess(text.index('"a"'), text.index('"b"'))
        self.assertIn("ρ", text)
        self.assertEqual(json.loads(text), {"a": "ρ", "b": 1})


if __name__ == "__main__":
    unittest.main()
