#
# Copyright (c) 2025-2026, The jclosure Authors
#
# SPDX-License-Identifier: BSD 2-Clause License
#

"""Tests for configurations and predimension geometry.

Tests cover:
- Reading configurations from dictionaries and files
- Validation of relations, modular claims, basis and special points
- xi_dim, trdeg_estimate and coordinate_rank
- Orbit blocks and δ over each kind of base
- Submodularity, self-sufficiency and the self-sufficient closure
"""

import tempfile
import unittest

from jclosure.closure_geometry import (
    MAX_ORBIT_BLOCKS,
    Configuration,
    check_submodular,
    config_validate,
    coordinate_rank,
    delta,
    dim_delta,
    load_configuration,
    orbit_blocks,
    self_sufficient,
    ss_closure,
    trdeg_estimate,
    xi_dim,
)
from jclosure.exceptions import (
    InvalidArgumentError,
    ParseError,
    SizeLimitError,
    ValidationError,
)
from jclosure.halfplane import is_special
from jclosure.types import BaseKind
from tests.test_helpers import (
    CLOSURE_CONFIGURATION,
    CTX,
    EXAMPLE_CONFIGURATION,
    GENERIC,
    configuration,
    point,
    write_json,
)


def variant(data: dict, **changes) -> dict:
    """Copy a configuration dictionary with some fields replaced."""
    result = dict(data)
    result.update(changes)
    return result


class TestConfigurationFromDict(unittest.TestCase):
    """Test suite for configuration_from_dict and load_configuration."""

    def test_example(self):
        c = configuration(EXAMPLE_CONFIGURATION)
        self.assertEqual(c.n, 2)
        self.assertEqual(c.base_kind, BaseKind.RATIONALS)
        self.assertEqual(c.special, frozenset({0, 1}))
        claim = c.declared_modular[0]
        self.assertEqual((claim.i, claim.j), (0, 1))

    def test_declared_base(self):
        c = configuration({"points": ["2i"], "base": {"declared": ["i"]}, "relations": ["X1 - 2*X2"]})
        self.assertEqual(c.base_kind, BaseKind.DECLARED)
        self.assertEqual(len(c.all_points), 2)

    def test_parse_errors(self):
        cases = (
            {},
            {"points": ["1"]},
            {"points": ["i"], "base": "integers"},
            {"points": ["i"], "base": "declared"},
            {"points": ["i"], "base": {"other": ["i"]}},
            {"points": ["i"], "modular": [{"j": 1, "g": [[1, 0], [0, 1]]}]},
            {"points": ["i"], "modular": [{"i": 1, "j": 1, "g": [["x", 0], [0, 1]]}]},
            {"points": ["i"], "relations": ["X1 +"]},
        )
        for data in cases:
            with self.subTest(data=data), self.assertRaises(ParseError):
                configuration(data)

    def test_index_errors(self):
        cases = (
            {"points": ["i"], "modular": [{"i": 1, "j": 3, "g": [[1, 0], [0, 1]]}]},
            {"points": ["i"], "special": [5]},
            {"points": ["i"], "relations": ["X4 - 1"]},
        )
        for data in cases:
            with self.subTest(data=data), self.assertRaises(InvalidArgumentError):
                configuration(data)

    def test_base_points_need_declared_base(self):
        with self.assertRaises(InvalidArgumentError):
            Configuration(basis_points=(point("i"),), base_points=(point("2i"),))

    def test_load(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = write_json(tmp, "config.json", EXAMPLE_CONFIGURATION)
            self.assertEqual(load_configuration(path, CTX).n, 2)
            bad = write_json(tmp, "list.json", [1, 2])
            with self.assertRaises(ParseError):
                load_configuration(bad, CTX)
            broken = f"{tmp}/broken.json"
            with open(broken, "w") as handle:
                handle.write("{not json")
            with self.assertRaises(ParseError):
                load_configuration(broken, CTX)


class TestConfigValidate(unittest.TestCase):
    """Test suite for config_validate."""

    def test_example_passes(self):
        report = config_validate(configuration(EXAMPLE_CONFIGURATION), CTX)
        self.assertEqual(len(report.relation_residuals), 1)
        self.assertLessEqual(report.relation_residuals[0], CTX.tol)
        distance, phi_residual, derivative_residual = report.modular_residuals[0]
        self.assertLessEqual(distance, CTX.tol)
        self.assertLessEqual(derivative_residual, CTX.tol)
        self.assertEqual(report.degenerate_points, (1,))
        self.assertEqual(report.unacknowledged, ())
        self.assertEqual(report.flags, [])

    def test_unacknowledged_degenerate_point_is_flagged(self):
        data = variant(EXAMPLE_CONFIGURATION, special=[1])
        report = config_validate(configuration(data), CTX)
        self.assertEqual(report.unacknowledged, (1,))
        self.assertEqual(len(report.flags), 1)
        self.assertIn("X2", report.flags[0])

    def test_relation_must_vanish(self):
        data = variant(EXAMPLE_CONFIGURATION, relations=["X1 - 3*X2"])
        with self.assertRaises(ValidationError) as caught:
            config_validate(configuration(data), CTX)
        self.assertTrue(any("does not vanish" in v for v in caught.exception.violations))

    def test_wrong_modular_claim(self):
        data = variant(EXAMPLE_CONFIGURATION, modular=[{"i": 1, "j": 2, "g": [[3, 0], [0, 1]]}])
        with self.assertRaises(ValidationError) as caught:
            config_validate(configuration(data), CTX)
        self.assertTrue(any("action misses" in v for v in caught.exception.violations))

    def test_undeclared_relation_is_not_a_basis(self):
        data = variant(EXAMPLE_CONFIGURATION, modular=[])
        with self.assertRaises(ValidationError) as caught:
            config_validate(configuration(data), CTX)
        self.assertTrue(any(v.startswith("not a basis") for v in caught.exception.violations))

    def test_declared_special_needs_quadratic(self):
        data = {"points": [GENERIC], "special": [1]}
        with self.assertRaises(ValidationError) as caught:
            config_validate(configuration(data), CTX)
        self.assertEqual(len(caught.exception.violations), 1)

    def test_generic_point_without_relations(self):
        report = config_validate(configuration({"points": [GENERIC]}), CTX)
        self.assertEqual(report.degenerate_points, ())


class TestRanks(unittest.TestCase):
    """Test suite for xi_dim, trdeg_estimate and coordinate_rank."""

    def test_example(self):
        c = configuration(EXAMPLE_CONFIGURATION)
        report = xi_dim(c, CTX)
        self.assertEqual((report.n_generators, report.relation_rank, report.xi_dim), (2, 1, 1))
        self.assertEqual(trdeg_estimate(c, CTX), 7)
        self.assertEqual(coordinate_rank(c, 0, CTX), 1)
        self.assertEqual(coordinate_rank(c, 1, CTX), 1)

    def test_closure_configuration(self):
        c = configuration(CLOSURE_CONFIGURATION)
        self.assertEqual(xi_dim(c, CTX).xi_dim, 0)
        self.assertEqual(trdeg_estimate(c, CTX), 4)
        self.assertEqual(coordinate_rank(c, 0, CTX), 3)
        self.assertEqual(coordinate_rank(c, 1, CTX), 3)

    def test_no_relations(self):
        c = configuration({"points": [GENERIC]})
        self.assertEqual(xi_dim(c, CTX).xi_dim, 1)
        self.assertEqual(trdeg_estimate(c, CTX), 4)

    def test_certified_point_has_no_derivations(self):
        c = configuration({"points": ["2i"], "relations": ["j(X1) - 287496"]})
        self.assertEqual(xi_dim(c, CTX).xi_dim, 0)

    def test_twisted_relations_are_rejected(self):
        c = configuration({"points": [GENERIC], "relations": ["j([[2,0],[0,1]]*X1) - 1"]})
        with self.assertRaises(InvalidArgumentError):
            trdeg_estimate(c, CTX)

    def test_coordinate_index(self):
        with self.assertRaises(InvalidArgumentError):
            coordinate_rank(configuration(EXAMPLE_CONFIGURATION), 2, CTX)


class TestDelta(unittest.TestCase):
    """Test suite for orbit_blocks and delta."""

    def test_orbit_blocks(self):
        self.assertEqual(orbit_blocks(configuration(EXAMPLE_CONFIGURATION)), ((0, 1),))
        self.assertEqual(orbit_blocks(configuration(CLOSURE_CONFIGURATION)), ((0,), (1,)))

    def test_rationals_base(self):
        report = delta(configuration(EXAMPLE_CONFIGURATION), CTX)
        self.assertEqual((report.trdeg_estimate, report.dim_g, report.delta), (7, 1, 4))

    def test_special_base(self):
        data = variant(EXAMPLE_CONFIGURATION, base="special")
        report = delta(configuration(data), CTX)
        self.assertEqual((report.dim_g, report.delta), (0, 7))

    def test_declared_base(self):
        c = configuration({"points": ["2i", GENERIC], "base": {"declared": ["i"]}})
        report = delta(c, CTX)
        self.assertEqual((report.trdeg_estimate, report.dim_g, report.delta), (8, 1, 5))

    def test_closure_configuration(self):
        report = delta(configuration(CLOSURE_CONFIGURATION), CTX)
        self.assertEqual((report.trdeg_estimate, report.dim_g, report.delta), (4, 2, -2))


class TestSubmodularity(unittest.TestCase):
    """Test suite for check_submodular."""

    def test_single_point_relations(self):
        ca = configuration({"points": [GENERIC], "relations": ["X1*j(X1) - j1(X1)"]})
        cb = configuration({"points": [GENERIC, "0.1+1.3i"], "relations": ["j2(X2) - X2"]})
        report = check_submodular(ca, cb, CTX)
        self.assertEqual(
            (report.delta_union, report.delta_intersection, report.delta_a, report.delta_b),
            (0, 0, 0, 1),
        )
        self.assertTrue(report.holds)

    def test_disjoint_configurations(self):
        ca = configuration({"points": [GENERIC]})
        cb = configuration({"points": ["0.1+1.3i"]})
        report = check_submodular(ca, cb, CTX)
        self.assertEqual(
            (report.delta_union, report.delta_intersection, report.delta_a, report.delta_b),
            (2, 0, 1, 1),
        )

    def test_bases_must_match(self):
        ca = configuration({"points": [GENERIC]})
        cb = configuration({"points": [GENERIC], "base": "special"})
        with self.assertRaises(InvalidArgumentError):
            check_submodular(ca, cb, CTX)


class TestClosure(unittest.TestCase):
    """Test suite for self_sufficient, ss_closure and dim_delta."""

    def setUp(self):
        self.c = configuration(CLOSURE_CONFIGURATION)

    def test_self_sufficient(self):
        self.assertFalse(self_sufficient([0], self.c, CTX))
        self.assertFalse(self_sufficient([], self.c, CTX))
        self.assertTrue(self_sufficient([0, 1], self.c, CTX))

    def test_ss_closure(self):
        blocks, report = ss_closure([0], self.c, CTX)
        self.assertEqual(blocks, (0, 1))
        self.assertEqual(report.delta, -2)
        blocks, _ = ss_closure([1], self.c, CTX)
        self.assertEqual(blocks, (0, 1))

    def test_ss_closure_of_example(self):
        blocks, report = ss_closure([], configuration(EXAMPLE_CONFIGURATION), CTX)
        self.assertEqual(blocks, ())
        self.assertEqual(report.delta, 0)

    def test_dim_delta(self):
        self.assertEqual(dim_delta([0], self.c, CTX), -2)

    def test_generic_singleton(self):
        singleton = configuration({"points": ["0.25+exp(0.3)*i"]})
        report = config_validate(singleton, CTX)
        self.assertEqual(report.degenerate_points, ())
        self.assertIsNone(is_special(singleton.basis_points[0], CTX))
        self.assertEqual(dim_delta([0], singleton, CTX), 1)
        self.assertEqual(dim_delta([], configuration({"points": [GENERIC]}), CTX), 0)

    def test_block_index_out_of_range(self):
        with self.assertRaises(InvalidArgumentError):
            ss_closure([2], self.c, CTX)

    def test_enumeration_cap(self):
        points = [f"{k / 100}+1.1i" for k in range(MAX_ORBIT_BLOCKS + 1)]
        c = configuration({"points": points})
        with self.assertRaises(SizeLimitError):
            self_sufficient([0], c, CTX)
        with self.assertRaises(SizeLimitError):
            ss_closure([0], c, CTX)


if __name__ == "__main__":
    unittest.main()
