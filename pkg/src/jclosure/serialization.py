#
# Copyright (c) 2025-2026, The jclosure Authors
#
# SPDX-License-Identifier: BSD 2-Clause License
#

"""JSON adapter for results.

This module provides the JsonAdapter class used by the CLI and the acceptance
suite to:

- Format arbitrary-precision numbers as decimal strings at full precision
- Format jets, reductions, modular polynomials and solutions
- Format closure-geometry reports
- Dump documents deterministically
"""

import json
from fractions import Fraction
from typing import Any

from mpmath import mpc

from jclosure.closure_geometry import (
    DeltaReport,
    SubmodularityReport,
    ValidationReport,
    XiReport,
)
from jclosure.halfplane import GL2Q, HPoint, PrimitiveIntMatrix, reduce_fundamental
from jclosure.khovanskii import Solution
from jclosure.modular_forms import JJet
from jclosure.modular_polynomials import ModularPolynomial
from jclosure.numerics import PrecisionContext


def dumps(document: Any) -> str:
    """Serialize a document with sorted keys and a trailing newline."""
    return json.dumps(document, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


class JsonAdapter:
    """Formats results as JSON-ready dictionaries with decimal-string numbers."""

    def __init__(self, ctx: PrecisionContext, digits: int | None = None):
        """Initialize the adapter.

        Args:
            ctx: Precision context the values were computed in.
            digits: Significant digits per number; every digit the context
                carries when omitted.
        """
        self._ctx = ctx
        self._digits = digits or ctx.dps

    def real(self, x: Any) -> str:
        """Format a real number."""
        M = self._ctx.mp
        value = M.mpf(x)
        if value == 0:
            return "0"
        return M.nstr(value, self._digits)

    def complex(self, z: Any) -> str:
        """Format a complex number as ``"a+bi"`` (readable by parse_complex)."""
        M = self._ctx.mp
        value = M.mpc(z)
        re, im = value.real, value.imag
        if im == 0:
            return self.real(re)
        imaginary = self.real(abs(im)) + "i"
        if re == 0:
            return imaginary if im > 0 else "-" + imaginary
        return f"{self.real(re)}{'+' if im > 0 else '-'}{imaginary}"

    def matrix(self, g: GL2Q | PrimitiveIntMatrix) -> list[list[str]]:
        """Format a matrix with exact rational entries."""
        return [[str(Fraction(x)) for x in row] for row in g.rows()]

    def format_jet(self, z: HPoint, values: JJet) -> dict:
        """Format (j, j′, j″, j‴) at a point."""
        return {
            "z": self.complex(z.value),
            "j": self.complex(values.j),
            "j1": self.complex(values.j1),
            "j2": self.complex(values.j2),
            "j3": self.complex(values.j3),
        }

    def format_reduction(self, z: HPoint, reduced: HPoint, gamma: PrimitiveIntMatrix) -> dict:
        """Format a fundamental-domain reduction z = γ·reduced."""
        return {
            "z": self.complex(z.value),
            "reduced": self.complex(reduced.value),
            "gamma": self.matrix(gamma),
        }

    def format_polynomial(self, phi: ModularPolynomial) -> dict:
        """Format Φ_N as sorted ``[i, j, c]`` triples."""
        return {
            "level": phi.level,
            "deg_x": phi.deg_x,
            "deg_y": phi.deg_y,
            "terms": [[i, j, str(c)] for (i, j), c in sorted(phi.coeffs.items())],
        }

    def format_solution(self, solution: Solution, certified: bool | None = None) -> dict:
        """Format a solution with fundamental-domain representatives of its upper coordinates."""
        representatives = []
        for z in solution.points:
            if z.imag > 0:
                reduced, _ = reduce_fundamental(HPoint(z), self._ctx)
                representatives.append(self.complex(reduced.value))
            else:
                representatives.append(None)
        document = {
            "points": [self.complex(z) for z in solution.points],
            "reduced": representatives,
            "residual": self.real(solution.residual),
            "jac_smallest_sv": self.real(solution.jac_smallest_sv),
            "nonsingular": solution.nonsingular,
            "multiplicity": solution.multiplicity,
        }
        if certified is not None:
            document["certified"] = certified
        return document

    def format_validation(self, report: ValidationReport) -> dict:
        """Format a passing validation report."""
        return {
            "valid": True,
            "relation_residuals": [self.real(r) for r in report.relation_residuals],
            "modular_residuals": [[self.real(r) for r in row] for row in report.modular_residuals],
            "degenerate_points": [k + 1 for k in report.degenerate_points],
            "flags": report.flags,
        }

    def format_xi(self, report: XiReport) -> dict:
        """Format a j-derivation dimension report."""
        return {
            "n_generators": report.n_generators,
            "relation_rank": report.relation_rank,
            "xi_dim": report.xi_dim,
        }

    def format_delta(self, report: DeltaReport) -> dict:
        """Format a predimension report."""
        return {
            "trdeg_estimate": report.trdeg_estimate,
            "dim_g": report.dim_g,
            "delta": report.delta,
        }

    def format_submodular(self, report: SubmodularityReport) -> dict:
        """Format the four predimensions of a submodularity check."""
        return {
            "delta_union": report.delta_union,
            "delta_intersection": report.delta_intersection,
            "delta_a": report.delta_a,
            "delta_b": report.delta_b,
            "holds": report.holds,
        }

    def values(self, items: list[mpc]) -> list[str]:
        """Format a list of complex values."""
        return [self.complex(z) for z in items]
