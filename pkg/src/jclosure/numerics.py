#
# Copyright (c) 2025-2026, The jclosure Authors
#
# SPDX-License-Identifier: BSD 2-Clause License
#

"""Arbitrary-precision arithmetic contract and integer-relation detection.

This module provides:

- PrecisionContext: working precision, tolerance and search bounds
- IntRelation: an integer relation found among numeric values
- integer_relation / complex_relation: PSLQ-based relation search
- min_poly_guess: minimal-polynomial recognition for complex values
- parse_complex: reading point literals such as ``"(1+sqrt(-163))/2"``

All arithmetic goes through the private ``mpmath.MPContext`` owned by a
PrecisionContext, so no global mpmath state is read or written and results are
pure functions of (inputs, context).

Relation search is one-sided: a ``None`` result only means that no relation
within the height bound was detected at the working precision, never that the
values are independent.
"""

import ast
import math
import re
from dataclasses import dataclass, field, replace
from typing import Any

from loguru import logger
from mpmath import MPContext, mpc, mpf

from jclosure.exceptions import InvalidArgumentError, ParseError

MIN_BITS = 64


@dataclass(frozen=True)
class PrecisionContext:
    """Working precision and search bounds for every numeric operation.

    Parameters:
        bits: Working mantissa precision in bits (at least 64).
        tol: Comparison tolerance; derived as 2^(-floor(bits/2)) when omitted.
        height_bound: Largest coefficient magnitude allowed in relation search.
        nmax: Largest modular-polynomial level searched for modular relations.
    """

    bits: int = 256
    tol: Any = None
    height_bound: int = 10**6
    nmax: int = 8
    mp: MPContext = field(init=False, repr=False, compare=False)
    tol_derived: bool = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        """Validate fields and build the private mpmath context.

        Raises:
            InvalidArgumentError: If any field violates its bound.
        """
        if self.bits < MIN_BITS:
            raise InvalidArgumentError(f"bits must be >= {MIN_BITS}, got {self.bits}")
        if self.height_bound < 1:
            raise InvalidArgumentError("height_bound must be >= 1")
        if self.nmax < 1:
            raise InvalidArgumentError("nmax must be >= 1")

        context = MPContext()
        context.prec = self.bits
        object.__setattr__(self, "mp", context)

        if self.tol is None:
            object.__setattr__(self, "tol", context.ldexp(1, -(self.bits // 2)))
            object.__setattr__(self, "tol_derived", True)
        else:
            tol = context.mpf(self.tol)
            if not 0 < tol < 1:
                raise InvalidArgumentError(f"tol must lie in (0, 1), got {self.tol}")
            object.__setattr__(self, "tol", tol)
            object.__setattr__(self, "tol_derived", False)

    @property
    def dps(self) -> int:
        """Decimal digits carried at this precision."""
        return self.mp.dps

    def with_bits(self, bits: int) -> "PrecisionContext":
        """Return a copy at another precision.

        A derived tolerance is re-derived for the new precision; an explicit one
        is kept.

        Args:
            bits: New working precision.

        Returns:
            The adjusted context.
        """
        return replace(self, bits=bits, tol=None if self.tol_derived else self.tol)

    def mpf(self, value: Any) -> mpf:
        """Convert a value to a real at this precision."""
        return self.mp.mpf(value)

    def mpc(self, value: Any, imag: Any = 0) -> mpc:
        """Convert a value (or a real/imaginary pair) to a complex at this precision."""
        return self.mp.mpc(value, imag)


@dataclass(frozen=True)
class IntRelation:
    """An integer relation Σ coeffs·values ≈ 0.

    Parameters:
        coeffs: Integer coefficients, not all zero, first nonzero one positive.
        residual: |Σ coeffs·values| at the working precision.
    """

    coeffs: tuple[int, ...]
    residual: Any

    @property
    def height(self) -> int:
        """Largest coefficient magnitude."""
        return max(abs(c) for c in self.coeffs)


def _normalize_sign(coeffs: list[int]) -> tuple[int, ...]:
    for c in coeffs:
        if c != 0:
            return tuple(coeffs) if c > 0 else tuple(-x for x in coeffs)
    return tuple(coeffs)


def _scaled_bound(coeffs, values, ctx: PrecisionContext):
    M = ctx.mp
    magnitude = M.fsum(abs(c * v) for c, v in zip(coeffs, values))
    return ctx.tol * max(M.mpf(1), magnitude)


def integer_relation(values: list[Any], ctx: PrecisionContext) -> IntRelation | None:
    """Search for an integer relation among real values.

    Uses mpmath's PSLQ at the context precision with ``maxcoeff`` set to the
    height bound. A value that is zero to tolerance yields the unit relation at
    its index (height 1, the smallest possible).

    Args:
        values: Nonempty list of finite reals.
        ctx: Precision context.

    Returns:
        The relation found, or None when no relation within the height bound
        was detected (not a proof of independence).

    Raises:
        InvalidArgumentError: If values is empty or contains a non-finite entry.
    """
    M = ctx.mp
    if not values:
        raise InvalidArgumentError("integer_relation needs at least one value")
    xs = [M.mpf(v) for v in values]
    for x in xs:
        if not M.isfinite(x):
            raise InvalidArgumentError(f"non-finite value in relation search: {x}")

    largest = max(abs(x) for x in xs)
    for k, x in enumerate(xs):
        if abs(x) <= ctx.tol * max(M.mpf(1), largest) * M.ldexp(1, -(ctx.bits // 4)):
            coeffs = [0] * len(xs)
            coeffs[k] = 1
            return IntRelation(coeffs=tuple(coeffs), residual=abs(x))
    if len(xs) == 1:
        return None

    found = M.pslq(xs, tol=ctx.tol, maxcoeff=ctx.height_bound, maxsteps=20000)
    if found is None:
        return None

    coeffs = _normalize_sign([int(c) for c in found])
    residual = abs(M.fsum(c * x for c, x in zip(coeffs, xs)))
    if max(abs(c) for c in coeffs) > ctx.height_bound:
        return None
    if residual > _scaled_bound(coeffs, xs, ctx):
        logger.debug(f"Discarding PSLQ candidate {coeffs}: residual {M.nstr(residual, 5)}")
        return None
    return IntRelation(coeffs=coeffs, residual=residual)


def complex_relation(values: list[Any], ctx: PrecisionContext) -> IntRelation | None:
    """Search for an integer relation among complex values.

    Real and imaginary parts are folded into the single real vector
    Re(v) + θ·Im(v); any relation found is re-verified on the complex values.
    θ is √2·π/4, with e/3 as the fallback when the first fold gives a
    relation that fails the complex check.

    Args:
        values: Nonempty list of complex values.
        ctx: Precision context.

    Returns:
        A relation holding for both parts, or None.
    """
    M = ctx.mp
    zs = [M.mpc(v) for v in values]
    for theta in (M.sqrt(2) * M.pi / 4, M.e / 3):
        folded = [z.real + theta * z.imag for z in zs]
        relation = integer_relation(folded, ctx)
        if relation is None:
            return None
        residual = abs(M.fsum(c * z for c, z in zip(relation.coeffs, zs)))
        if residual <= _scaled_bound(relation.coeffs, zs, ctx):
            return IntRelation(coeffs=relation.coeffs, residual=residual)
    return None


def polyval_int(coeffs: tuple[int, ...], x: Any, ctx: PrecisionContext) -> mpc:
    """Evaluate an integer polynomial (highest degree first) with Horner's rule."""
    M = ctx.mp
    acc = M.mpc(0)
    for c in coeffs:
        acc = acc * x + c
    return acc


def min_poly_guess(x: Any, degree_bound: int, ctx: PrecisionContext) -> tuple[int, ...] | None:
    """Guess the minimal polynomial of a complex value.

    Runs relation search on (1, x, …, x^d) for d = 1 … degree_bound and keeps
    the lowest-degree candidate that vanishes at x to tolerance.

    Args:
        x: Complex value.
        degree_bound: Largest degree tried (at least 1).
        ctx: Precision context.

    Returns:
        Primitive integer coefficients, highest degree first, with a positive
        leading coefficient; or None.

    Raises:
        InvalidArgumentError: If degree_bound < 1.
    """
    if degree_bound < 1:
        raise InvalidArgumentError("degree_bound must be >= 1")
    M = ctx.mp
    z = M.mpc(x)
    powers = [M.mpc(1)]
    for d in range(1, degree_bound + 1):
        powers.append(powers[-1] * z)
        relation = complex_relation(powers, ctx)
        if relation is None:
            continue
        low_first = list(relation.coeffs)
        while low_first and low_first[-1] == 0:
            low_first.pop()
        if len(low_first) < 2:
            continue
        content = math.gcd(*low_first)
        poly = [c // content for c in reversed(low_first)]
        if poly[0] < 0:
            poly = [-c for c in poly]
        value = polyval_int(tuple(poly), z, ctx)
        scale = M.fsum(abs(c) * abs(z) ** k for k, c in enumerate(reversed(poly)))
        if abs(value) <= ctx.tol * max(M.mpf(1), scale):
            logger.debug(f"Recognized degree-{len(poly) - 1} polynomial {poly}")
            return tuple(poly)
    return None


_IMAGINARY_SUFFIX = re.compile(r"(\d|\.|\))\s*[iI]\b")
_FUNCTIONS = {"sqrt", "exp", "log", "cos", "sin"}


def _evaluate_node(node: ast.AST, text: str, ctx: PrecisionContext):
    M = ctx.mp
    if isinstance(node, ast.Expression):
        return _evaluate_node(node.body, text, ctx)
    if isinstance(node, ast.Constant) and isinstance(node.value, bool):
        raise ParseError(f"unexpected literal in point expression: {text!r}")
    if isinstance(node, ast.Constant) and isinstance(node.value, int | float):
        segment = ast.get_source_segment(text, node) or str(node.value)
        return M.mpf(segment)
    if isinstance(node, ast.Constant) and isinstance(node.value, complex):
        segment = ast.get_source_segment(text, node) or repr(node.value.imag)
        return M.mpc(0, M.mpf(segment.rstrip("jJ")))
    if isinstance(node, ast.Name):
        constants = {"i": M.mpc(0, 1), "I": M.mpc(0, 1), "pi": M.pi, "e": M.e}
        if node.id == "rho":
            return (1 + M.sqrt(-3)) / 2
        if node.id in constants:
            return constants[node.id]
        raise ParseError(f"unknown name {node.id!r} in point expression")
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, ast.USub | ast.UAdd):
        operand = _evaluate_node(node.operand, text, ctx)
        return -operand if isinstance(node.op, ast.USub) else operand
    if isinstance(node, ast.BinOp):
        left = _evaluate_node(node.left, text, ctx)
        right = _evaluate_node(node.right, text, ctx)
        match node.op:
            case ast.Add():
                return left + right
            case ast.Sub():
                return left - right
            case ast.Mult():
                return left * right
            case ast.Div():
                return left / right
            case ast.Pow():
                return M.power(left, right)
    if (
        isinstance(node, ast.Call)
        and isinstance(node.func, ast.Name)
        and node.func.id in _FUNCTIONS
        and len(node.args) == 1
        and not node.keywords
    ):
        argument = _evaluate_node(node.args[0], text, ctx)
        return getattr(M, node.func.id)(argument)
    raise ParseError(f"unsupported construct in point expression: {text!r}")


def parse_complex(text: str, ctx: PrecisionContext) -> mpc:
    """Parse a complex literal or small closed-form expression.

    Accepts decimal numbers, ``i`` (also as a suffix: ``"0.3+1.2i"``), ``pi``,
    ``e``, ``rho`` = e^(πi/3), the operators ``+ - * / ^`` and the functions
    ``sqrt, exp, log, cos, sin``. Decimal literals are read at full precision.

    Args:
        text: Expression text, e.g. ``"(1+sqrt(-163))/2"``.
        ctx: Precision context.

    Returns:
        The value at the context precision.

    Raises:
        ParseError: If the text is not a supported expression.
    """
    source = _IMAGINARY_SUFFIX.sub(lambda m: f"{m.group(1)}*i", text.strip()).replace("^", "**")
    try:
        tree = ast.parse(source, mode="eval")
    except SyntaxError as e:
        raise ParseError(f"cannot parse point expression {text!r}: {e.msg}") from e
    return ctx.mp.mpc(_evaluate_node(tree, source, ctx))
