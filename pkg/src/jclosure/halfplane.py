#
# Copyright (c) 2025-2026, The jclosure Authors
#
# SPDX-License-Identifier: BSD 2-Clause License
#

"""Points of the double half-plane and the GL₂(ℚ) action on them.

This module provides:

- HPoint: a point of ℍ = ℍ⁺ ∪ ℍ⁻
- GL2Q / PrimitiveIntMatrix: rational matrices and their primitive integral rescalings
- act / red: the Möbius action and the red(g) normalization
- reduce_fundamental: SL₂(ℤ) reduction into the standard fundamental domain
- is_special: recognition of special (CM) points by an integer quadratic
- hecke_index / hecke_representatives: the upper-triangular coset representatives
  of primitive integral matrices of a given determinant
- find_modular_relation: search for g ∈ GL₂(ℚ) with g·z2 = z1 of minimal level

Points in ℍ⁻ are carried into ℍ⁺ (by conjugation for reduction, by z ↦ −z for
relation search) wherever an upper half-plane is required; the conversions are
tracked so witnesses always act on the original points.
"""

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Any

from loguru import logger
from mpmath import mpc

from jclosure.exceptions import InvalidArgumentError, NumericInstabilityError
from jclosure.numerics import PrecisionContext, complex_relation

REDUCTION_STEP_CAP = 10**6


@dataclass(frozen=True)
class HPoint:
    """A point of ℍ⁺ ∪ ℍ⁻.

    Parameters:
        value: The complex coordinate; its imaginary part must be nonzero.
    """

    value: mpc

    def __post_init__(self):
        """Reject points on the real line.

        Raises:
            InvalidArgumentError: If Im(value) == 0.
        """
        if self.value.imag == 0:
            raise InvalidArgumentError(f"point {self.value} is on the real line")

    @property
    def upper(self) -> bool:
        """Whether the point lies in ℍ⁺."""
        return self.value.imag > 0

    def conjugate(self) -> "HPoint":
        """Return the Schwarz-reflected point z̄."""
        return HPoint(self.value.conjugate())


@dataclass(frozen=True)
class GL2Q:
    """A matrix [[a, b], [c, d]] with rational entries and nonzero determinant.

    Entries are coerced to ``Fraction``; strings such as ``"3/2"`` are accepted.
    """

    a: Fraction
    b: Fraction
    c: Fraction
    d: Fraction

    def __post_init__(self):
        """Coerce entries and check invertibility.

        Raises:
            InvalidArgumentError: If the determinant is zero.
        """
        for name in ("a", "b", "c", "d"):
            object.__setattr__(self, name, Fraction(getattr(self, name)))
        if self.det == 0:
            raise InvalidArgumentError(f"matrix {self.rows()} has zero determinant")

    @classmethod
    def from_rows(cls, rows: Any) -> "GL2Q":
        """Build a matrix from ``[[a, b], [c, d]]``.

        Raises:
            InvalidArgumentError: If the shape is wrong or an entry is not rational.
        """
        try:
            (a, b), (c, d) = rows
            return cls(Fraction(a), Fraction(b), Fraction(c), Fraction(d))
        except (TypeError, ValueError, ZeroDivisionError) as e:
            raise InvalidArgumentError(f"not a 2x2 rational matrix: {rows!r}") from e

    @classmethod
    def identity(cls) -> "GL2Q":
        """Return the identity matrix."""
        return cls(Fraction(1), Fraction(0), Fraction(0), Fraction(1))

    @property
    def det(self) -> Fraction:
        """Determinant ad − bc."""
        return self.a * self.d - self.b * self.c

    def rows(self) -> list[list[Fraction]]:
        """Return the entries as nested lists."""
        return [[self.a, self.b], [self.c, self.d]]

    def inverse(self) -> "GL2Q":
        """Return the matrix inverse."""
        det = self.det
        return GL2Q(self.d / det, -self.b / det, -self.c / det, self.a / det)

    def __matmul__(self, other: "GL2Q") -> "GL2Q":
        return GL2Q(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def __str__(self) -> str:
        return "[[{},{}],[{},{}]]".format(self.a, self.b, self.c, self.d)


@dataclass(frozen=True)
class PrimitiveIntMatrix:
    """An integer matrix with coprime entries, as produced by red().

    Parameters:
        a, b, c, d: Integer entries with gcd 1.
        N: |ad − bc|.
    """

    a: int
    b: int
    c: int
    d: int
    N: int

    def __post_init__(self):
        """Check primitivity and the stored level.

        Raises:
            InvalidArgumentError: If the entries share a factor or N is wrong.
        """
        if math.gcd(self.a, self.b, self.c, self.d) != 1:
            raise InvalidArgumentError("entries of a primitive matrix must be coprime")
        if self.N != abs(self.a * self.d - self.b * self.c) or self.N == 0:
            raise InvalidArgumentError(f"N={self.N} does not match the determinant")

    def to_gl2q(self) -> GL2Q:
        """View the matrix as an element of GL₂(ℚ)."""
        return GL2Q(Fraction(self.a), Fraction(self.b), Fraction(self.c), Fraction(self.d))

    def rows(self) -> list[list[int]]:
        """Return the entries as nested lists."""
        return [[self.a, self.b], [self.c, self.d]]


def _rational(ctx: PrecisionContext, q: Fraction):
    return ctx.mp.mpf(q.numerator) / q.denominator


def act(g: GL2Q, z: HPoint, ctx: PrecisionContext) -> HPoint:
    """Apply the Möbius transformation z ↦ (az + b)/(cz + d).

    The image lies in the opposite half-plane exactly when det(g) < 0.

    Args:
        g: Rational matrix.
        z: Point of ℍ.
        ctx: Precision context.

    Returns:
        The image point.
    """
    a, b, c, d = (_rational(ctx, x) for x in (g.a, g.b, g.c, g.d))
    w = ctx.mp.mpc(z.value)
    return HPoint((a * w + b) / (c * w + d))


def red(g: GL2Q) -> PrimitiveIntMatrix:
    """Return the unique positive rescaling rg with coprime integer entries.

    Args:
        g: Invertible rational matrix.

    Returns:
        The primitive matrix; its N is |det(rg)|.
    """
    entries = (g.a, g.b, g.c, g.d)
    denominator = math.lcm(*(x.denominator for x in entries))
    scaled = [int(x * denominator) for x in entries]
    content = math.gcd(*scaled)
    a, b, c, d = (x // content for x in scaled)
    return PrimitiveIntMatrix(a, b, c, d, abs(a * d - b * c))


def reduce_fundamental(z: HPoint, ctx: PrecisionContext) -> tuple[HPoint, PrimitiveIntMatrix]:
    """Reduce a point into the standard SL₂(ℤ) fundamental domain.

    Alternates translation to |Re| ≤ 1/2 with inversion while |z| < 1. Points of
    ℍ⁻ are reduced through their conjugate, and the returned representative is
    conjugated back, so z = γ·z0 holds in both half-planes.

    Args:
        z: Point to reduce.
        ctx: Precision context.

    Returns:
        ``(z0, γ)`` with z = γ·z0, γ ∈ SL₂(ℤ) normalized so that c > 0, or
        c = 0 and d > 0.

    Raises:
        NumericInstabilityError: If the loop exceeds the step cap.
    """
    M = ctx.mp
    upper = z.upper
    w = M.mpc(z.value if upper else z.value.conjugate())
    # A tracks w = A·z with A = [[p, q], [r, s]].
    p, q, r, s = 1, 0, 0, 1
    threshold = 1 - ctx.tol
    for _ in range(REDUCTION_STEP_CAP):
        n = int(M.floor(w.real + M.mpf(1) / 2))
        if n:
            w -= n
            p, q = p - n * r, q - n * s
        if abs(w) ** 2 < threshold:
            w = -1 / w
            p, q, r, s = -r, -s, p, q
        else:
            break
    else:
        raise NumericInstabilityError(
            f"fundamental-domain reduction of {M.nstr(z.value, 10)} exceeded {REDUCTION_STEP_CAP} steps"
        )

    source = M.mpc(z.value if upper else z.value.conjugate())
    z0 = (p * source + q) / (r * source + s)
    # γ = A⁻¹
    a, b, c, d = s, -q, -r, p
    if c < 0 or (c == 0 and d < 0):
        a, b, c, d = -a, -b, -c, -d
    gamma = PrimitiveIntMatrix(a, b, c, d, 1)
    return HPoint(z0 if upper else z0.conjugate()), gamma


def is_special(z: HPoint, ctx: PrecisionContext) -> tuple[int, int, int] | None:
    """Recognize a special point by an integer quadratic it satisfies.

    The search is one-sided: None means no quadratic within the height bound
    was detected at the working precision.

    Args:
        z: Point of ℍ.
        ctx: Precision context.

    Returns:
        Primitive ``(a, b, c)`` with a > 0, b² − 4ac < 0 and az² + bz + c ≈ 0,
        or None.
    """
    w = z.value if z.upper else z.value.conjugate()
    relation = complex_relation([w * w, w, ctx.mp.mpc(1)], ctx)
    if relation is None:
        return None
    a, b, c = relation.coeffs
    content = math.gcd(a, b, c)
    a, b, c = a // content, b // content, c // content
    if a < 0:
        a, b, c = -a, -b, -c
    if a == 0 or b * b - 4 * a * c >= 0:
        logger.debug(f"Rejecting quadratic ({a}, {b}, {c}): not a CM relation")
        return None
    return a, b, c


def hecke_index(N: int) -> int:
    """Return ψ(N) = N·∏_{p|N}(1 + 1/p), the number of Hecke representatives.

    Raises:
        InvalidArgumentError: If N < 1.
    """
    if N < 1:
        raise InvalidArgumentError(f"level must be >= 1, got {N}")
    result, rest, prime = N, N, 2
    while prime * prime <= rest:
        if rest % prime == 0:
            result = result // prime * (prime + 1)
            while rest % prime == 0:
                rest //= prime
        prime += 1
    if rest > 1:
        result = result // rest * (rest + 1)
    return result


def hecke_representatives(N: int) -> list[PrimitiveIntMatrix]:
    """Return the representatives [[a, b], [0, d]] of primitive matrices of determinant N.

    Entries satisfy ad = N, 0 ≤ b < d and gcd(a, b, d) = 1. The list is ordered by
    increasing d, then increasing b.

    Raises:
        InvalidArgumentError: If N < 1.
    """
    if N < 1:
        raise InvalidArgumentError(f"level must be >= 1, got {N}")
    representatives = []
    for d in range(1, N + 1):
        if N % d:
            continue
        a = N // d
        for b in range(d):
            if math.gcd(a, b, d) == 1:
                representatives.append(PrimitiveIntMatrix(a, b, 0, d, N))
    return representatives


_REFLECT = GL2Q(Fraction(1), Fraction(0), Fraction(0), Fraction(-1))


def _to_upper(z: HPoint, ctx: PrecisionContext) -> tuple[HPoint, GL2Q]:
    if z.upper:
        return z, GL2Q.identity()
    return act(_REFLECT, z, ctx), _REFLECT


def boundary_aliases(w: HPoint, ctx: PrecisionContext) -> list[tuple[GL2Q, mpc]]:
    """Return (σ, σ·w) for the identifications of the fundamental-domain boundary.

    σ runs over the identity, z ± 1, −1/z and −1/z ± 1.
    """
    aliases = []
    for rows in (
        [[1, 0], [0, 1]],
        [[1, 1], [0, 1]],
        [[1, -1], [0, 1]],
        [[0, -1], [1, 0]],
        [[1, -1], [1, 0]],
        [[-1, -1], [1, 0]],
    ):
        sigma = GL2Q.from_rows(rows)
        aliases.append((sigma, act(sigma, w, ctx).value))
    return aliases


def sl2z_equivalent(z1: HPoint, z2: HPoint, ctx: PrecisionContext, tolerance: Any = None) -> bool:
    """Whether z1 and z2 lie in the same SL₂(ℤ) orbit, up to a tolerance.

    Points in different half-planes are never equivalent.

    Args:
        z1: First point.
        z2: Second point.
        ctx: Precision context.
        tolerance: Relative distance allowed between reduced representatives;
            ctx.tol when omitted.
    """
    if z1.upper != z2.upper:
        return False
    u1 = z1 if z1.upper else z1.conjugate()
    u2 = z2 if z2.upper else z2.conjugate()
    w1, _ = reduce_fundamental(u1, ctx)
    w2, _ = reduce_fundamental(u2, ctx)
    limit = (ctx.tol if tolerance is None else tolerance) * max(1, abs(w2.value))
    return any(abs(w2.value - image) <= limit for _, image in boundary_aliases(w1, ctx))


def find_modular_relation(
    z1: HPoint, z2: HPoint, ctx: PrecisionContext, tolerance: Any = None
) -> tuple[GL2Q, int] | None:
    """Search for g ∈ GL₂(ℚ) with g·z2 = z1 and minimal level N = det(red(g)).

    Hecke representatives h of determinant N = 1 … ctx.nmax are tried in order;
    h·z2 and z1 are both reduced into the fundamental domain and compared,
    including the boundary identifications of the domain.

    Args:
        z1: Target point.
        z2: Source point.
        ctx: Precision context.
        tolerance: Relative distance allowed between reduced images; ctx.tol
            when omitted.

    Returns:
        ``(g, N)`` with act(g, z2) ≈ z1, or None when no level up to nmax works.
    """
    limit = ctx.tol if tolerance is None else tolerance
    u1, p1 = _to_upper(z1, ctx)
    u2, p2 = _to_upper(z2, ctx)
    w1, gamma1 = reduce_fundamental(u1, ctx)
    aliases = boundary_aliases(w1, ctx)
    for N in range(1, ctx.nmax + 1):
        for h in hecke_representatives(N):
            hg = h.to_gl2q()
            w, gamma = reduce_fundamental(act(hg, u2, ctx), ctx)
            scale = max(ctx.mp.mpf(1), abs(w.value))
            for sigma, image in aliases:
                if abs(w.value - image) <= limit * scale:
                    g_upper = gamma1.to_gl2q() @ sigma.inverse() @ gamma.to_gl2q().inverse() @ hg
                    g = p1.inverse() @ g_upper @ p2
                    logger.debug(f"Modular relation of level {N} found: {g}")
                    return g, N
    return None
