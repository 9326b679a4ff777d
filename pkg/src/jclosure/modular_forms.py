#
# Copyright (c) 2025-2026, The jclosure Authors
#
# SPDX-License-Identifier: BSD 2-Clause License
#

"""q-expansions of E₂, E₄, E₆, Δ and j, and the jet (j, j′, j″, j‴) on ℍ.

This module provides:

- QSeries: exact integer q-series with a valuation and a truncation point
- eisenstein_series / delta_series / j_series / j_power_series: cached generators
- export_series_cache / import_series_cache: the on-disk ``SERIES`` text format
- truncation_order: number of q-terms needed at a given precision and height
- JJet / jet / j_value: values of j and its z-derivatives anywhere on ℍ
- psi / eta_j3: the third-order differential equation satisfied by j
- automorphy_residual: the derivative transformation law under SL₂(ℤ)

Jets are evaluated at the SL₂(ℤ)-reduced point using the Ramanujan identities
for D = q·d/dq (DE₂ = (E₂² − E₄)/12, DE₄ = (E₂E₄ − E₆)/3, DE₆ = (E₂E₆ − E₄²)/2,
DΔ = E₂Δ) and then carried back to the input point by the chain rule. E₂ is
only ever evaluated at reduced points.
"""

import math
import threading
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Any

from loguru import logger
from mpmath import mpc

from jclosure.exceptions import DomainError, InvalidArgumentError
from jclosure.halfplane import GL2Q, HPoint, act, reduce_fundamental
from jclosure.numerics import PrecisionContext

GUARD_BITS = 32
MIN_TRUNCATION = 8


@dataclass(frozen=True)
class QSeries:
    """A truncated q-series with exact integer coefficients.

    Parameters:
        name: Label used by the on-disk cache.
        valuation: Exponent of the first stored coefficient.
        coeffs: Coefficients of q^valuation, q^(valuation+1), ...
    """

    name: str
    valuation: int
    coeffs: tuple[int, ...]

    @property
    def truncation(self) -> int:
        """First exponent whose coefficient is not known."""
        return self.valuation + len(self.coeffs)

    def coefficient(self, k: int) -> int:
        """Return the coefficient of q^k.

        Raises:
            InvalidArgumentError: If k lies at or beyond the truncation.
        """
        if k >= self.truncation:
            raise InvalidArgumentError(f"q^{k} is beyond the truncation of {self.name}")
        if k < self.valuation:
            return 0
        return self.coeffs[k - self.valuation]

    def truncate(self, length: int) -> "QSeries":
        """Keep at most ``length`` coefficients."""
        return QSeries(self.name, self.valuation, self.coeffs[:length])

    def __mul__(self, other: "QSeries") -> "QSeries":
        length = min(len(self.coeffs), len(other.coeffs))
        product = [0] * length
        for i, x in enumerate(self.coeffs[:length]):
            if x:
                for k, y in enumerate(other.coeffs[: length - i]):
                    product[i + k] += x * y
        return QSeries(
            f"{self.name}*{other.name}", self.valuation + other.valuation, tuple(product)
        )

    def evaluate(self, q: Any, ctx: PrecisionContext) -> mpc:
        """Evaluate the truncated series at q with Horner's rule."""
        M = ctx.mp
        acc = M.mpc(0)
        for c in reversed(self.coeffs):
            acc = acc * q + c
        return acc * M.power(q, self.valuation) if self.valuation else acc


_cache_lock = threading.Lock()
_series_cache: dict[str, QSeries] = {}


def _cached(name: str, length: int, build) -> QSeries:
    with _cache_lock:
        known = _series_cache.get(name)
    if known is not None and len(known.coeffs) >= length:
        return known.truncate(length)
    series = build(length)
    with _cache_lock:
        current = _series_cache.get(name)
        if current is None or len(current.coeffs) < len(series.coeffs):
            _series_cache[name] = series
    logger.debug(f"Built q-series {name} to {length} terms")
    return series


def _divisor_sums(power: int, length: int) -> list[int]:
    sums = [0] * length
    for d in range(1, length):
        dp = d**power
        for n in range(d, length, d):
            sums[n] += dp
    return sums


_EISENSTEIN = {2: (-24, 1), 4: (240, 3), 6: (-504, 5)}


def eisenstein_series(weight: int, length: int) -> QSeries:
    """Return E_weight = 1 + c·Σ σ_{weight−1}(n)qⁿ for weight 2, 4 or 6.

    Raises:
        InvalidArgumentError: For any other weight.
    """
    if weight not in _EISENSTEIN:
        raise InvalidArgumentError(f"Eisenstein series of weight {weight} is not provided")
    factor, power = _EISENSTEIN[weight]

    def build(n: int) -> QSeries:
        sums = _divisor_sums(power, n)
        return QSeries(f"E{weight}", 0, tuple([1] + [factor * s for s in sums[1:]]))

    return _cached(f"E{weight}", length, build)


def delta_series(length: int) -> QSeries:
    """Return Δ = (E₄³ − E₆²)/1728 = q − 24q² + …, stored from q¹."""

    def build(n: int) -> QSeries:
        e4 = eisenstein_series(4, n + 1)
        e6 = eisenstein_series(6, n + 1)
        cube = (e4 * e4) * e4
        square = e6 * e6
        coeffs = [(x - y) // 1728 for x, y in zip(cube.coeffs, square.coeffs)]
        return QSeries("Delta", 1, tuple(coeffs[1 : n + 1]))

    return _cached("Delta", length, build)


def j_series(length: int) -> QSeries:
    """Return j = E₄³/Δ = q⁻¹ + 744 + 196884q + …, stored from q⁻¹."""

    def build(n: int) -> QSeries:
        e4 = eisenstein_series(4, n)
        cube = (e4 * e4) * e4
        reduced_delta = delta_series(n).coeffs
        quotient: list[int] = []
        for k in range(n):
            value = cube.coeffs[k] - sum(
                quotient[i] * reduced_delta[k - i] for i in range(max(0, k - n + 1), k)
            )
            quotient.append(value)
        return QSeries("j", -1, tuple(quotient))

    return _cached("j", length, build)


def j_power_series(m: int, length: int) -> QSeries:
    """Return j^m stored from q^(−m), with ``length`` known coefficients.

    Raises:
        InvalidArgumentError: If m < 0.
    """
    if m < 0:
        raise InvalidArgumentError("j_power_series needs m >= 0")
    if m == 0:
        return QSeries("j^0", 0, tuple([1] + [0] * (length - 1)))

    def build(n: int) -> QSeries:
        base = j_series(n)
        result = base
        for _ in range(m - 1):
            result = result * base
        return QSeries(f"j^{m}", -m, result.coeffs)

    return _cached(f"j^{m}", length, build)


def export_series_cache(path: str | Path) -> int:
    """Write every cached series as ``SERIES name k numerator denominator`` lines.

    Returns:
        Number of series written.
    """
    with _cache_lock:
        items = sorted(_series_cache.items())
    lines = []
    for name, series in items:
        for offset, c in enumerate(series.coeffs):
            lines.append(f"SERIES {name} {series.valuation + offset} {c} 1")
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""))
    return len(items)


def import_series_cache(path: str | Path) -> int:
    """Load series written by export_series_cache into the in-memory cache.

    Returns:
        Number of series loaded.

    Raises:
        InvalidArgumentError: On malformed lines, gaps in exponents or
            non-integral coefficients.
    """
    collected: dict[str, dict[int, int]] = {}
    for number, line in enumerate(Path(path).read_text().splitlines(), start=1):
        if not line.strip():
            continue
        parts = line.split()
        if len(parts) != 5 or parts[0] != "SERIES":
            raise InvalidArgumentError(f"line {number}: expected 'SERIES name k num den'")
        _, name, k, numerator, denominator = parts
        try:
            num, den = int(numerator), int(denominator)
            exponent = int(k)
        except ValueError as e:
            raise InvalidArgumentError(f"line {number}: {e}") from e
        if den == 0 or num % den:
            raise InvalidArgumentError(f"line {number}: coefficient is not an integer")
        collected.setdefault(name, {})[exponent] = num // den

    for name, terms in collected.items():
        valuation = min(terms)
        exponents = sorted(terms)
        if exponents != list(range(valuation, valuation + len(exponents))):
            raise InvalidArgumentError(f"series {name} has gaps in its exponents")
        series = QSeries(name, valuation, tuple(terms[k] for k in exponents))
        with _cache_lock:
            current = _series_cache.get(name)
            if current is None or len(current.coeffs) < len(series.coeffs):
                _series_cache[name] = series
    return len(collected)


def truncation_order(ctx: PrecisionContext, im_reduced: Any) -> int:
    """Return the number of q-terms needed at a reduced point.

    The result is the smallest M ≥ 8 with
    e^(−2π·M·im)·e^(4π√M) ≤ 2^(−bits−16).

    Args:
        ctx: Precision context.
        im_reduced: Imaginary part of the reduced point (at least √3/2 − tol).

    Raises:
        InvalidArgumentError: If im_reduced is below the fundamental domain.
    """
    if ctx.mp.mpf(im_reduced) < ctx.mp.sqrt(3) / 2 - ctx.tol:
        raise InvalidArgumentError(f"imaginary part {float(im_reduced)} is below the fundamental domain")
    im = float(im_reduced)
    target = -(ctx.bits + 16) * math.log(2)
    M = MIN_TRUNCATION
    while -2 * math.pi * M * im + 4 * math.pi * math.sqrt(M) > target:
        M += 1
    return M


@dataclass(frozen=True)
class JJet:
    """Values of j, j′, j″, j‴ at a point; derivatives are taken in z."""

    j: mpc
    j1: mpc
    j2: mpc
    j3: mpc

    def conjugate(self) -> "JJet":
        """Return the componentwise conjugate jet."""
        return JJet(self.j.conjugate(), self.j1.conjugate(), self.j2.conjugate(), self.j3.conjugate())

    def as_tuple(self) -> tuple[mpc, mpc, mpc, mpc]:
        """Return (j, j1, j2, j3)."""
        return self.j, self.j1, self.j2, self.j3


def _leibniz(f: list, g: list, k: int):
    return sum(math.comb(k, i) * f[i] * g[k - i] for i in range(k + 1))


def _reduced_jet(z0: mpc, ctx: PrecisionContext, order: int) -> list[mpc]:
    """Return [j, j′, …] up to ``order`` at a reduced point of ℍ⁺, at guard precision."""
    work = ctx.with_bits(ctx.bits + GUARD_BITS)
    M = work.mp
    length = truncation_order(ctx, z0.imag) + 1
    two_pi_i = 2 * M.pi * M.j
    q = M.exp(two_pi_i * z0)

    e2 = [eisenstein_series(2, length).evaluate(q, work)]
    e4 = [eisenstein_series(4, length).evaluate(q, work)]
    e6 = [eisenstein_series(6, length).evaluate(q, work)]
    delta = [delta_series(length).evaluate(q, work)]
    for k in range(order):
        e2.append((_leibniz(e2, e2, k) - e4[k]) / 12)
        e4.append((_leibniz(e2, e4, k) - e6[k]) / 3)
        e6.append((_leibniz(e2, e6, k) - _leibniz(e4, e4, k)) / 2)
        delta.append(_leibniz(e2, delta, k))

    square = [_leibniz(e4, e4, k) for k in range(order + 1)]
    cube = [_leibniz(square, e4, k) for k in range(order + 1)]
    quotient: list[mpc] = []
    for k in range(order + 1):
        lower = sum(math.comb(k, i) * quotient[i] * delta[k - i] for i in range(k))
        quotient.append((cube[k] - lower) / delta[0])
    return [M.power(two_pi_i, k) * value for k, value in enumerate(quotient)]


@lru_cache(maxsize=8192)
def jet(z: HPoint, ctx: PrecisionContext) -> JJet:
    """Evaluate (j, j′, j″, j‴) at any point of ℍ.

    Points of ℍ⁻ are handled by Schwarz reflection, j(z) = conj(j(z̄)). The
    point is reduced to z0 = γ⁻¹z, the jet is evaluated there and transported
    back through w(z) = γ⁻¹z with w′ = 1/u², w″ = 2c/u³, w‴ = 6c²/u⁴,
    u = a − cz.

    Args:
        z: Point of ℍ.
        ctx: Precision context.

    Returns:
        The jet, rounded to the context precision.
    """
    if not z.upper:
        return jet(z.conjugate(), ctx).conjugate()

    z0, gamma = reduce_fundamental(z, ctx)
    f0, f1, f2, f3 = _reduced_jet(z0.value, ctx, 3)

    work = ctx.with_bits(ctx.bits + GUARD_BITS).mp
    u = gamma.a - gamma.c * work.mpc(z.value)
    w1 = 1 / u**2
    w2 = 2 * gamma.c / u**3
    w3 = 6 * gamma.c**2 / u**4
    values = (
        f0,
        f1 * w1,
        f2 * w1**2 + f1 * w2,
        f3 * w1**3 + 3 * f2 * w1 * w2 + f1 * w3,
    )
    M = ctx.mp
    return JJet(*(M.mpc(v) for v in values))


def j_value(z: HPoint, ctx: PrecisionContext) -> mpc:
    """Evaluate j alone at any point of ℍ."""
    if not z.upper:
        return j_value(z.conjugate(), ctx).conjugate()
    z0, _ = reduce_fundamental(z, ctx)
    return ctx.mp.mpc(_reduced_jet(z0.value, ctx, 0)[0])


def _schwarzian_coefficient(y0, y1, ctx: PrecisionContext):
    M = ctx.mp
    if abs(y1) <= ctx.tol:
        raise DomainError("the formula is undefined where j′ = 0")
    if abs(y0) <= ctx.tol:
        raise DomainError("the formula is undefined where j = 0")
    if abs(y0 - 1728) <= ctx.tol * 1728:
        raise DomainError("the formula is undefined where j = 1728")
    y0 = M.mpc(y0)
    return (y0**2 - 1968 * y0 + 2654208) / (2 * y0**2 * (y0 - 1728) ** 2)


def psi(y0: Any, y1: Any, y2: Any, y3: Any, ctx: PrecisionContext) -> mpc:
    """Evaluate y3/y1 − (3/2)(y2/y1)² + R(y0)·y1², which vanishes on the jet of j.

    R(y0) = (y0² − 1968y0 + 2654208)/(2y0²(y0 − 1728)²).

    Raises:
        DomainError: If y1 = 0, y0 = 0 or y0 = 1728 to tolerance.
    """
    M = ctx.mp
    r = _schwarzian_coefficient(y0, y1, ctx)
    y1, y2, y3 = M.mpc(y1), M.mpc(y2), M.mpc(y3)
    return y3 / y1 - M.mpf(3) / 2 * (y2 / y1) ** 2 + r * y1**2


def eta_j3(y0: Any, y1: Any, y2: Any, ctx: PrecisionContext) -> mpc:
    """Solve the differential equation for the third derivative.

    Returns (3/2)·y2²/y1 − R(y0)·y1³, so psi(y0, y1, y2, eta_j3(y0, y1, y2)) = 0.

    Raises:
        DomainError: As psi.
    """
    M = ctx.mp
    r = _schwarzian_coefficient(y0, y1, ctx)
    y1, y2 = M.mpc(y1), M.mpc(y2)
    return M.mpf(3) / 2 * y2**2 / y1 - r * y1**3


def automorphy_residual(g: GL2Q, z: HPoint, ctx: PrecisionContext) -> Any:
    """Return |j′(gz)·det(g)/(cz + d)² − j′(z)| for g ∈ SL₂(ℤ) (or ±det 1).

    Raises:
        InvalidArgumentError: If g is not integral with determinant ±1.
    """
    entries = (g.a, g.b, g.c, g.d)
    if any(x.denominator != 1 for x in entries) or abs(g.det) != 1:
        raise InvalidArgumentError(f"{g} is not in GL₂(ℤ)")
    M = ctx.mp
    image = act(g, z, ctx)
    factor = int(g.det) / (int(g.c) * M.mpc(z.value) + int(g.d)) ** 2
    return abs(jet(image, ctx).j1 * factor - jet(z, ctx).j1)
