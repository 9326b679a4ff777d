#
# Copyright (c) 2025-2026, The jclosure Authors
#
# SPDX-License-Identifier: BSD 2-Clause License
#

"""Classical modular polynomials Φ_N and the G-orbit structure of point sets.

This module provides:

- ModularPolynomial: the exact integer polynomial Φ_N(X, Y)
- compute_phi: construction of Φ_N from q-expansions
- PhiCache: a thread-safe store of computed Φ_N with the ``PHI`` text format
- phi_eval / modularly_independent: evaluation and the Φ_N-vanishing test
- phi_derivative_residual: the once-differentiated modular relation
- OrbitPartition / dim_g: union-find over modular relations between points

Φ_N is built from Φ_N(X, j(τ)) = ∏_h (X − j(hτ)) over the Hecke representatives
h = [[a, b], [0, d]] of determinant N. With t = q^(1/N) each factor is
Σ c_k ζ_d^(bk) t^(k·a²), so the product is a Laurent series in t whose
coefficients in X are polynomials in j(τ); those are recovered by leading-term
elimination against exact integer series of j^m and rounded.
"""

import math
import random
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from loguru import logger
from mpmath import mpc

from jclosure.exceptions import (
    InvalidArgumentError,
    PrecisionExhaustedError,
    UnsupportedLevelError,
)
from jclosure.halfplane import (
    GL2Q,
    HPoint,
    act,
    find_modular_relation,
    hecke_index,
    hecke_representatives,
)
from jclosure.modular_forms import j_power_series, j_series, j_value, jet
from jclosure.numerics import PrecisionContext

DEFAULT_LEVEL_CEILING = 12
ROUNDING_GATE_BITS = 16
VERIFICATION_POINTS = 3
COMPUTE_ATTEMPTS = 3


@dataclass(frozen=True, eq=True)
class ModularPolynomial:
    """The classical modular polynomial Φ_N as a sparse integer polynomial.

    Parameters:
        level: N ≥ 1.
        coeffs: Map (i, j) → coefficient of X^i·Y^j, nonzero entries only.
    """

    level: int
    coeffs: dict[tuple[int, int], int] = field(hash=False)

    def __post_init__(self):
        """Check the degree and symmetry of the polynomial.

        Raises:
            InvalidArgumentError: If the X-degree is not ψ(N) or Φ_N (N ≥ 2) is
                not symmetric.
        """
        if self.level < 1:
            raise InvalidArgumentError(f"level must be >= 1, got {self.level}")
        if self.deg_x != hecke_index(self.level):
            raise InvalidArgumentError(
                f"Φ_{self.level} must have X-degree {hecke_index(self.level)}, got {self.deg_x}"
            )
        if self.level >= 2:
            for (i, j), c in self.coeffs.items():
                if self.coeffs.get((j, i)) != c:
                    raise InvalidArgumentError(f"Φ_{self.level} is not symmetric at ({i}, {j})")

    @property
    def deg_x(self) -> int:
        """Degree in X."""
        return max((i for i, _ in self.coeffs), default=0)

    @property
    def deg_y(self) -> int:
        """Degree in Y."""
        return max((j for _, j in self.coeffs), default=0)

    @property
    def total_degree(self) -> int:
        """Largest i + j over nonzero terms."""
        return max((i + j for i, j in self.coeffs), default=0)

    def coefficient(self, i: int, j: int) -> int:
        """Return the coefficient of X^i·Y^j."""
        return self.coeffs.get((i, j), 0)

    def evaluate_exact(self, x: int, y: int) -> int:
        """Evaluate at integers with exact arithmetic."""
        return sum(c * x**i * y**j for (i, j), c in self.coeffs.items())

    def _rows(self) -> list[list[int]]:
        rows = [[0] * (self.deg_y + 1) for _ in range(self.deg_x + 1)]
        for (i, j), c in self.coeffs.items():
            rows[i][j] = c
        return rows

    def evaluate(self, x: Any, y: Any, ctx: PrecisionContext) -> mpc:
        """Evaluate at complex values by nested Horner's rule."""
        M = ctx.mp
        x, y = M.mpc(x), M.mpc(y)
        acc = M.mpc(0)
        for row in reversed(self._rows()):
            inner = M.mpc(0)
            for c in reversed(row):
                inner = inner * y + c
            acc = acc * x + inner
        return acc

    def partials(self, x: Any, y: Any, ctx: PrecisionContext) -> tuple[mpc, mpc]:
        """Evaluate (∂Φ/∂X, ∂Φ/∂Y) at complex values."""
        M = ctx.mp
        x, y = M.mpc(x), M.mpc(y)
        dx = M.fsum(i * c * x ** (i - 1) * y**j for (i, j), c in self.coeffs.items() if i)
        dy = M.fsum(j * c * x**i * y ** (j - 1) for (i, j), c in self.coeffs.items() if j)
        return M.mpc(dx), M.mpc(dy)

    def scale(self, x: Any, y: Any, ctx: PrecisionContext) -> Any:
        """Return 1 + Σ|c|·max(|x|, |y|, 1)^(i+j), the magnitude used to scale tol."""
        M = ctx.mp
        m = max(abs(M.mpc(x)), abs(M.mpc(y)), M.mpf(1))
        return 1 + M.fsum(abs(c) * m ** (i + j) for (i, j), c in self.coeffs.items())

    def vanishes_at(self, x: Any, y: Any, ctx: PrecisionContext) -> bool:
        """Whether |Φ_N(x, y)| ≤ tol·scale(x, y)."""
        return abs(self.evaluate(x, y, ctx)) <= ctx.tol * self.scale(x, y, ctx)

    def to_text(self) -> str:
        """Serialize in the ``PHI N degX degY`` … ``END`` format."""
        lines = [f"PHI {self.level} {self.deg_x} {self.deg_y}"]
        for (i, j), c in sorted(self.coeffs.items()):
            lines.append(f"{i} {j} {c}")
        lines.append("END")
        return "\n".join(lines) + "\n"

    def __str__(self) -> str:
        terms = []
        for (i, j), c in sorted(self.coeffs.items(), key=lambda t: (-t[0][0] - t[0][1], -t[0][0])):
            monomial = "*".join(
                part
                for part in (
                    f"X^{i}" if i > 1 else ("X" if i == 1 else ""),
                    f"Y^{j}" if j > 1 else ("Y" if j == 1 else ""),
                )
                if part
            )
            terms.append(f"{c}*{monomial}" if monomial else str(c))
        return " + ".join(terms).replace("+ -", "- ")


def parse_phi_text(text: str) -> list[ModularPolynomial]:
    """Parse one or more polynomials in the ``PHI`` cache format.

    Raises:
        InvalidArgumentError: If a block is malformed or inconsistent with its header.
    """
    polynomials = []
    lines = [line.strip() for line in text.splitlines() if line.strip()]
    position = 0
    while position < len(lines):
        header = lines[position].split()
        if len(header) != 4 or header[0] != "PHI":
            raise InvalidArgumentError(f"expected 'PHI N degX degY', got {lines[position]!r}")
        level, deg_x, deg_y = (int(x) for x in header[1:])
        coeffs: dict[tuple[int, int], int] = {}
        position += 1
        while position < len(lines) and lines[position] != "END":
            parts = lines[position].split()
            if len(parts) != 3:
                raise InvalidArgumentError(f"expected 'i j coefficient', got {lines[position]!r}")
            i, j, c = (int(x) for x in parts)
            if c:
                coeffs[(i, j)] = c
            position += 1
        if position == len(lines):
            raise InvalidArgumentError(f"Φ_{level} block is missing END")
        position += 1
        polynomial = ModularPolynomial(level, coeffs)
        if (polynomial.deg_x, polynomial.deg_y) != (deg_x, deg_y):
            raise InvalidArgumentError(f"Φ_{level} header degrees disagree with its terms")
        polynomials.append(polynomial)
    return polynomials


def _working_bits(N: int, ctx: PrecisionContext) -> int:
    psi_n = hecke_index(N)
    return max(ctx.bits, 64 + 24 * psi_n * math.ceil(math.log2(N + 1)))


def _verify_phi(phi: ModularPolynomial, ctx: PrecisionContext) -> None:
    rng = random.Random(phi.level)
    M = ctx.mp
    for _ in range(VERIFICATION_POINTS):
        z = HPoint(M.mpc(rng.uniform(-0.5, 0.5), rng.uniform(0.9, 1.5)))
        Nz = HPoint(z.value * phi.level)
        x, y = j_value(z, ctx), j_value(Nz, ctx)
        if not phi.vanishes_at(x, y, ctx):
            raise PrecisionExhaustedError(
                f"Φ_{phi.level} failed verification at z = {M.nstr(z.value, 8)}"
            )


def compute_phi(N: int, ctx: PrecisionContext, bits: int | None = None) -> ModularPolynomial:
    """Construct Φ_N from q-expansions.

    Args:
        N: Level, at least 1.
        ctx: Precision context used for verification.
        bits: Working precision for the expansion; chosen from ψ(N) when omitted.

    Returns:
        The verified polynomial.

    Raises:
        InvalidArgumentError: If N < 1.
        PrecisionExhaustedError: If a coefficient fails the 2^-16 rounding gate,
            the result is not symmetric, or it does not vanish at j(z), j(Nz).
    """
    if N < 1:
        raise InvalidArgumentError(f"level must be >= 1, got {N}")
    if N == 1:
        return ModularPolynomial(1, {(1, 0): 1, (0, 1): -1})

    work = ctx.with_bits(bits or _working_bits(N, ctx))
    M = work.mp
    representatives = hecke_representatives(N)
    degree = len(representatives)
    window = sum(h.a * h.a for h in representatives)
    size = 2 * window + 1
    j_coeffs = j_series(window + 2)
    logger.debug(f"Expanding Φ_{N}: {degree} factors, t-window ±{window}, {work.bits} bits")

    zero = M.mpc(0)
    product = [[zero] * size]
    product[0][window] = M.mpc(1)
    for h in representatives:
        a2 = h.a * h.a
        terms = []
        k = -1
        while k * a2 <= window:
            c = j_coeffs.coefficient(k)
            if c:
                root = M.expjpi(M.mpf(2 * ((h.b * k) % h.d)) / h.d)
                terms.append((k * a2, c * root))
            k += 1

        # Multiply by (X − f): X shifts each row up one power, −f convolves in t.
        extended = [[zero] * size for _ in range(len(product) + 1)]
        for power, row in enumerate(product):
            extended[power + 1] = [x + y for x, y in zip(extended[power + 1], row)]
            target_row = extended[power]
            for index, value in enumerate(row):
                if value == 0:
                    continue
                for shift, f in terms:
                    target = index + shift
                    if 0 <= target < size:
                        target_row[target] -= f * value
        product = extended

    gate = M.ldexp(1, -ROUNDING_GATE_BITS)
    worst = M.mpf(0)
    coeffs: dict[tuple[int, int], int] = {}
    for x_power, row in enumerate(product):
        for index in range(0, window + 1):
            if (index - window) % N:
                worst = max(worst, abs(row[index]))
        remaining = {e: row[window + N * e] for e in range(-degree, 1)}
        for m in range(degree, -1, -1):
            value = remaining[-m]
            c = int(M.nint(value.real))
            worst = max(worst, abs(value - c))
            if c:
                coeffs[(x_power, m)] = c
                powers = j_power_series(m, m + 1)
                for e in range(-m, 1):
                    remaining[e] -= c * powers.coefficient(e)

    if worst > gate:
        raise PrecisionExhaustedError(
            f"Φ_{N} rounding residual {M.nstr(worst, 5)} exceeds 2^-{ROUNDING_GATE_BITS} "
            f"at {work.bits} bits"
        )
    try:
        phi = ModularPolynomial(N, coeffs)
    except InvalidArgumentError as e:
        raise PrecisionExhaustedError(f"Φ_{N} expansion is inconsistent: {e}") from e
    _verify_phi(phi, ctx)
    logger.debug(f"Φ_{N} computed: {len(coeffs)} terms, rounding residual {M.nstr(worst, 3)}")
    return phi


class PhiCache:
    """Store of computed modular polynomials.

    Levels up to the ceiling are computed on demand, with the working precision
    doubled on each PrecisionExhaustedError; higher levels must be imported.
    When a path is given, existing content is loaded on construction and every
    newly computed level is written back.
    """

    def __init__(self, path: str | Path | None = None, *, ceiling: int = DEFAULT_LEVEL_CEILING):
        """Initialize the cache.

        Args:
            path: Optional cache file in the ``PHI`` format.
            ceiling: Largest level computed on demand.
        """
        self._lock = threading.Lock()
        self._polynomials: dict[int, ModularPolynomial] = {}
        self._path = Path(path) if path else None
        self.ceiling = ceiling
        if self._path and self._path.exists():
            self.import_file(self._path)

    @property
    def levels(self) -> list[int]:
        """Levels currently held."""
        with self._lock:
            return sorted(self._polynomials)

    def add(self, phi: ModularPolynomial) -> None:
        """Insert a polynomial, replacing any held for the same level."""
        with self._lock:
            self._polynomials[phi.level] = phi

    def get(self, N: int, ctx: PrecisionContext) -> ModularPolynomial:
        """Return Φ_N, computing it if needed.

        Raises:
            UnsupportedLevelError: If N exceeds the ceiling and is not held.
            PrecisionExhaustedError: If every precision retry fails.
        """
        with self._lock:
            held = self._polynomials.get(N)
        if held is not None:
            return held
        if N > self.ceiling:
            raise UnsupportedLevelError(
                f"Φ_{N} is above the level ceiling {self.ceiling} and not cached"
            )

        bits = _working_bits(N, ctx)
        for attempt in range(COMPUTE_ATTEMPTS):
            try:
                phi = compute_phi(N, ctx, bits=bits)
                break
            except PrecisionExhaustedError as e:
                if attempt == COMPUTE_ATTEMPTS - 1:
                    raise
                logger.debug(f"Retrying Φ_{N} at {2 * bits} bits: {e}")
                bits *= 2

        self.add(phi)
        if self._path:
            self.export_file(self._path)
        return phi

    def export_file(self, path: str | Path) -> None:
        """Write every held polynomial to a file."""
        with self._lock:
            text = "".join(self._polynomials[n].to_text() for n in sorted(self._polynomials))
        Path(path).write_text(text)

    def import_file(self, path: str | Path) -> list[int]:
        """Load polynomials from a file.

        Returns:
            The levels loaded.
        """
        loaded = parse_phi_text(Path(path).read_text())
        for phi in loaded:
            self.add(phi)
        logger.debug(f"Loaded Φ levels {[p.level for p in loaded]} from {path}")
        return [p.level for p in loaded]


_default_cache = PhiCache()


def default_phi_cache() -> PhiCache:
    """Return the process-wide cache used when no cache is passed."""
    return _default_cache


def phi_eval(
    N: int, x: Any, y: Any, ctx: PrecisionContext, cache: PhiCache | None = None
) -> mpc:
    """Evaluate Φ_N(x, y).

    Raises:
        UnsupportedLevelError: If N is above the ceiling and not cached.
    """
    phi = (cache or _default_cache).get(N, ctx)
    return phi.evaluate(x, y, ctx)


def modularly_independent(
    x: Any, y: Any, ctx: PrecisionContext, cache: PhiCache | None = None
) -> tuple[bool, int | None]:
    """Test j-values for a vanishing Φ_N with N ≤ ctx.nmax.

    The answer is one-sided: True means independent up to nmax.

    Returns:
        ``(False, N)`` with the smallest vanishing level, or ``(True, None)``.
    """
    store = cache or _default_cache
    for N in range(1, ctx.nmax + 1):
        if store.get(N, ctx).vanishes_at(x, y, ctx):
            return False, N
    return True, None


def phi_derivative_residual(
    N: int,
    z1: HPoint,
    z2: HPoint,
    g: GL2Q,
    ctx: PrecisionContext,
    cache: PhiCache | None = None,
) -> Any:
    """Return the scaled residual of the differentiated relation Φ_N(j(gz), j(z)) = 0.

    Evaluates Φ_X·j′(z1)·(gz)′ + Φ_Y·j′(z2) at z1 = g·z2, where
    (gz)′ = det(g)/(c·z2 + d)², and divides by the magnitude of the summands.
    A value ≤ tol means the relation holds to first order.
    """
    M = ctx.mp
    phi = (cache or _default_cache).get(N, ctx)
    jet1, jet2 = jet(z1, ctx), jet(z2, ctx)
    px, py = phi.partials(jet1.j, jet2.j, ctx)
    c, d = M.mpf(g.c.numerator) / g.c.denominator, M.mpf(g.d.numerator) / g.d.denominator
    det = M.mpf(g.det.numerator) / g.det.denominator
    chain = det / (c * M.mpc(z2.value) + d) ** 2
    first = px * jet1.j1 * chain
    second = py * jet2.j1
    magnitude = phi.scale(jet1.j, jet2.j, ctx) * (1 + abs(jet1.j1 * chain) + abs(jet2.j1))
    return abs(first + second) / magnitude


@dataclass(frozen=True)
class OrbitPartition:
    """Partition of point indices into G-orbits.

    Parameters:
        blocks: Blocks of indices, each sorted, ordered by smallest index.
        witnesses: (i, k) → (g, N) with act(g, z_k) ≈ z_i for each merge.
    """

    blocks: tuple[tuple[int, ...], ...]
    witnesses: dict[tuple[int, int], tuple[GL2Q, int]] = field(hash=False)

    def block_of(self, index: int) -> tuple[int, ...]:
        """Return the block containing an index."""
        for block in self.blocks:
            if index in block:
                return block
        raise InvalidArgumentError(f"index {index} is not partitioned")

    def verify(
        self, points: list[HPoint], ctx: PrecisionContext, cache: PhiCache | None = None
    ) -> bool:
        """Check every witness by the action and by Φ_N vanishing."""
        for (i, k), (g, N) in self.witnesses.items():
            image = act(g, points[k], ctx)
            if abs(image.value - points[i].value) > ctx.tol * max(1, abs(points[i].value)):
                return False
            x, y = j_value(points[i], ctx), j_value(points[k], ctx)
            if not (cache or _default_cache).get(N, ctx).vanishes_at(x, y, ctx):
                return False
        return True


def dim_g(
    points: list[HPoint], base: list[HPoint], ctx: PrecisionContext
) -> tuple[int, OrbitPartition]:
    """Count the G-orbits of ``points`` that contain no base point.

    Union-find over pairwise find_modular_relation on points followed by base;
    indices ≥ len(points) refer to base points.

    Returns:
        ``(dimension, partition)``.
    """
    everything = list(points) + list(base)
    parent = list(range(len(everything)))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    witnesses: dict[tuple[int, int], tuple[GL2Q, int]] = {}
    for i in range(len(everything)):
        for k in range(i + 1, len(everything)):
            if find(i) == find(k):
                continue
            found = find_modular_relation(everything[i], everything[k], ctx)
            if found is not None:
                witnesses[(i, k)] = found
                parent[max(find(i), find(k))] = min(find(i), find(k))

    groups: dict[int, list[int]] = {}
    for i in range(len(everything)):
        groups.setdefault(find(i), []).append(i)
    blocks = tuple(sorted(tuple(sorted(b)) for b in groups.values()))
    n = len(points)
    dimension = sum(1 for b in blocks if b[0] < n and all(i < n for i in b))
    return dimension, OrbitPartition(blocks=blocks, witnesses=witnesses)
