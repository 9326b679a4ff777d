#
# Copyright (c) 2025-2026, The jclosure Authors
#
# SPDX-License-Identifier: BSD 2-Clause License
#

"""Predimension geometry of finite configurations of half-plane points.

This module provides:

- Configuration: basis points, a base, declared relations and modular claims
- configuration_from_dict / load_configuration: the JSON configuration format
- config_validate: numeric checks of every declared relation and claim
- xi_dim / trdeg_estimate / coordinate_rank: rank computations on relation gradients
- orbit_blocks / delta: G-orbit blocks and the predimension δ = trdeg − 3·dim_G
- check_submodular / self_sufficient / ss_closure / dim_delta: brute-force
  statements over unions of orbit blocks

Relations are j-polynomials in X1..Xn (the basis points in order) followed by
X(n+1).. for declared base points, which enter as constants. Orbit blocks come
from the declared modular claims; undeclared relations between basis points make
a configuration invalid.
"""

import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any

from loguru import logger

from jclosure.exceptions import (
    DomainError,
    InvalidArgumentError,
    JClosureError,
    ParseError,
    SizeLimitError,
    ValidationError,
)
from jclosure.halfplane import GL2Q, HPoint, act, find_modular_relation, is_special, red
from jclosure.jpolynomial import (
    Generator,
    GeneratorKind,
    GeneratorValues,
    JPoly,
    jp_diff,
    jp_parse,
    partial_generator,
)
from jclosure.modular_forms import automorphy_residual, jet
from jclosure.modular_polynomials import PhiCache, default_phi_cache, phi_derivative_residual
from jclosure.numerics import PrecisionContext, parse_complex
from jclosure.types import BaseKind, ConfigurationFile

MAX_ORBIT_BLOCKS = 20
COORDINATE_KINDS = (GeneratorKind.X, GeneratorKind.J0, GeneratorKind.J1, GeneratorKind.J2)


@dataclass(frozen=True)
class ModularClaim:
    """A declared relation g·z_j = z_i between basis points (0-based indices)."""

    i: int
    j: int
    g: GL2Q


@dataclass(frozen=True)
class Configuration:
    """A finite configuration of basis points over a base.

    Parameters:
        basis_points: The intended Gcl-basis.
        base_kind: Base over which dim_G and δ are measured.
        base_points: Base points; only for BaseKind.DECLARED.
        declared_relations: Relations in X1..Xn then the base points.
        declared_modular: Claims g·z_j = z_i among basis points.
        special: Basis indices acknowledged as special points.
    """

    basis_points: tuple[HPoint, ...] = ()
    base_kind: BaseKind = BaseKind.RATIONALS
    base_points: tuple[HPoint, ...] = ()
    declared_relations: tuple[JPoly, ...] = ()
    declared_modular: tuple[ModularClaim, ...] = ()
    special: frozenset[int] = field(default_factory=frozenset)

    def __post_init__(self):
        """Check indices and the base.

        Raises:
            InvalidArgumentError: On out-of-range indices or base points given
                for a non-declared base.
        """
        if self.base_points and self.base_kind != BaseKind.DECLARED:
            raise InvalidArgumentError(f"base points given for base kind {self.base_kind.value}")
        n, total = self.n, self.n + len(self.base_points)
        for p in self.declared_relations:
            if any(v >= total for v in p.variables()):
                raise InvalidArgumentError(f"relation {p} uses a variable beyond X{total}")
        for claim in self.declared_modular:
            if not (0 <= claim.i < n and 0 <= claim.j < n):
                raise InvalidArgumentError(f"modular claim ({claim.i + 1}, {claim.j + 1}) out of range")
        if any(not 0 <= k < n for k in self.special):
            raise InvalidArgumentError("special index out of range")

    @property
    def n(self) -> int:
        """Number of basis points."""
        return len(self.basis_points)

    @property
    def all_points(self) -> tuple[HPoint, ...]:
        """Basis points followed by base points."""
        return self.basis_points + self.base_points

    def assignment(self) -> dict[int, HPoint]:
        """Return the variable assignment X_(k+1) ↦ all_points[k]."""
        return dict(enumerate(self.all_points))


def _parse_point(text: str, ctx: PrecisionContext) -> HPoint:
    try:
        return HPoint(parse_complex(text, ctx))
    except InvalidArgumentError as e:
        raise ParseError(f"point {text!r} is not in the half-plane") from e


def _parse_matrix(rows: Any) -> GL2Q:
    try:
        return GL2Q.from_rows([[Fraction(x) for x in row] for row in rows])
    except (TypeError, ValueError, ZeroDivisionError) as e:
        raise ParseError(f"not a rational matrix: {rows!r}") from e


def configuration_from_dict(data: ConfigurationFile, ctx: PrecisionContext) -> Configuration:
    """Build a configuration from its JSON form.

    Args:
        data: Parsed configuration file.
        ctx: Precision context used to read the points.

    Returns:
        The configuration (not yet validated numerically).

    Raises:
        ParseError: If a field is malformed.
        InvalidArgumentError: If an index is out of range.
    """
    if "points" not in data:
        raise ParseError("configuration needs a 'points' list")
    basis = tuple(_parse_point(text, ctx) for text in data["points"])

    base = data.get("base", "rationals")
    base_points: tuple[HPoint, ...] = ()
    if isinstance(base, dict):
        if set(base) != {"declared"}:
            raise ParseError(f"unknown base {base!r}")
        kind = BaseKind.DECLARED
        base_points = tuple(_parse_point(text, ctx) for text in base["declared"])
    else:
        try:
            kind = BaseKind(base)
        except ValueError as e:
            raise ParseError(f"unknown base {base!r}") from e
        if kind == BaseKind.DECLARED:
            raise ParseError("a declared base needs {'declared': [points...]}")

    relations = tuple(jp_parse(text) for text in data.get("relations", []))
    claims = []
    for claim in data.get("modular", []):
        try:
            i, j = int(claim["i"]) - 1, int(claim["j"]) - 1
        except (KeyError, TypeError, ValueError) as e:
            raise ParseError(f"malformed modular claim {claim!r}") from e
        claims.append(ModularClaim(i, j, _parse_matrix(claim.get("g"))))
    special = frozenset(int(k) - 1 for k in data.get("special", []))

    return Configuration(
        basis_points=basis,
        base_kind=kind,
        base_points=base_points,
        declared_relations=relations,
        declared_modular=tuple(claims),
        special=special,
    )


def load_configuration(path: str | Path, ctx: PrecisionContext) -> Configuration:
    """Read a JSON configuration file.

    Raises:
        ParseError: If the file is not valid JSON or not a configuration.
    """
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as e:
        raise ParseError(f"{path} is not valid JSON: {e}") from e
    if not isinstance(data, dict):
        raise ParseError(f"{path} does not hold a configuration object")
    return configuration_from_dict(data, ctx)


# Validation


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of a passing config_validate.

    Parameters:
        relation_residuals: |f(z)| / max(1, Σ|terms|) per declared relation.
        modular_residuals: (point distance, Φ_N residual, derivative residual) per claim.
        degenerate_points: Basis indices with j ∈ {0, 1728} or j′ = 0; all special.
        unacknowledged: Degenerate indices not listed as special in the configuration.
    """

    relation_residuals: tuple[Any, ...]
    modular_residuals: tuple[tuple[Any, Any, Any], ...]
    degenerate_points: tuple[int, ...]
    unacknowledged: tuple[int, ...]

    @property
    def flags(self) -> list[str]:
        """Human-readable notes on degenerate points."""
        return [
            f"X{k + 1} is a degenerate special point and is not acknowledged as special"
            for k in self.unacknowledged
        ]


def _relation_scale(p: JPoly, values: GeneratorValues, ctx: PrecisionContext) -> Any:
    total = ctx.mp.mpf(0)
    for monomial, c in p.terms.items():
        term = abs(c.to_mpc(ctx))
        for g, e in monomial:
            term *= abs(values.value(g)) ** e
        total += term
    return total


def _degenerate(z: HPoint, ctx: PrecisionContext) -> bool:
    values = jet(z, ctx)
    size = max(1, abs(values.j))
    return (
        abs(values.j) <= ctx.tol
        or abs(values.j - 1728) <= 1728 * ctx.tol
        or abs(values.j1) <= ctx.tol * size
    )


def _check_claim(
    c: Configuration,
    claim: ModularClaim,
    ctx: PrecisionContext,
    cache: PhiCache,
    violations: list[str],
) -> tuple[Any, Any, Any]:
    M = ctx.mp
    zi, zj = c.basis_points[claim.i], c.basis_points[claim.j]
    label = f"claim {claim.g}·X{claim.j + 1} = X{claim.i + 1}"
    image = act(claim.g, zj, ctx)
    distance = abs(image.value - zi.value) / max(1, abs(zi.value))
    if distance > ctx.tol:
        violations.append(f"{label}: the action misses by {M.nstr(distance, 5)}")

    reduced = red(claim.g)
    level = reduced.N
    phi_residual = derivative_residual = M.mpf(0)
    try:
        phi = cache.get(level, ctx)
        x, y = jet(zi, ctx).j, jet(zj, ctx).j
        phi_residual = abs(phi.evaluate(x, y, ctx)) / phi.scale(x, y, ctx)
        if not phi.vanishes_at(x, y, ctx):
            violations.append(f"{label}: Φ_{level} does not vanish ({M.nstr(phi_residual, 5)})")
        derivative_residual = phi_derivative_residual(level, zi, zj, claim.g, ctx, cache)
        if derivative_residual > ctx.tol:
            violations.append(
                f"{label}: differentiated Φ_{level} relation fails ({M.nstr(derivative_residual, 5)})"
            )
        if level == 1:
            automorphy = automorphy_residual(reduced.to_gl2q(), zj, ctx)
            if automorphy > ctx.tol * max(1, abs(jet(zj, ctx).j1)):
                violations.append(f"{label}: j′ automorphy fails ({M.nstr(automorphy, 5)})")
    except JClosureError as e:
        violations.append(f"{label}: {e}")
    return distance, phi_residual, derivative_residual


def config_validate(
    c: Configuration, ctx: PrecisionContext, cache: PhiCache | None = None
) -> ValidationReport:
    """Check a configuration against every declared relation and claim.

    Checks, in order: declared relation residuals (scaled by the size of their
    terms), each modular claim by the action, by Φ_N vanishing at
    N = det(red(g)) and by the differentiated relation, the absence of
    undeclared modular relations between basis points up to ctx.nmax, and
    degenerate points (j ∈ {0, 1728} or j′ = 0), which must be special.
    Degenerate special points that the configuration does not acknowledge are
    reported as flags, not violations.

    Args:
        c: The configuration.
        ctx: Precision context.
        cache: Φ_N store; the process-wide one when omitted.

    Returns:
        The residuals and flags of a passing configuration.

    Raises:
        ValidationError: Listing every failed check.
    """
    store = cache or default_phi_cache()
    M = ctx.mp
    violations: list[str] = []

    values = GeneratorValues(c.assignment(), ctx)
    relation_residuals = []
    for p in c.declared_relations:
        try:
            residual = abs(values.evaluate(p)) / max(1, _relation_scale(p, values, ctx))
        except DomainError as e:
            violations.append(f"relation {p}: {e}")
            continue
        relation_residuals.append(residual)
        if residual > ctx.tol:
            violations.append(f"relation {p} does not vanish (residual {M.nstr(residual, 5)})")

    modular_residuals = tuple(
        _check_claim(c, claim, ctx, store, violations) for claim in c.declared_modular
    )

    blocks = orbit_blocks(c)
    for b1, b2 in itertools.combinations(range(len(blocks)), 2):
        for i in blocks[b1]:
            found = None
            for k in blocks[b2]:
                found = find_modular_relation(c.basis_points[i], c.basis_points[k], ctx)
                if found is not None:
                    violations.append(
                        f"not a basis: X{i + 1} = {found[0]}·X{k + 1} (level {found[1]}) is undeclared"
                    )
                    break
            if found is not None:
                break

    degenerate, unacknowledged = [], []
    for k, z in enumerate(c.basis_points):
        special = is_special(z, ctx)
        if k in c.special and special is None:
            violations.append(f"X{k + 1} is declared special but satisfies no integer quadratic")
        if not _degenerate(z, ctx):
            continue
        if special is None:
            violations.append(f"X{k + 1} is degenerate (j ∈ {{0, 1728}} or j′ = 0) but not special")
            continue
        degenerate.append(k)
        if k not in c.special:
            unacknowledged.append(k)

    if violations:
        logger.debug(f"Configuration invalid: {violations}")
        raise ValidationError(f"configuration fails {len(violations)} check(s)", violations)
    report = ValidationReport(
        relation_residuals=tuple(relation_residuals),
        modular_residuals=modular_residuals,
        degenerate_points=tuple(degenerate),
        unacknowledged=tuple(unacknowledged),
    )
    for flag in report.flags:
        logger.warning(flag)
    return report


# Ranks


def _numeric_rank(rows: list[list[Any]], ctx: PrecisionContext) -> int:
    if not rows or not rows[0]:
        return 0
    M = ctx.mp
    singular = M.svd_c(M.matrix(rows), compute_uv=False)
    values = [abs(singular[k]) for k in range(min(len(rows), len(rows[0])))]
    threshold = M.ldexp(1, -(ctx.bits // 4)) * max(M.mpf(1), max(values))
    return sum(1 for s in values if s > threshold)


@dataclass(frozen=True)
class XiReport:
    """Dimension of the j-derivation space of a configuration.

    Parameters:
        n_generators: Number of basis points.
        relation_rank: Numeric rank of the j-chained relation gradients.
        xi_dim: n_generators − relation_rank.
    """

    n_generators: int
    relation_rank: int
    xi_dim: int


def xi_dim(c: Configuration, ctx: PrecisionContext) -> XiReport:
    """Return n − rank[∂f/∂X_k(z)] over the declared relations f.

    The partials are j-derivations, so ∂j(X_k) = j′(X_k) and so on; base
    points are constants.

    Raises:
        DomainError: If a j‴ entry is needed at a degenerate point.
    """
    values = GeneratorValues(c.assignment(), ctx)
    width = len(c.all_points)
    rows = [
        [values.evaluate(jp_diff(p.with_nvars(width), k)) for k in range(c.n)]
        for p in c.declared_relations
    ]
    rank = _numeric_rank(rows, ctx) if c.n else 0
    return XiReport(n_generators=c.n, relation_rank=rank, xi_dim=c.n - rank)


def _coordinate_generators(k: int) -> list[Generator]:
    return [Generator(kind, k) for kind in COORDINATE_KINDS]


def _coordinate_rows(c: Configuration, ctx: PrecisionContext) -> list[list[Any]]:
    """Plain gradients of the relations in (z_k, j, j′, j″) for every basis point."""
    for p in c.declared_relations:
        for g in p.generators():
            if g.var < c.n and (g.twist is not None or g.kind == GeneratorKind.W):
                raise InvalidArgumentError(
                    f"relation {p} uses the twisted symbol {g}; state it in plain coordinates"
                )
    values = GeneratorValues(c.assignment(), ctx)
    columns = [g for k in range(c.n) for g in _coordinate_generators(k)]
    return [[values.evaluate(partial_generator(p, g)) for g in columns] for p in c.declared_relations]


def trdeg_estimate(c: Configuration, ctx: PrecisionContext) -> int:
    """Estimate the transcendence degree of the coordinates of the basis points.

    Returns 4n minus the numeric rank of the declared relations' gradient in the
    coordinates (z_k, j(z_k), j′(z_k), j″(z_k)). Exact at smooth points of the
    declared variety.

    Raises:
        InvalidArgumentError: If a relation uses twisted symbols of basis points.
    """
    return 4 * c.n - _numeric_rank(_coordinate_rows(c, ctx), ctx)


def coordinate_rank(c: Configuration, i: int, ctx: PrecisionContext) -> int:
    """Rank of the relation gradients restricted to the four coordinates of basis point i."""
    if not 0 <= i < c.n:
        raise InvalidArgumentError(f"basis index {i} out of range")
    rows = [row[4 * i : 4 * i + 4] for row in _coordinate_rows(c, ctx)]
    return _numeric_rank(rows, ctx)


# Predimension


def orbit_blocks(c: Configuration) -> tuple[tuple[int, ...], ...]:
    """Partition basis indices into blocks joined by declared modular claims.

    Blocks are sorted and ordered by their smallest index.
    """
    parent = list(range(c.n))

    def find(k: int) -> int:
        while parent[k] != k:
            parent[k] = parent[parent[k]]
            k = parent[k]
        return k

    for claim in c.declared_modular:
        a, b = find(claim.i), find(claim.j)
        parent[max(a, b)] = min(a, b)
    groups: dict[int, list[int]] = {}
    for k in range(c.n):
        groups.setdefault(find(k), []).append(k)
    return tuple(sorted(tuple(sorted(g)) for g in groups.values()))


@dataclass(frozen=True)
class DeltaReport:
    """Predimension of a configuration.

    Parameters:
        trdeg_estimate: Estimated transcendence degree of the coordinates.
        dim_g: Number of orbit blocks not tied to the base.
        delta: trdeg_estimate − 3·dim_g.
    """

    trdeg_estimate: int
    dim_g: int
    delta: int


class _DeltaEngine:
    """δ of unions of orbit blocks, sharing one gradient evaluation."""

    def __init__(self, c: Configuration, ctx: PrecisionContext):
        self.c = c
        self.ctx = ctx
        self.blocks = orbit_blocks(c)
        self.rows = _coordinate_rows(c, ctx)
        self.supports = [
            frozenset(v for v in p.variables() if v < c.n) for p in c.declared_relations
        ]
        anchored = self._anchored()
        self.free = [not any(k in anchored for k in block) for block in self.blocks]
        self._memo: dict[frozenset[int], DeltaReport] = {}

    def _anchored(self) -> set[int]:
        c, ctx = self.c, self.ctx
        match c.base_kind:
            case BaseKind.RATIONALS:
                return set()
            case BaseKind.SPECIAL:
                return {
                    k
                    for k, z in enumerate(c.basis_points)
                    if k in c.special or is_special(z, ctx) is not None
                }
            case BaseKind.DECLARED:
                return {
                    k
                    for k, z in enumerate(c.basis_points)
                    if any(find_modular_relation(z, w, ctx) is not None for w in c.base_points)
                }

    def check_subset(self, subset: Any) -> frozenset[int]:
        chosen = frozenset(subset)
        if any(not 0 <= b < len(self.blocks) for b in chosen):
            raise InvalidArgumentError(f"orbit block index out of range in {sorted(chosen)}")
        return chosen

    def report(self, chosen: frozenset[int]) -> DeltaReport:
        if chosen in self._memo:
            return self._memo[chosen]
        points = sorted(k for b in chosen for k in self.blocks[b])
        inside = set(points)
        columns = [4 * k + t for k in points for t in range(4)]
        rows = [
            [row[col] for col in columns]
            for row, support in zip(self.rows, self.supports)
            if support <= inside
        ]
        trdeg = 4 * len(points) - (_numeric_rank(rows, self.ctx) if columns else 0)
        dim = sum(1 for b in chosen if self.free[b])
        result = DeltaReport(trdeg_estimate=trdeg, dim_g=dim, delta=trdeg - 3 * dim)
        self._memo[chosen] = result
        return result

    def require_enumerable(self) -> None:
        if len(self.blocks) > MAX_ORBIT_BLOCKS:
            raise SizeLimitError(
                f"{len(self.blocks)} orbit blocks exceed the enumeration cap of {MAX_ORBIT_BLOCKS}"
            )

    def extensions(self, chosen: frozenset[int]):
        """Yield supersets of chosen, smallest first, then lexicographically."""
        rest = [b for b in range(len(self.blocks)) if b not in chosen]
        for size in range(len(rest) + 1):
            for extra in itertools.combinations(rest, size):
                yield chosen | frozenset(extra)


def delta(c: Configuration, ctx: PrecisionContext) -> DeltaReport:
    """Return δ = trdeg_estimate − 3·dim_G of the whole configuration.

    dim_G counts orbit blocks; for a SPECIAL base blocks containing a special
    point do not count, for a DECLARED base blocks related to a base point do
    not count.
    """
    engine = _DeltaEngine(c, ctx)
    return engine.report(frozenset(range(len(engine.blocks))))


@dataclass(frozen=True)
class SubmodularityReport:
    """The four predimensions of A∪B, A∩B, A and B."""

    delta_union: int
    delta_intersection: int
    delta_a: int
    delta_b: int

    @property
    def holds(self) -> bool:
        """Whether δ(A∪B) + δ(A∩B) ≤ δ(A) + δ(B)."""
        return self.delta_union + self.delta_intersection <= self.delta_a + self.delta_b


def _reindex(p: JPoly, mapping: dict[int, int], nvars: int) -> JPoly:
    result = JPoly({}, nvars)
    for monomial, coefficient in p.terms.items():
        term = JPoly.constant(coefficient, nvars)
        for g, e in monomial:
            term = term * JPoly.generator(Generator(g.kind, mapping[g.var], g.twist)) ** e
        result = result + term
    return result.with_nvars(nvars)


def _same_point(z: HPoint, w: HPoint, ctx: PrecisionContext) -> bool:
    return abs(z.value - w.value) <= ctx.tol * max(1, abs(w.value))


def _restrict(
    sources: list[tuple[Configuration, dict[int, int]]],
    points: list[HPoint],
    base: Configuration,
) -> Configuration:
    """Collect relations, claims and special marks of several configurations.

    Each mapping sends a source basis index to its index in ``points``; items
    touching an unmapped basis index are dropped.
    """
    n = len(points)
    relations, claims, special = [], [], set()
    for c, mapping in sources:
        full = dict(mapping)
        full.update({c.n + t: n + t for t in range(len(c.base_points))})
        for p in c.declared_relations:
            if all(v in full for v in p.variables()):
                reindexed = _reindex(p, full, n + len(base.base_points))
                if reindexed not in relations:
                    relations.append(reindexed)
        for claim in c.declared_modular:
            if claim.i in mapping and claim.j in mapping:
                claims.append(ModularClaim(mapping[claim.i], mapping[claim.j], claim.g))
        special.update(mapping[k] for k in c.special if k in mapping)
    return Configuration(
        basis_points=tuple(points),
        base_kind=base.base_kind,
        base_points=base.base_points,
        declared_relations=tuple(relations),
        declared_modular=tuple(claims),
        special=frozenset(special),
    )


def check_submodular(
    ca: Configuration, cb: Configuration, ctx: PrecisionContext
) -> SubmodularityReport:
    """Compare δ(A∪B) + δ(A∩B) with δ(A) + δ(B).

    Points are identified numerically; the union keeps A's order then B's new
    points. Relations and claims of both configurations are carried to the
    union, and to the intersection when all their points survive.

    Raises:
        InvalidArgumentError: If the configurations do not share a base.
    """
    same_base = ca.base_kind == cb.base_kind and len(ca.base_points) == len(cb.base_points)
    if not same_base or not all(
        _same_point(z, w, ctx) for z, w in zip(ca.base_points, cb.base_points)
    ):
        raise InvalidArgumentError("configurations must share a base")

    union = list(ca.basis_points)
    map_b_union: dict[int, int] = {}
    for k, z in enumerate(cb.basis_points):
        match = next((t for t, w in enumerate(union) if _same_point(z, w, ctx)), None)
        if match is None:
            union.append(z)
            match = len(union) - 1
        map_b_union[k] = match
    identity_a = {k: k for k in range(ca.n)}
    c_union = _restrict([(ca, identity_a), (cb, map_b_union)], union, ca)

    shared = sorted(set(map_b_union.values()) & set(identity_a))
    position = {k: t for t, k in enumerate(shared)}
    map_a_meet = {k: position[k] for k in shared}
    map_b_meet = {k: position[v] for k, v in map_b_union.items() if v in position}
    c_meet = _restrict(
        [(ca, map_a_meet), (cb, map_b_meet)], [ca.basis_points[k] for k in shared], ca
    )

    report = SubmodularityReport(
        delta_union=delta(c_union, ctx).delta,
        delta_intersection=delta(c_meet, ctx).delta,
        delta_a=delta(ca, ctx).delta,
        delta_b=delta(cb, ctx).delta,
    )
    if not report.holds:
        logger.warning(f"Submodularity fails on the declared configurations: {report}")
    return report


def self_sufficient(sub: Any, c: Configuration, ctx: PrecisionContext) -> bool:
    """Whether δ(sub ∪ S) − δ(sub) ≥ 0 for every union S of the remaining orbit blocks.

    Args:
        sub: Orbit block indices (into orbit_blocks(c)).
        c: The configuration.
        ctx: Precision context.

    Raises:
        SizeLimitError: If c has more than 20 orbit blocks.
    """
    engine = _DeltaEngine(c, ctx)
    engine.require_enumerable()
    chosen = engine.check_subset(sub)
    base = engine.report(chosen).delta
    for extension in engine.extensions(chosen):
        if engine.report(extension).delta - base < 0:
            logger.debug(f"Blocks {sorted(extension)} lower δ below that of {sorted(chosen)}")
            return False
    return True


def ss_closure(
    x: Any, c: Configuration, ctx: PrecisionContext
) -> tuple[tuple[int, ...], DeltaReport]:
    """Return the union of orbit blocks containing x with the least δ.

    Ties go to the smaller union, then to the lexicographically first.

    Raises:
        SizeLimitError: If c has more than 20 orbit blocks.
    """
    engine = _DeltaEngine(c, ctx)
    engine.require_enumerable()
    chosen = engine.check_subset(x)
    best, best_report = chosen, engine.report(chosen)
    for extension in engine.extensions(chosen):
        candidate = engine.report(extension)
        if candidate.delta < best_report.delta:
            best, best_report = extension, candidate
    return tuple(sorted(best)), best_report


def dim_delta(x: Any, c: Configuration, ctx: PrecisionContext) -> int:
    """Return δ of ss_closure(x).

    A negative value is returned as-is with a warning: configurations coming
    from actual points of the half-plane have δ ≥ 0.
    """
    _, report = ss_closure(x, c, ctx)
    if report.delta < 0:
        logger.warning(
            f"dim_delta is {report.delta} < 0; the declared relations are stronger than "
            "any configuration of actual points allows"
        )
    return report.delta
