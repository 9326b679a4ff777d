#
# Copyright (c) 2025-2026, The jclosure Authors
#
# SPDX-License-Identifier: BSD 2-Clause License
#

"""Acceptance suite behind ``jclosure selftest``.

This module provides run_selftest, which checks:

- Classical special values of j, each confirmed by an integer relation
- Identities: SL₂(ℤ) invariance, Schwarz reflection, the differential
  equation, the closed form of j‴ and finite-difference derivatives
- Φ₁, Φ₂, Φ₃ against (j(Nz), j(z)) and Φ₂(287496, 1728) = 0 exactly
- Khovanskii certificates, the iterated system and the exponential curves
- Rank, δ, submodularity and closure on randomized configurations that pass
  config_validate
- Flattening of nested j-expressions

Every randomized sample is drawn from the workbench seed and nothing
time-dependent is reported, so two runs print the same document.
"""

import itertools
import random
from dataclasses import replace
from fractions import Fraction
from typing import Any

from loguru import logger

from jclosure.closure_geometry import (
    Configuration,
    ModularClaim,
    check_submodular,
    config_validate,
    delta,
    dim_delta,
    orbit_blocks,
    ss_closure,
    trdeg_estimate,
    xi_dim,
)
from jclosure.exceptions import ValidationError
from jclosure.halfplane import GL2Q, HPoint, act, reduce_fundamental
from jclosure.jpolynomial import (
    GaussianRational,
    Generator,
    GeneratorKind,
    GeneratorValues,
    JPoly,
    flatten,
    jp_diff,
    jp_parse,
    partial_generator,
)
from jclosure.khovanskii import (
    KhovanskiiSystem,
    ec_exp_solve,
    newton_solve,
    parse_curve,
    verify_certificate,
)
from jclosure.modular_forms import eta_j3, jet, psi
from jclosure.numerics import PrecisionContext, min_poly_guess
from jclosure.serialization import JsonAdapter
from jclosure.workbench import Workbench

SPECIAL_VALUES = (
    ("i", "i", 1728),
    ("rho", "rho", 0),
    ("2i", "2*i", 287496),
    ("i*sqrt(2)", "i*sqrt(2)", 8000),
    ("(1+sqrt(-163))/2", "(1+sqrt(-163))/2", -262537412640768000),
)

COORDINATES = (GeneratorKind.X, GeneratorKind.J0, GeneratorKind.J1, GeneratorKind.J2)


def _gate(ctx: PrecisionContext, exponent_at_256: int) -> Any:
    """2^-e where e scales linearly with the precision, e = exponent_at_256 at 256 bits."""
    return ctx.mp.ldexp(1, -(ctx.bits * exponent_at_256 // 256))


def _random_point(rng: random.Random, ctx: PrecisionContext) -> HPoint:
    x = Fraction(rng.randint(-500, 500), 1000)
    y = Fraction(rng.randint(600, 2000), 1000)
    M = ctx.mp
    return HPoint(M.mpc(M.mpf(x.numerator) / x.denominator, M.mpf(y.numerator) / y.denominator))


def _generic_points(rng: random.Random, ctx: PrecisionContext, count: int) -> list[HPoint]:
    """Points x + e^(m/10)·i with rational x and distinct m in 1..8.

    No two of them are related by a rational Möbius map and none is quadratic.
    """
    M = ctx.mp
    exponents = rng.sample(range(1, 9), count)
    points = []
    for m in exponents:
        x = Fraction(rng.randint(-500, 500), 1000)
        points.append(HPoint(M.mpc(M.mpf(x.numerator) / x.denominator, M.exp(M.mpf(m) / 10))))
    return points


def _random_sl2z(rng: random.Random) -> GL2Q:
    s = GL2Q.from_rows([[0, -1], [1, 0]])
    g = GL2Q.identity()
    for _ in range(rng.randint(1, 3)):
        g = g @ GL2Q.from_rows([[1, rng.randint(-2, 2)], [0, 1]]) @ s
    return g


# Sections


def _special_values(bench: Workbench, adapter: JsonAdapter) -> dict:
    ctx = bench.ctx
    relation_ctx = replace(ctx, height_bound=10**18, tol=None if ctx.tol_derived else ctx.tol)
    results, passed = [], True
    for name, text, expected in SPECIAL_VALUES:
        value = bench.evaluate(text).j
        error = abs(value - expected)
        ok = error <= _gate(ctx, 192) * max(1, abs(expected))
        relation = min_poly_guess(value, 1, relation_ctx)
        confirmed = relation is not None and relation[1] == -expected * relation[0]
        passed = passed and ok and confirmed
        results.append(
            {"z": name, "j": adapter.complex(value), "error": adapter.real(error), "confirmed": confirmed}
        )
    return {"passed": passed, "values": results}


def _identities(bench: Workbench, adapter: JsonAdapter, count: int, rng: random.Random) -> dict:
    ctx = bench.ctx
    M = ctx.mp
    gate = _gate(ctx, 100)
    fd_gate = _gate(ctx, 64)
    h = M.ldexp(1, -(3 * ctx.bits // 8))
    worst = {"invariance": M.mpf(0), "reflection": M.mpf(0), "psi": M.mpf(0), "eta": M.mpf(0), "fd": M.mpf(0)}
    for _ in range(count):
        z = _random_point(rng, ctx)
        values = jet(z, ctx)
        size = max(1, abs(values.j))

        image = jet(act(_random_sl2z(rng), z, ctx), ctx)
        worst["invariance"] = max(worst["invariance"], abs(image.j - values.j) / size)
        mirrored = jet(z.conjugate(), ctx)
        worst["reflection"] = max(worst["reflection"], abs(mirrored.j - values.j.conjugate()) / size)

        residual = psi(values.j, values.j1, values.j2, values.j3, ctx)
        magnitude = abs(values.j3 / values.j1) + abs(values.j2 / values.j1) ** 2
        worst["psi"] = max(worst["psi"], abs(residual) / max(1, magnitude))
        solved = eta_j3(values.j, values.j1, values.j2, ctx)
        worst["eta"] = max(worst["eta"], abs(solved - values.j3) / max(1, abs(values.j3)))

        ahead = jet(HPoint(z.value + h), ctx).as_tuple()
        behind = jet(HPoint(z.value - h), ctx).as_tuple()
        exact = values.as_tuple()
        for order in range(3):
            estimate = (ahead[order] - behind[order]) / (2 * h)
            error = abs(estimate - exact[order + 1]) / max(1, abs(exact[order + 1]))
            worst["fd"] = max(worst["fd"], error)

    passed = all(worst[key] <= gate for key in ("invariance", "reflection", "psi", "eta"))
    passed = passed and worst["fd"] <= fd_gate
    return {
        "passed": passed,
        "points": count,
        "worst": {key: adapter.real(value) for key, value in sorted(worst.items())},
    }


def _modular_polynomials(bench: Workbench, adapter: JsonAdapter, count: int, rng: random.Random) -> dict:
    ctx = bench.ctx
    phi1 = bench.phi(1)
    identity_ok = phi1.coeffs == {(1, 0): 1, (0, 1): -1}
    checks = {}
    for level in (2, 3):
        phi = bench.phi(level)
        vanishing = True
        for _ in range(count):
            z = _random_point(rng, ctx)
            scaled = HPoint(z.value * level)
            vanishing = vanishing and phi.vanishes_at(jet(scaled, ctx).j, jet(z, ctx).j, ctx)
        checks[f"phi{level}"] = vanishing
    exact = bench.phi(2).evaluate_exact(287496, 1728) == 0
    return {
        "passed": identity_ok and exact and all(checks.values()),
        "phi1_is_x_minus_y": identity_ok,
        "phi2_at_2i_i_exact": exact,
        "random_vanishing": checks,
        "samples": count,
    }


def _khovanskii(bench: Workbench, adapter: JsonAdapter, levels: tuple[int, ...]) -> dict:
    ctx = bench.ctx
    M = ctx.mp
    gate = _gate(ctx, 100)
    two_i = HPoint(M.mpc(0, 2))
    regular = KhovanskiiSystem.from_strings(["j(X1) - 287496"])
    regular_certified = verify_certificate(regular, {0: two_i}, ctx)
    found = newton_solve(
        regular, bench.solve_config(extra_starts=((M.mpc(0.05, 2.1),),), max_solutions=1), ctx
    )
    regular_found = bool(found) and found[0].nonsingular
    if regular_found:
        reduced, _ = reduce_fundamental(HPoint(found[0].points[0]), ctx)
        regular_found = abs(reduced.value - two_i.value) <= ctx.tol * 4

    singular = KhovanskiiSystem.from_strings(["j(X1) - 1728"])
    singular_rejected = not verify_certificate(singular, {0: HPoint(M.mpc(0, 1))}, ctx)
    hits = newton_solve(singular, bench.solve_config(extra_starts=((M.mpc(0.05, 1.05),),)), ctx)
    singular_rejected = singular_rejected and len(hits) == 1 and not hits[0].nonsingular

    iterated = []
    iterated_ok = True
    for n in levels:
        _, solutions, certificates, scalar = bench.iterated(n, 10, max_solutions=1)
        ok = bool(solutions) and certificates[0] and solutions[0].residual <= gate and scalar[0] <= gate
        iterated_ok = iterated_ok and ok
        iterated.append(
            {
                "n": n,
                "certified": ok,
                "z": adapter.complex(solutions[0].points[0]) if solutions else None,
            }
        )

    exp_ok = True
    exp_results = []
    for text, expected in (("X*Y - 1", M.lambertw(1)), ("Y - X", -M.lambertw(-1))):
        solutions = ec_exp_solve(parse_curve(text), bench.solve_config(), ctx)
        match = any(abs(s.points[0] - expected) <= gate for s in solutions)
        exp_ok = exp_ok and match
        exp_results.append({"curve": text, "expected": adapter.complex(expected), "found": match})

    return {
        "passed": regular_certified and regular_found and singular_rejected and iterated_ok and exp_ok,
        "j_287496_certified": regular_certified and regular_found,
        "j_1728_rejected": singular_rejected,
        "j_1728_orbits": len(hits),
        "iterated": iterated,
        "exp_curves": exp_results,
    }


def _relation(terms: list[tuple[int, tuple[Generator, ...]]]) -> JPoly:
    p = JPoly({})
    for coefficient, generators in terms:
        term = JPoly.constant(coefficient)
        for g in generators:
            term = term * JPoly.generator(g)
        p = p + term
    return p


def _random_relation(rng: random.Random, variables: list[int]) -> JPoly:
    terms = []
    for _ in range(rng.randint(1, 3)):
        degree = rng.randint(1, 2)
        generators = tuple(
            Generator(rng.choice(COORDINATES), rng.choice(variables)) for _ in range(degree)
        )
        terms.append((rng.choice([-3, -2, -1, 1, 2, 3]), generators))
    return _relation(terms)


def _eliminate(rows: list[list[Any]], ctx: PrecisionContext) -> int:
    """Rank by Gaussian elimination with partial pivoting."""
    if not rows:
        return 0
    M = ctx.mp
    matrix = [list(row) for row in rows]
    scale = max((abs(x) for row in matrix for x in row), default=M.mpf(0))
    threshold = M.ldexp(1, -(ctx.bits // 4)) * max(1, scale)
    rank, column = 0, 0
    width = len(matrix[0])
    while rank < len(matrix) and column < width:
        pivot = max(range(rank, len(matrix)), key=lambda r: abs(matrix[r][column]))
        if abs(matrix[pivot][column]) <= threshold:
            column += 1
            continue
        matrix[rank], matrix[pivot] = matrix[pivot], matrix[rank]
        for r in range(rank + 1, len(matrix)):
            factor = matrix[r][column] / matrix[rank][column]
            matrix[r] = [a - factor * b for a, b in zip(matrix[r], matrix[rank])]
        rank += 1
        column += 1
    return rank


def _oracle_rows(c: Configuration, ctx: PrecisionContext, chained: bool) -> list[list[Any]]:
    values = GeneratorValues(c.assignment(), ctx)
    if chained:
        return [[values.evaluate(jp_diff(p.with_nvars(c.n), k)) for k in range(c.n)] for p in c.declared_relations]
    columns = [Generator(kind, k) for k in range(c.n) for kind in COORDINATES]
    return [[values.evaluate(partial_generator(p, g)) for g in columns] for p in c.declared_relations]


def _vanishing(p: JPoly, points: list[HPoint], ctx: PrecisionContext) -> JPoly:
    """Subtract from p its value at the points, rounded exactly to a dyadic constant."""
    value = GeneratorValues(dict(enumerate(points)), ctx).evaluate(p)
    return p - JPoly.constant(GaussianRational.from_mpc(value, ctx))


def _random_configuration(rng: random.Random, ctx: PrecisionContext) -> Configuration:
    n = rng.randint(1, 3)
    points = _generic_points(rng, ctx, n)
    claims = []
    if n >= 2 and rng.random() < 0.5:
        doubling = GL2Q.from_rows([[2, 0], [0, 1]])
        points[1] = act(doubling, points[0], ctx)
        claims.append(ModularClaim(1, 0, doubling))
    relations = [
        _vanishing(_random_relation(rng, list(range(n))), points, ctx) for _ in range(rng.randint(0, 3))
    ]
    if len(relations) >= 2:
        relations.append(relations[0] + relations[1].scale(GaussianRational(Fraction(2))))
    return Configuration(
        basis_points=tuple(points), declared_relations=tuple(relations), declared_modular=tuple(claims)
    )


def _is_valid(c: Configuration, bench: Workbench) -> bool:
    try:
        config_validate(c, bench.ctx, bench.phi_cache)
    except ValidationError as e:
        logger.warning(f"Selftest fixture is not a valid configuration: {e.violations}")
        return False
    return True


def _closure_geometry(bench: Workbench, adapter: JsonAdapter, count: int, rng: random.Random) -> dict:
    ctx = bench.ctx
    oracle_ctx = ctx.with_bits(2 * ctx.bits)
    failures = []

    for index in range(count):
        c = _random_configuration(rng, ctx)
        if not _is_valid(c, bench):
            failures.append(f"rank fixture {index} is invalid")
            continue
        lifted = replace(c, basis_points=tuple(HPoint(oracle_ctx.mpc(z.value)) for z in c.basis_points))
        coordinate_rank = _eliminate(_oracle_rows(lifted, oracle_ctx, chained=False), oracle_ctx)
        chained_rank = _eliminate(_oracle_rows(lifted, oracle_ctx, chained=True), oracle_ctx)
        trdeg = trdeg_estimate(c, ctx)
        report = delta(c, ctx)
        xi = xi_dim(c, ctx)
        expected_delta = (4 * c.n - coordinate_rank) - 3 * len(orbit_blocks(c))
        if trdeg != 4 * c.n - coordinate_rank or xi.relation_rank != chained_rank or report.delta != expected_delta:
            failures.append(f"rank fixture {index}")

    for index in range(count):
        pool = _generic_points(rng, ctx, rng.randint(2, 4))
        local = [
            [_vanishing(_random_relation(rng, [0]), [z], ctx) for _ in range(rng.randint(0, 2))] for z in pool
        ]

        def build(indices: list[int]) -> Configuration:
            relations = []
            for position, k in enumerate(indices):
                for p in local[k]:
                    relations.append(_shift(p, position))
            return Configuration(
                basis_points=tuple(pool[k] for k in indices), declared_relations=tuple(relations)
            )

        a = sorted(rng.sample(range(len(pool)), rng.randint(1, len(pool))))
        b = sorted(rng.sample(range(len(pool)), rng.randint(1, len(pool))))
        ca, cb = build(a), build(b)
        if not (_is_valid(ca, bench) and _is_valid(cb, bench)):
            failures.append(f"submodular fixture {index} is invalid")
        elif not check_submodular(ca, cb, ctx).holds:
            failures.append(f"submodular fixture {index}")

    closures = max(1, count // 5)
    for index in range(closures):
        c = _random_configuration(rng, ctx)
        if not _is_valid(c, bench):
            failures.append(f"closure fixture {index} is invalid")
            continue
        blocks = orbit_blocks(c)
        start = tuple(b for b in range(len(blocks)) if rng.random() < 0.5)
        best = None
        for size in range(len(blocks) + 1):
            for extra in itertools.combinations([b for b in range(len(blocks)) if b not in start], size):
                chosen = tuple(sorted(start + extra))
                value = _oracle_delta(c, blocks, chosen, oracle_ctx)
                if best is None or value < best[1]:
                    best = (chosen, value)
        closure, report = ss_closure(start, c, ctx)
        if best is None or closure != best[0] or report.delta != best[1]:
            failures.append(f"closure fixture {index}")

    singleton = Configuration(basis_points=tuple(_generic_points(rng, ctx, 1)))
    generic_ok = dim_delta([0], singleton, ctx) == 1 and dim_delta([], Configuration(), ctx) == 0
    if not generic_ok:
        failures.append("dim_delta of the generic singleton or the empty configuration")

    return {
        "passed": not failures,
        "fixtures": count,
        "closure_fixtures": closures,
        "failures": failures,
    }


def _shift(p: JPoly, var: int) -> JPoly:
    """Move a one-variable relation from X1 to X(var+1)."""
    terms = []
    for monomial, coefficient in p.terms.items():
        generators = tuple(Generator(g.kind, var, g.twist) for g, e in monomial for _ in range(e))
        terms.append((coefficient, generators))
    result = JPoly({})
    for coefficient, generators in terms:
        term = JPoly.constant(coefficient)
        for g in generators:
            term = term * JPoly.generator(g)
        result = result + term
    return result


def _oracle_delta(
    c: Configuration, blocks: tuple[tuple[int, ...], ...], chosen: tuple[int, ...], ctx: PrecisionContext
) -> int:
    points = sorted(k for b in chosen for k in blocks[b])
    lifted = replace(c, basis_points=tuple(HPoint(ctx.mpc(z.value)) for z in c.basis_points))
    rows = _oracle_rows(lifted, ctx, chained=False)
    kept = []
    for p, row in zip(c.declared_relations, rows):
        if p.variables() <= set(points):
            kept.append([row[4 * k + t] for k in points for t in range(4)])
    rank = _eliminate(kept, ctx) if points else 0
    return 4 * len(points) - rank - 3 * len(chosen)


def _flattening(bench: Workbench, adapter: JsonAdapter) -> dict:
    ctx = bench.ctx
    equations, fresh = flatten("j(j1(X^2) + 4) = 1")
    expected = [jp_parse("j(X1) - 1"), jp_parse("j1(X2) + 4 - X1"), jp_parse("X3^2 - X2")]
    structure = fresh == 2 and equations == expected

    # X3 = z, X2 = z², X1 = j′(z²) + 4 satisfy the inner equations exactly
    M = ctx.mp
    z = M.mpc("0.3", "1.1")
    x2 = z * z
    x1 = jet(HPoint(x2), ctx).j1 + 4
    projected = True
    if x1.imag != 0:
        values = GeneratorValues({0: HPoint(x1), 1: HPoint(x2), 2: HPoint(z)}, ctx)
        inner = max(abs(values.evaluate(p)) for p in equations[1:])
        top = values.evaluate(equations[0])
        nested = jet(HPoint(x1), ctx).j - 1
        projected = inner <= ctx.tol * max(1, abs(x1)) and abs(top - nested) <= ctx.tol * max(1, abs(nested))
    return {
        "passed": structure and projected,
        "equations": [str(p) for p in equations],
        "fresh": fresh,
    }


def run_selftest(bench: Workbench, quick: bool = False) -> dict:
    """Run the acceptance suite and return a deterministic report.

    Args:
        bench: Workbench supplying precision, Φ_N store and seed.
        quick: Smaller randomized samples and iterated levels 1 and 2 only.

    Returns:
        ``{"passed": ..., "sections": {...}}`` with one entry per section.
    """
    adapter = JsonAdapter(bench.ctx, digits=30)
    rng = random.Random(bench.seed)
    sections = {
        "special_values": _special_values(bench, adapter),
        "identities": _identities(bench, adapter, 10 if quick else 100, rng),
        "modular_polynomials": _modular_polynomials(bench, adapter, 3 if quick else 10, rng),
        "khovanskii": _khovanskii(bench, adapter, (1, 2) if quick else (1, 2, 3)),
        "closure_geometry": _closure_geometry(bench, adapter, 10 if quick else 50, rng),
        "flattening": _flattening(bench, adapter),
    }
    for name, section in sections.items():
        if not section["passed"]:
            logger.warning(f"Selftest section {name} failed")
    return {
        "passed": all(section["passed"] for section in sections.values()),
        "profile": "quick" if quick else "full",
        "bits": bench.ctx.bits,
        "seed": bench.seed,
        "sections": sections,
    }
