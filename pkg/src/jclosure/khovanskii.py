#
# Copyright (c) 2025-2026, The jclosure Authors
#
# SPDX-License-Identifier: BSD 2-Clause License
#

"""Khovanskii systems, certificates and solvers over ℍⁿ and ℂ.

This module provides:

- KhovanskiiSystem: a square system of j-polynomials in X1..Xn
- SolveConfig / Solution / CurveSpec: solver settings, results and plane curves
- jacobian / verify_certificate: the j-derivation Jacobian and the numeric
  membership certificate (small residual, nonsingular Jacobian)
- newton_solve: damped multi-start Newton over the search strip
- build_iterated_system / iterated_seeds / iterate_j: the system
  X1 = j(Xn) + a, X_(k+1) = j(X_k) and its scalar form z = j_n(z) + a
- lift_variable: adjoin a fresh variable Y with j(Y) = X_k
- parse_curve / ec_curve_solve / ec_exp_solve: zeros of p(z, j(z)) and
  p(z, e^z) by argument-principle box subdivision and Newton polishing
"""

import itertools
import random
from collections.abc import Callable
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Any

from loguru import logger
from mpmath import mpc

from jclosure.exceptions import DomainError, InvalidArgumentError, ParseError
from jclosure.halfplane import (
    GL2Q,
    HPoint,
    act,
    find_modular_relation,
    sl2z_equivalent,
)
from jclosure.jpolynomial import (
    GaussianRational,
    Generator,
    GeneratorKind,
    GeneratorValues,
    JAssignment,
    JPoly,
    jp_diff,
    jp_parse,
)
from jclosure.modular_forms import jet, j_value
from jclosure.numerics import PrecisionContext

MIN_DAMPING = 2.0**-30
BOX_OFFSET = Fraction(1, 997)


@dataclass(frozen=True)
class KhovanskiiSystem:
    """A square system f_1 = … = f_n = 0 in the variables X1..Xn.

    Parameters:
        polys: The n polynomials.
    """

    polys: tuple[JPoly, ...]

    def __post_init__(self):
        """Check squareness and widen every polynomial to n variables.

        Raises:
            InvalidArgumentError: If the system is empty or a polynomial uses a
                variable beyond X_n.
        """
        n = len(self.polys)
        if n == 0:
            raise InvalidArgumentError("a Khovanskii system needs at least one equation")
        for p in self.polys:
            if any(v >= n for v in p.variables()):
                raise InvalidArgumentError(f"{p} uses a variable beyond X{n}; the system is not square")
        object.__setattr__(self, "polys", tuple(p.with_nvars(n) for p in self.polys))

    @classmethod
    def from_strings(cls, equations: list[str]) -> "KhovanskiiSystem":
        """Parse each equation with jp_parse."""
        return cls(tuple(jp_parse(text) for text in equations))

    @property
    def n(self) -> int:
        """Number of equations and variables."""
        return len(self.polys)

    @cached_property
    def derivatives(self) -> tuple[tuple[JPoly, ...], ...]:
        """The formal Jacobian [∂f_i/∂X_k]."""
        return tuple(tuple(jp_diff(p, k) for k in range(self.n)) for p in self.polys)

    @property
    def pure_j(self) -> bool:
        """Whether the system is one equation in untwisted j(X1) alone."""
        if self.n != 1:
            return False
        generators = self.polys[0].generators()
        return bool(generators) and all(
            g.kind == GeneratorKind.J0 and g.twist is None for g in generators
        )

    def __str__(self) -> str:
        return "{" + ", ".join(str(p) for p in self.polys) + "}"


@dataclass(frozen=True)
class Solution:
    """A converged point of a system or curve.

    Parameters:
        points: Coordinates; for j-systems each lies in ℍ.
        residual: max_i |f_i(points)|.
        jac_smallest_sv: Smallest singular value of the evaluated Jacobian.
        nonsingular: Whether jac_smallest_sv clears the Jacobian threshold.
        multiplicity: Root multiplicity found by the argument principle (curves).
    """

    points: tuple[mpc, ...]
    residual: Any
    jac_smallest_sv: Any
    nonsingular: bool
    multiplicity: int = 1

    def assignment(self) -> JAssignment:
        """Return the points as a variable assignment."""
        return {k: HPoint(z) for k, z in enumerate(self.points)}


def _identity_translates() -> tuple[GL2Q, ...]:
    return (GL2Q.identity(),)


@dataclass(frozen=True)
class SolveConfig:
    """Settings shared by the Newton and box solvers.

    Parameters:
        re_min, re_max: Real bounds of the search strip.
        im_min, im_max: Imaginary bounds of the search strip.
        density: Grid points per axis per variable.
        damping: Initial Newton damping factor in (0, 1].
        max_iter: Newton iteration cap (polishing gets the same budget again).
        translates: G-elements applied to every grid point.
        jacobian_threshold: Factor t in "nonsingular iff σ_min > t·max(1, σ_max)";
            2^(−bits/4) when omitted.
        max_starts: Cap on grid start tuples; larger products are sampled.
        seed: Seed for start sampling.
        extra_starts: Start tuples tried before the grid.
        max_solutions: Stop once this many distinct solutions are found.
        exp_region: (re_min, re_max, im_min, im_max) of the box searched by ec_exp_solve.
        search_bits: Precision of argument-principle sampling.
        min_box_size: Boxes narrower than this are not split further.
        max_boxes: Cap on boxes examined by one box search.
    """

    re_min: float = -0.5
    re_max: float = 0.5
    im_min: float = 0.25
    im_max: float = 10.0
    density: int = 4
    damping: float = 1.0
    max_iter: int = 100
    translates: tuple[GL2Q, ...] = field(default_factory=_identity_translates)
    jacobian_threshold: float | None = None
    max_starts: int = 256
    seed: int = 0
    extra_starts: tuple[tuple[Any, ...], ...] = ()
    max_solutions: int | None = None
    exp_region: tuple[float, float, float, float] = (-2.0, 2.0, -2.0, 2.0)
    search_bits: int = 96
    min_box_size: float = 1e-9
    max_boxes: int = 4096

    def __post_init__(self):
        """Validate bounds.

        Raises:
            InvalidArgumentError: If any setting is out of range.
        """
        if self.im_min <= 0:
            raise InvalidArgumentError("im_min must be positive")
        if self.im_max <= self.im_min or self.re_max <= self.re_min:
            raise InvalidArgumentError("the search strip is empty")
        if self.density < 1:
            raise InvalidArgumentError("grid density must be >= 1")
        if not 0 < self.damping <= 1:
            raise InvalidArgumentError("damping must lie in (0, 1]")
        if self.max_iter < 1 or self.max_starts < 1 or self.max_boxes < 1:
            raise InvalidArgumentError("iteration, start and box caps must be >= 1")
        lo_re, hi_re, lo_im, hi_im = self.exp_region
        if hi_re <= lo_re or hi_im <= lo_im:
            raise InvalidArgumentError("exp_region is empty")


def _threshold(ctx: PrecisionContext, factor: float | None, largest: Any) -> Any:
    M = ctx.mp
    base = M.mpf(factor) if factor is not None else M.ldexp(1, -(ctx.bits // 4))
    return base * max(M.mpf(1), largest)


@dataclass(frozen=True)
class JacobianEvaluation:
    """The evaluated Jacobian of a system at a point.

    Parameters:
        matrix: [∂f_i/∂X_k] as an mpmath matrix.
        det: Its determinant.
        smallest_sv: Smallest singular value.
        largest_sv: Largest singular value.
        threshold: The nonsingularity threshold applied.
    """

    matrix: Any
    det: mpc
    smallest_sv: Any
    largest_sv: Any
    threshold: Any

    @property
    def nonsingular(self) -> bool:
        """Whether the smallest singular value clears the threshold."""
        return self.smallest_sv > self.threshold


def _jacobian_from_values(
    s: KhovanskiiSystem, values: GeneratorValues, ctx: PrecisionContext, factor: float | None
) -> JacobianEvaluation:
    M = ctx.mp
    rows = [[values.evaluate(d) for d in row] for row in s.derivatives]
    matrix = M.matrix(rows)
    singular = M.svd_c(matrix, compute_uv=False)
    svs = [abs(singular[k]) for k in range(s.n)]
    largest = max(svs)
    return JacobianEvaluation(
        matrix=matrix,
        det=M.mpc(M.det(matrix)),
        smallest_sv=min(svs),
        largest_sv=largest,
        threshold=_threshold(ctx, factor, largest),
    )


def jacobian(
    s: KhovanskiiSystem, a: JAssignment, ctx: PrecisionContext, threshold: float | None = None
) -> JacobianEvaluation:
    """Evaluate [∂f_i/∂X_k] at an assignment, with determinant and singular values.

    Raises:
        DomainError: If a j‴ entry is needed at a degenerate (special) point.
    """
    return _jacobian_from_values(s, GeneratorValues(a, ctx), ctx, threshold)


def _residual(s: KhovanskiiSystem, values: GeneratorValues) -> Any:
    return max(abs(values.evaluate(p)) for p in s.polys)


def verify_certificate(
    s: KhovanskiiSystem, a: JAssignment, ctx: PrecisionContext, threshold: float | None = None
) -> bool:
    """Whether an assignment is a numeric certificate for the system.

    True iff the residual is at most tol and the Jacobian is nonsingular. A
    degenerate j‴ evaluation makes the answer False.
    """
    values = GeneratorValues(a, ctx)
    try:
        if _residual(s, values) > ctx.tol:
            return False
        return _jacobian_from_values(s, values, ctx, threshold).nonsingular
    except DomainError as e:
        logger.debug(f"Certificate check failed on a degenerate point: {e}")
        return False


# Newton solver


def _grid(cfg: SolveConfig, ctx: PrecisionContext) -> list[HPoint]:
    M = ctx.mp
    width = M.mpf(cfg.re_max) - cfg.re_min
    ratio = M.mpf(cfg.im_max) / cfg.im_min
    points = []
    for g in cfg.translates:
        for ky in range(cfg.density):
            y = cfg.im_min * M.power(ratio, (ky + M.mpf(1) / 2) / cfg.density)
            for kx in range(cfg.density):
                x = cfg.re_min + width * (kx + M.mpf(1) / 2) / cfg.density
                points.append(act(g, HPoint(M.mpc(x, y)), ctx))
    return points


def _starts(s: KhovanskiiSystem, cfg: SolveConfig, ctx: PrecisionContext) -> list[tuple[mpc, ...]]:
    M = ctx.mp
    starts = [tuple(M.mpc(getattr(z, "value", z)) for z in start) for start in cfg.extra_starts]
    for start in starts:
        if len(start) != s.n:
            raise InvalidArgumentError(f"start {start} does not have {s.n} coordinates")
    grid = [p.value for p in _grid(cfg, ctx)]
    if len(grid) ** s.n <= cfg.max_starts:
        starts.extend(itertools.product(grid, repeat=s.n))
    else:
        rng = random.Random(cfg.seed)
        starts.extend(tuple(rng.choice(grid) for _ in range(s.n)) for _ in range(cfg.max_starts))
    return starts


def _admissible(point: tuple[mpc, ...], start: tuple[mpc, ...], cfg: SolveConfig) -> bool:
    for z, z0 in zip(point, start):
        if abs(z.imag) < cfg.im_min / 4 or (z.imag > 0) != (z0.imag > 0):
            return False
        if abs(z.imag) > 100 * cfg.im_max:
            return False
    return True


def _assign(point: tuple[mpc, ...]) -> JAssignment:
    return {k: HPoint(z) for k, z in enumerate(point)}


def _newton_step(s: KhovanskiiSystem, values: GeneratorValues, ctx: PrecisionContext):
    M = ctx.mp
    rows = [[values.evaluate(d) for d in row] for row in s.derivatives]
    rhs = M.matrix([-values.evaluate(p) for p in s.polys])
    return M.lu_solve(M.matrix(rows), rhs)


def _converge(
    s: KhovanskiiSystem, start: tuple[mpc, ...], cfg: SolveConfig, ctx: PrecisionContext
) -> tuple[tuple[mpc, ...], Any] | None:
    """Damped Newton from one start; returns (point, residual) once residual ≤ tol."""
    point = start
    values = GeneratorValues(_assign(point), ctx)
    residual = _residual(s, values)
    for _ in range(cfg.max_iter):
        if residual <= ctx.tol:
            return point, residual
        try:
            step = _newton_step(s, values, ctx)
        except (ZeroDivisionError, DomainError):
            return None
        damping = cfg.damping
        while damping >= MIN_DAMPING:
            candidate = tuple(z + damping * step[k] for k, z in enumerate(point))
            if _admissible(candidate, start, cfg):
                trial = GeneratorValues(_assign(candidate), ctx)
                try:
                    trial_residual = _residual(s, trial)
                except DomainError:
                    trial_residual = None
                if trial_residual is not None and trial_residual < residual:
                    point, values, residual = candidate, trial, trial_residual
                    break
            damping /= 2
        else:
            return None
    return (point, residual) if residual <= ctx.tol else None


def _polish(
    s: KhovanskiiSystem, point: tuple[mpc, ...], residual: Any, cfg: SolveConfig, ctx: PrecisionContext
) -> tuple[tuple[mpc, ...], Any]:
    """Undamped Newton while the residual at least halves each step."""
    values = GeneratorValues(_assign(point), ctx)
    for _ in range(cfg.max_iter):
        try:
            step = _newton_step(s, values, ctx)
            candidate = tuple(z + step[k] for k, z in enumerate(point))
            trial = GeneratorValues(_assign(candidate), ctx)
            trial_residual = _residual(s, trial)
        except (ZeroDivisionError, DomainError, InvalidArgumentError):
            break
        if not trial_residual * 2 <= residual:
            if trial_residual < residual:
                point, residual = candidate, trial_residual
            break
        point, values, residual = candidate, trial, trial_residual
    return point, residual


def _duplicate(
    s: KhovanskiiSystem, point: tuple[mpc, ...], nonsingular: bool, known: list[Solution], ctx: PrecisionContext
) -> bool:
    """Whether a polished hit repeats a known solution.

    Singular hits converge only to about the square root of the working
    precision, so a pure-j comparison involving one of them uses the loose
    tolerance 2^(−bits/8) that the coordinatewise comparison always uses.
    """
    loose = ctx.mp.ldexp(1, -(ctx.bits // 8))
    for solution in known:
        if s.pure_j:
            tolerance = None if nonsingular and solution.nonsingular else loose
            if find_modular_relation(HPoint(point[0]), HPoint(solution.points[0]), ctx, tolerance) is not None:
                return True
        elif all(
            sl2z_equivalent(HPoint(z), HPoint(w), ctx, loose)
            for z, w in zip(point, solution.points)
        ):
            return True
    return False


def newton_solve(s: KhovanskiiSystem, cfg: SolveConfig, ctx: PrecisionContext) -> list[Solution]:
    """Solve a Khovanskii system by damped multi-start Newton.

    Starts are cfg.extra_starts followed by per-variable grids over the strip
    and its translates. A step is halved while it would leave ℍ (|Im| below
    im_min/4) or fail to decrease the residual. Converged points are polished,
    deduplicated modulo SL₂(ℤ) per coordinate (modulo G for a single equation
    in j(X1), loosely when either hit is singular) and returned with their
    Jacobian data; singular hits are kept with ``nonsingular=False`` and never
    count as certificates.

    Args:
        s: The system.
        cfg: Solver settings.
        ctx: Precision context.

    Returns:
        Distinct solutions in discovery order; possibly empty.
    """
    starts = _starts(s, cfg, ctx)
    logger.debug(f"Newton solve of {s} from {len(starts)} starts")
    solutions: list[Solution] = []
    for start in starts:
        converged = _converge(s, start, cfg, ctx)
        if converged is None:
            continue
        point, residual = _polish(s, *converged, cfg, ctx)
        try:
            evaluation = jacobian(s, _assign(point), ctx, cfg.jacobian_threshold)
            smallest, nonsingular = evaluation.smallest_sv, evaluation.nonsingular
        except DomainError:
            smallest, nonsingular = ctx.mp.mpf(0), False
        if _duplicate(s, point, nonsingular, solutions, ctx):
            continue
        solutions.append(Solution(point, residual, smallest, nonsingular))
        logger.debug(f"Solution {len(solutions)}: residual {ctx.mp.nstr(residual, 5)}, nonsingular={nonsingular}")
        if cfg.max_solutions is not None and len(solutions) >= cfg.max_solutions:
            break
    return solutions


# Iterated j


def _exact_constant(a: Any, ctx: PrecisionContext | None) -> GaussianRational:
    if isinstance(a, GaussianRational):
        return a
    if isinstance(a, int | Fraction):
        return GaussianRational(Fraction(a))
    if ctx is None:
        raise InvalidArgumentError("a floating-point constant needs a precision context")
    return GaussianRational.from_mpc(a, ctx)


def build_iterated_system(n: int, a: Any, ctx: PrecisionContext | None = None) -> KhovanskiiSystem:
    """Build X1 − j(Xn) − a = 0, X_k − j(X_(k−1)) = 0 for k = 2..n.

    A solution satisfies z = j_n(z) + a with z = X1 and j_n the n-fold iterate.

    Args:
        n: Number of variables, at least 1.
        a: Constant; Gaussian rationals are kept exactly, binary floats are
            converted exactly to dyadic rationals.
        ctx: Needed only for floating-point a.

    Raises:
        InvalidArgumentError: If n < 1.
    """
    if n < 1:
        raise InvalidArgumentError(f"iterated system needs n >= 1, got {n}")
    constant = JPoly.constant(_exact_constant(a, ctx))

    def j_of(k: int) -> JPoly:
        return JPoly.generator(Generator(GeneratorKind.J0, k))

    polys = [JPoly.variable(0) - j_of(n - 1) - constant]
    polys.extend(JPoly.variable(k) - j_of(k - 1) for k in range(1, n))
    return KhovanskiiSystem(tuple(polys))


def iterated_seeds(n: int, a: Any, ctx: PrecisionContext, rounds: int = 40) -> list[tuple[mpc, ...]]:
    """Newton starts for the iterated system from inverse-branch iteration near ρ.

    Near ρ = e^(πi/3), j(z) ≈ C·(z − ρ)³ with C = j‴(ρ)/6. Walking the cycle
    X1 → Xn → … → X2 → X1 backwards through the three local cube-root branches
    is a contraction; every branch word of length n gives one seed.

    Returns:
        3^n start tuples (X1, …, Xn).
    """
    if n < 1:
        raise InvalidArgumentError(f"iterated system needs n >= 1, got {n}")
    M = ctx.mp
    rho = (1 + M.sqrt(-3)) / 2
    C = jet(HPoint(rho), ctx).j3 / 6
    shift = M.mpc(_exact_constant(a, ctx).to_mpc(ctx))
    seeds = []
    for branches in itertools.product(range(3), repeat=n):
        xs = [rho] * n
        for _ in range(rounds):
            # X1 − a = j(Xn), X_(k+1) = j(X_k)
            xs[n - 1] = rho + M.root((xs[0] - shift) / C, 3, branches[0])
            for k in range(n - 2, -1, -1):
                xs[k] = rho + M.root(xs[k + 1] / C, 3, branches[n - 1 - k])
        if all(x.imag > 0 for x in xs):
            seeds.append(tuple(xs))
    return seeds


def iterate_j(z: Any, n: int, ctx: PrecisionContext) -> mpc:
    """Return j_n(z), the n-fold composition of j.

    Raises:
        DomainError: If an intermediate value falls on the real line.
    """
    value = ctx.mp.mpc(z)
    for _ in range(n):
        if value.imag == 0:
            raise DomainError(f"iterate left the half-plane at {ctx.mp.nstr(value, 10)}")
        value = j_value(HPoint(value), ctx)
    return value


def lift_variable(s: KhovanskiiSystem, k: int) -> KhovanskiiSystem:
    """Adjoin a fresh variable Y = X_(n+1) with j(Y) = X_(k+1).

    The lifted system is square again and its solutions project onto solutions
    of s whose k-th coordinate lies in the image of j.

    Raises:
        InvalidArgumentError: If k is not a variable of s.
    """
    if not 0 <= k < s.n:
        raise InvalidArgumentError(f"variable index {k} out of range")
    link = JPoly.generator(Generator(GeneratorKind.J0, s.n)) - JPoly.variable(k)
    return KhovanskiiSystem(tuple(s.polys) + (link,))


# Plane curves


@dataclass(frozen=True)
class CurveSpec:
    """A plane curve p(X, Y) = 0 with Gaussian-rational coefficients.

    Curves without Y are rejected. Curves without X (unions of horizontal lines)
    are accepted with a warning.
    """

    p: JPoly

    def __post_init__(self):
        """Check the variables of p.

        Raises:
            InvalidArgumentError: If p has function symbols, variables other
                than X and Y, or no Y-dependence.
        """
        for g in self.p.generators():
            if g.kind != GeneratorKind.X or g.twist is not None or g.var > 1:
                raise InvalidArgumentError(f"curve polynomial may only use X and Y, found {g}")
        used = self.p.variables()
        if 1 not in used:
            raise InvalidArgumentError(f"{self} does not depend on Y")
        if 0 not in used:
            logger.warning(f"{self} is a union of horizontal lines")

    def evaluate(self, x: Any, y: Any, ctx: PrecisionContext) -> tuple[mpc, mpc, mpc, Any]:
        """Return (p, ∂p/∂X, ∂p/∂Y, Σ|c|·|x|^a·|y|^b) at (x, y)."""
        M = ctx.mp
        value = dx = dy = M.mpc(0)
        scale = M.mpf(0)
        for monomial, c in self.p.terms.items():
            powers = {g.var: e for g, e in monomial}
            a, b = powers.get(0, 0), powers.get(1, 0)
            coefficient = c.to_mpc(ctx)
            value += coefficient * x**a * y**b
            if a:
                dx += coefficient * a * x ** (a - 1) * y**b
            if b:
                dy += coefficient * b * x**a * y ** (b - 1)
            scale += abs(coefficient) * abs(x) ** a * abs(y) ** b
        return value, dx, dy, scale

    def __str__(self) -> str:
        return str(self.p).replace("X1", "X").replace("X2", "Y")


def parse_curve(text: str) -> CurveSpec:
    """Parse p(X, Y) in the j-polynomial grammar with the names X and Y.

    Raises:
        ParseError: On grammar errors or function symbols.
        InvalidArgumentError: If the curve has no Y-dependence.
    """
    p = jp_parse(text, names={"X": 0, "Y": 1})
    if any(g.kind != GeneratorKind.X for g in p.generators()):
        raise ParseError(f"curve {text!r} may not contain j, j1, j2 or w")
    return CurveSpec(p)


@dataclass(frozen=True)
class _Box:
    re0: Any
    re1: Any
    im0: Any
    im1: Any

    @property
    def center(self) -> tuple[Any, Any]:
        return (self.re0 + self.re1) / 2, (self.im0 + self.im1) / 2

    @property
    def width(self) -> Any:
        return max(self.re1 - self.re0, self.im1 - self.im0)

    def split(self) -> list["_Box"]:
        re_mid, im_mid = self.center
        return [
            _Box(self.re0, re_mid, self.im0, im_mid),
            _Box(re_mid, self.re1, self.im0, im_mid),
            _Box(self.re0, re_mid, im_mid, self.im1),
            _Box(re_mid, self.re1, im_mid, self.im1),
        ]

    def contains(self, z: mpc, margin: Any) -> bool:
        return (
            self.re0 - margin <= z.real <= self.re1 + margin
            and self.im0 - margin <= z.imag <= self.im1 + margin
        )


class _BoxSearch:
    """Argument-principle root isolation for one analytic function."""

    MAX_EDGE_DEPTH = 24

    def __init__(
        self,
        function: Callable[[mpc, PrecisionContext], tuple[mpc, mpc, Any]],
        cfg: SolveConfig,
        ctx: PrecisionContext,
    ):
        self.function = function
        self.cfg = cfg
        self.ctx = ctx
        self.search_ctx = ctx.with_bits(min(ctx.bits, max(cfg.search_bits, 64)))
        self._memo: dict[tuple[Any, Any], mpc] = {}

    def sample(self, re: Any, im: Any) -> mpc:
        key = (re, im)
        if key not in self._memo:
            self._memo[key] = self.function(self.search_ctx.mp.mpc(re, im), self.search_ctx)[0]
        return self._memo[key]

    def _edge(self, p0: tuple[Any, Any], p1: tuple[Any, Any], depth: int) -> tuple[Any, bool]:
        M = self.search_ctx.mp
        f0, f1 = self.sample(*p0), self.sample(*p1)
        if f0 == 0 or f1 == 0:
            return M.mpf(0), False
        change = M.arg(f1 / f0)
        if abs(change) <= M.pi / 3:
            return change, True
        if depth >= self.MAX_EDGE_DEPTH:
            return change, False
        middle = ((p0[0] + p1[0]) / 2, (p0[1] + p1[1]) / 2)
        first, ok1 = self._edge(p0, middle, depth + 1)
        second, ok2 = self._edge(middle, p1, depth + 1)
        return first + second, ok1 and ok2

    def count(self, box: _Box) -> int:
        """Number of zeros inside the box, by the winding of the boundary image."""
        M = self.search_ctx.mp
        corners = [(box.re0, box.im0), (box.re1, box.im0), (box.re1, box.im1), (box.re0, box.im1)]
        total, adequate = M.mpf(0), True
        for k in range(4):
            change, ok = self._edge(corners[k], corners[(k + 1) % 4], 0)
            total += change
            adequate = adequate and ok
        winding = total / (2 * M.pi)
        rounded = int(M.nint(winding))
        if not adequate or abs(winding - rounded) > 0.25 or rounded < 0:
            logger.warning(
                f"Argument-principle sampling inadequate on box "
                f"[{M.nstr(box.re0, 6)}, {M.nstr(box.re1, 6)}] x "
                f"[{M.nstr(box.im0, 6)}, {M.nstr(box.im1, 6)}]: winding {M.nstr(winding, 6)}"
            )
        return max(rounded, 0)

    def polish(self, z: mpc, multiplicity: int) -> tuple[mpc, Any, Any, Any] | None:
        """Modified Newton z ← z − m·F/F′ at full precision."""
        M = self.ctx.mp
        z = M.mpc(z)
        value, derivative, scale = self.function(z, self.ctx)
        for _ in range(self.cfg.max_iter):
            if derivative == 0:
                break
            candidate = z - multiplicity * value / derivative
            try:
                new_value, new_derivative, new_scale = self.function(candidate, self.ctx)
            except (InvalidArgumentError, DomainError):
                break
            if abs(new_value) >= abs(value) and abs(value) <= self.ctx.tol * max(1, scale):
                break
            z, value, derivative, scale = candidate, new_value, new_derivative, new_scale
        if abs(value) > self.ctx.tol * max(1, scale):
            return None
        return z, abs(value), abs(derivative), scale

    def run(self, root: _Box) -> list[tuple[mpc, Any, Any, int]]:
        """Isolate and polish the zeros inside the root box."""
        M = self.search_ctx.mp
        found: list[tuple[mpc, Any, Any, int]] = []
        pending = [(root, self.count(root))]
        examined = 0
        while pending and examined < self.cfg.max_boxes:
            box, count = pending.pop(0)
            examined += 1
            if count == 0:
                continue
            if count > 1 and box.width > self.cfg.min_box_size:
                children = [(child, self.count(child)) for child in box.split()]
                if sum(c for _, c in children) != count:
                    logger.warning(f"Box split changed the zero count from {count}")
                pending.extend(children)
                continue
            re, im = box.center
            polished = self.polish(M.mpc(re, im), count)
            if polished is None and count == 1 and box.width > self.cfg.min_box_size:
                pending.extend((child, self.count(child)) for child in box.split())
                continue
            if polished is None:
                logger.warning(f"Newton polishing failed near {M.nstr(M.mpc(re, im), 8)}")
                continue
            z, residual, derivative, _ = polished
            if not box.contains(z, box.width):
                logger.debug(f"Polished zero {M.nstr(z, 8)} escaped its box")
            if all(abs(z - other[0]) > M.ldexp(1, -(self.ctx.bits // 8)) for other in found):
                found.append((z, residual, derivative, count))
        if pending:
            logger.warning(f"Box search stopped after {self.cfg.max_boxes} boxes")
        return found


def _solutions_from_zeros(zeros, cfg: SolveConfig, ctx: PrecisionContext) -> list[Solution]:
    solutions = []
    for z, residual, derivative, multiplicity in zeros:
        threshold = _threshold(ctx, cfg.jacobian_threshold, derivative)
        solutions.append(
            Solution(
                points=(ctx.mp.mpc(z),),
                residual=residual,
                jac_smallest_sv=derivative,
                nonsingular=derivative > threshold,
                multiplicity=multiplicity,
            )
        )
        if cfg.max_solutions is not None and len(solutions) >= cfg.max_solutions:
            break
    return solutions


def ec_curve_solve(v: CurveSpec, cfg: SolveConfig, ctx: PrecisionContext) -> list[Solution]:
    """Find z in the search strip with (z, j(z)) on the curve.

    Zeros of F(z) = p(z, j(z)) are isolated by argument-principle box
    subdivision over the strip (shifted by a small offset so that boundary
    points such as ρ are not on an edge) and its integer translates from
    cfg.translates, then polished with F′ = p_X + p_Y·j′(z).

    Returns:
        Distinct zeros with residual ≤ tol (scaled by the size of p's terms).
    """

    def function(z: mpc, work: PrecisionContext) -> tuple[mpc, mpc, Any]:
        point = HPoint(z)
        if work is not ctx:
            value, _, _, scale = v.evaluate(z, j_value(point, work), work)
            return value, work.mp.mpc(0), scale
        values = jet(point, work)
        value, dx, dy, scale = v.evaluate(z, values.j, work)
        return value, dx + dy * values.j1, scale

    M = ctx.mp
    offset = M.mpf(BOX_OFFSET.numerator) / BOX_OFFSET.denominator
    search = _BoxSearch(function, cfg, ctx)
    zeros = []
    for g in cfg.translates:
        if g.c != 0 or g.a != g.d:
            logger.debug(f"Skipping non-translation {g} in curve search")
            continue
        shift = M.mpf(g.b.numerator) / g.b.denominator / (M.mpf(g.d.numerator) / g.d.denominator)
        root = _Box(
            M.mpf(cfg.re_min) + offset + shift,
            M.mpf(cfg.re_max) + offset + shift,
            M.mpf(cfg.im_min) + offset,
            M.mpf(cfg.im_max) + offset,
        )
        zeros.extend(search.run(root))
    logger.debug(f"Curve {v}: {len(zeros)} zeros found")
    return _solutions_from_zeros(zeros, cfg, ctx)


def ec_exp_solve(v: CurveSpec, cfg: SolveConfig, ctx: PrecisionContext) -> list[Solution]:
    """Find z in cfg.exp_region with (z, e^z) on the curve.

    Same box and Newton machinery as ec_curve_solve on F(z) = p(z, e^z) with
    F′ = p_X + p_Y·e^z; no half-plane constraint.
    """

    def function(z: mpc, work: PrecisionContext) -> tuple[mpc, mpc, Any]:
        exponential = work.mp.exp(z)
        value, dx, dy, scale = v.evaluate(z, exponential, work)
        return value, dx + dy * exponential, scale

    M = ctx.mp
    offset = M.mpf(BOX_OFFSET.numerator) / BOX_OFFSET.denominator
    lo_re, hi_re, lo_im, hi_im = (M.mpf(x) for x in cfg.exp_region)
    root = _Box(lo_re + offset, hi_re + offset, lo_im + offset, hi_im + offset)
    zeros = _BoxSearch(function, cfg, ctx).run(root)
    return _solutions_from_zeros(zeros, cfg, ctx)
