#
# Copyright (c) 2025-2026, The jclosure Authors
#
# SPDX-License-Identifier: BSD 2-Clause License
#

"""Session object tying the toolkit together.

This module provides the Workbench class, which owns the state a sequence of
computations shares:

- The precision context
- The Φ_N store, optionally backed by a file
- The seed fixing multi-start order

and exposes one method per command of the command-line surface. Inputs may be
given as text (parsed here) or as already-built objects.
"""

import json
from fractions import Fraction
from pathlib import Path
from typing import Any

from loguru import logger
from mpmath import mpc

from jclosure.closure_geometry import Configuration, load_configuration
from jclosure.exceptions import InvalidArgumentError, ParseError
from jclosure.halfplane import HPoint, PrimitiveIntMatrix, is_special, reduce_fundamental
from jclosure.jpolynomial import GaussianRational
from jclosure.khovanskii import (
    CurveSpec,
    KhovanskiiSystem,
    Solution,
    SolveConfig,
    build_iterated_system,
    ec_curve_solve,
    ec_exp_solve,
    iterate_j,
    iterated_seeds,
    newton_solve,
    parse_curve,
    verify_certificate,
)
from jclosure.modular_forms import JJet, jet
from jclosure.modular_polynomials import (
    DEFAULT_LEVEL_CEILING,
    ModularPolynomial,
    OrbitPartition,
    PhiCache,
    dim_g,
    modularly_independent,
)
from jclosure.numerics import PrecisionContext, parse_complex
from jclosure.types import SystemFile


class Workbench:
    """Runs toolkit operations under one precision context and Φ_N store.

    Example::

        bench = Workbench(PrecisionContext(bits=128))
        values = bench.evaluate("i")          # JJet with j = 1728
        solutions = bench.iterated(1, 10)     # z = j(z) + 10
    """

    def __init__(
        self,
        ctx: PrecisionContext | None = None,
        *,
        phi_cache: str | Path | None = None,
        seed: int = 0,
        level_ceiling: int = DEFAULT_LEVEL_CEILING,
    ):
        """Initialize the workbench.

        Args:
            ctx: Precision context; 256 bits with derived tolerance when omitted.
            phi_cache: Optional Φ_N cache file, loaded now and updated on compute.
            seed: Seed for start sampling in the solvers.
            level_ceiling: Largest level computed on demand.
        """
        self.ctx = ctx or PrecisionContext()
        self.seed = seed
        self.phi_cache = PhiCache(phi_cache, ceiling=level_ceiling)
        logger.debug(
            f"Workbench at {self.ctx.bits} bits, tol {self.ctx.mp.nstr(self.ctx.tol, 5)}, "
            f"nmax {self.ctx.nmax}, seed {seed}"
        )

    # Inputs

    def point(self, value: str | HPoint | Any) -> HPoint:
        """Read a point of ℍ ∪ ℍ⁻.

        Raises:
            ParseError: If the text is malformed or the value is real.
        """
        if isinstance(value, HPoint):
            return value
        z = self.value(value)
        try:
            return HPoint(z)
        except InvalidArgumentError as e:
            raise ParseError(f"{value!r} is not off the real line") from e

    def value(self, value: str | Any) -> mpc:
        """Read a complex value."""
        if isinstance(value, str):
            return parse_complex(value, self.ctx)
        return self.ctx.mpc(value)

    def constant(self, text: str) -> Fraction | mpc:
        """Read a constant, exactly when it is a rational literal."""
        try:
            return Fraction(text.strip())
        except ValueError:
            return parse_complex(text, self.ctx)

    def solve_config(self, **overrides: Any) -> SolveConfig:
        """Return solver settings seeded by the workbench."""
        overrides.setdefault("seed", self.seed)
        return SolveConfig(**overrides)

    # Points and modular polynomials

    def evaluate(self, z: str | HPoint) -> JJet:
        """Return (j, j′, j″, j‴) at a point."""
        return jet(self.point(z), self.ctx)

    def reduce(self, z: str | HPoint) -> tuple[HPoint, PrimitiveIntMatrix]:
        """Reduce a point into the fundamental domain."""
        return reduce_fundamental(self.point(z), self.ctx)

    def special(self, z: str | HPoint) -> tuple[int, int, int] | None:
        """Return the integer quadratic of a special point, or None."""
        return is_special(self.point(z), self.ctx)

    def phi(self, level: int) -> ModularPolynomial:
        """Return Φ_N from the store, computing it on demand."""
        if level < 1:
            raise InvalidArgumentError(f"level must be >= 1, got {level}")
        return self.phi_cache.get(level, self.ctx)

    def phi_eval(self, level: int, x: str | Any, y: str | Any) -> mpc:
        """Evaluate Φ_N(x, y); integer arguments are evaluated exactly."""
        phi = self.phi(level)
        if isinstance(x, str) and isinstance(y, str):
            try:
                return self.ctx.mpc(phi.evaluate_exact(int(x), int(y)))
            except ValueError:
                pass
        return phi.evaluate(self.value(x), self.value(y), self.ctx)

    def export_phi(self, path: str | Path) -> list[int]:
        """Write the held polynomials to a file and return their levels."""
        self.phi_cache.export_file(path)
        return self.phi_cache.levels

    def import_phi(self, path: str | Path) -> list[int]:
        """Load polynomials from a file and return their levels."""
        return self.phi_cache.import_file(path)

    def independent(self, x: str | Any, y: str | Any) -> tuple[bool, int | None]:
        """Test two j-values for modular independence up to ctx.nmax."""
        return modularly_independent(self.value(x), self.value(y), self.ctx, self.phi_cache)

    def orbit_dimension(
        self, points: list[str | HPoint], base: list[str | HPoint] | None = None
    ) -> tuple[int, OrbitPartition]:
        """Return dim_G(points | base) and the orbit partition."""
        return dim_g(
            [self.point(z) for z in points], [self.point(z) for z in base or []], self.ctx
        )

    # Solvers

    def load_system(self, path: str | Path) -> tuple[KhovanskiiSystem, list[tuple[mpc, ...]]]:
        """Read a Khovanskii system file.

        Returns:
            The system and its extra starts.

        Raises:
            ParseError: If the file is not a valid system file.
        """
        try:
            data: SystemFile = json.loads(Path(path).read_text())
        except json.JSONDecodeError as e:
            raise ParseError(f"{path} is not valid JSON: {e}") from e
        if not isinstance(data, dict) or "equations" not in data:
            raise ParseError(f"{path} needs an 'equations' list")
        system = KhovanskiiSystem.from_strings(list(data["equations"]))
        starts = [tuple(self.value(z) for z in start) for start in data.get("starts", [])]
        return system, starts

    def certify(
        self, system: KhovanskiiSystem, solutions: list[Solution], cfg: SolveConfig
    ) -> list[bool]:
        """Check the numeric certificate of every solution."""
        return [
            s.nonsingular
            and verify_certificate(system, s.assignment(), self.ctx, cfg.jacobian_threshold)
            for s in solutions
        ]

    def solve_system(
        self, system: KhovanskiiSystem, **overrides: Any
    ) -> tuple[list[Solution], list[bool]]:
        """Run newton_solve and check certificates.

        Returns:
            Solutions and, per solution, whether it is a certificate.
        """
        cfg = self.solve_config(**overrides)
        solutions = newton_solve(system, cfg, self.ctx)
        return solutions, self.certify(system, solutions, cfg)

    def solve_curve(self, curve: str | CurveSpec, **overrides: Any) -> list[Solution]:
        """Find z ∈ ℍ with (z, j(z)) on a curve."""
        parsed = parse_curve(curve) if isinstance(curve, str) else curve
        return ec_curve_solve(parsed, self.solve_config(**overrides), self.ctx)

    def solve_exp_curve(self, curve: str | CurveSpec, **overrides: Any) -> list[Solution]:
        """Find z ∈ ℂ with (z, e^z) on a curve."""
        parsed = parse_curve(curve) if isinstance(curve, str) else curve
        return ec_exp_solve(parsed, self.solve_config(**overrides), self.ctx)

    def iterated(
        self, n: int, a: Any, **overrides: Any
    ) -> tuple[KhovanskiiSystem, list[Solution], list[bool], list[Any]]:
        """Build and solve X1 = j(Xn) + a, X_(k+1) = j(X_k).

        Newton starts are the inverse-branch seeds followed by a coarse grid.
        Each solution is re-verified through the scalar identity
        z = j_n(z) + a with z = X1.

        Returns:
            The system, its solutions, their certificate flags and the scalar
            residuals |z − j_n(z) − a| / max(1, |z|).
        """
        if isinstance(a, str):
            a = self.constant(a)
        system = build_iterated_system(n, a, self.ctx)
        overrides.setdefault("extra_starts", tuple(iterated_seeds(n, a, self.ctx)))
        overrides.setdefault("density", 2)
        overrides.setdefault("max_starts", 64)
        solutions, certificates = self.solve_system(system, **overrides)

        M = self.ctx.mp
        if isinstance(a, int | Fraction):
            a = GaussianRational(Fraction(a))
        shift = a.to_mpc(self.ctx) if isinstance(a, GaussianRational) else M.mpc(a)
        scalar = []
        for s in solutions:
            z = s.points[0]
            scalar.append(abs(z - iterate_j(z, n, self.ctx) - shift) / max(1, abs(z)))
        return system, solutions, certificates, scalar

    # Configurations

    def configuration(self, path: str | Path) -> Configuration:
        """Read a configuration file."""
        return load_configuration(path, self.ctx)
