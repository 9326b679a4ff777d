#
# Copyright (c) 2025-2026, The jclosure Authors
#
# SPDX-License-Identifier: BSD 2-Clause License
#
"""jclosure - High-precision j-function and predimension toolkit.

This package evaluates the modular j-function and its derivatives at arbitrary
precision, acts on the half-plane by GL₂(ℚ), builds the classical modular
polynomials Φ_N, manipulates polynomials in variables and their j-values, and
solves Khovanskii systems with numeric certificates. On finite configurations
of points it computes orbit dimensions, j-derivation dimensions, the
predimension δ and its self-sufficient closure.

The Workbench bundles a precision context, a Φ_N store and a seed, and backs the
``jclosure`` command line.
"""

from .closure_geometry import (
    Configuration,
    DeltaReport,
    ModularClaim,
    SubmodularityReport,
    ValidationReport,
    XiReport,
    check_submodular,
    config_validate,
    configuration_from_dict,
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
from .exceptions import (
    CommandError,
    DomainError,
    InvalidArgumentError,
    JClosureError,
    NumericInstabilityError,
    ParseError,
    PrecisionExhaustedError,
    SizeLimitError,
    UnsupportedDerivativeError,
    UnsupportedLevelError,
    ValidationError,
)
from .halfplane import (
    GL2Q,
    HPoint,
    PrimitiveIntMatrix,
    act,
    find_modular_relation,
    hecke_index,
    hecke_representatives,
    is_special,
    red,
    reduce_fundamental,
    sl2z_equivalent,
)
from .jpolynomial import (
    GaussianRational,
    Generator,
    GeneratorKind,
    JPoly,
    flatten,
    jp_diff,
    jp_eval,
    jp_eval_many,
    jp_parse,
    partial_generator,
)
from .khovanskii import (
    CurveSpec,
    JacobianEvaluation,
    KhovanskiiSystem,
    Solution,
    SolveConfig,
    build_iterated_system,
    ec_curve_solve,
    ec_exp_solve,
    iterate_j,
    iterated_seeds,
    jacobian,
    lift_variable,
    newton_solve,
    parse_curve,
    verify_certificate,
)
from .modular_forms import (
    JJet,
    QSeries,
    automorphy_residual,
    eta_j3,
    j_series,
    j_value,
    jet,
    psi,
    truncation_order,
)
from .modular_polynomials import (
    ModularPolynomial,
    OrbitPartition,
    PhiCache,
    compute_phi,
    dim_g,
    modularly_independent,
    parse_phi_text,
    phi_derivative_residual,
    phi_eval,
)
from .numerics import (
    IntRelation,
    PrecisionContext,
    complex_relation,
    integer_relation,
    min_poly_guess,
    parse_complex,
)
from .types import BaseKind
from .workbench import Workbench

__all__ = [
    # Workbench
    "Workbench",
    # Numerics
    "PrecisionContext",
    "IntRelation",
    "integer_relation",
    "complex_relation",
    "min_poly_guess",
    "parse_complex",
    # Half-plane
    "HPoint",
    "GL2Q",
    "PrimitiveIntMatrix",
    "act",
    "red",
    "reduce_fundamental",
    "is_special",
    "hecke_index",
    "hecke_representatives",
    "sl2z_equivalent",
    "find_modular_relation",
    # Modular forms
    "QSeries",
    "JJet",
    "j_series",
    "truncation_order",
    "jet",
    "j_value",
    "psi",
    "eta_j3",
    "automorphy_residual",
    # Modular polynomials
    "ModularPolynomial",
    "PhiCache",
    "OrbitPartition",
    "compute_phi",
    "parse_phi_text",
    "phi_eval",
    "phi_derivative_residual",
    "modularly_independent",
    "dim_g",
    # j-polynomials
    "GaussianRational",
    "GeneratorKind",
    "Generator",
    "JPoly",
    "jp_parse",
    "jp_diff",
    "jp_eval",
    "jp_eval_many",
    "partial_generator",
    "flatten",
    # Khovanskii systems
    "KhovanskiiSystem",
    "Solution",
    "SolveConfig",
    "CurveSpec",
    "JacobianEvaluation",
    "jacobian",
    "newton_solve",
    "verify_certificate",
    "build_iterated_system",
    "iterated_seeds",
    "iterate_j",
    "lift_variable",
    "parse_curve",
    "ec_curve_solve",
    "ec_exp_solve",
    # Closure geometry
    "BaseKind",
    "Configuration",
    "ModularClaim",
    "ValidationReport",
    "XiReport",
    "DeltaReport",
    "SubmodularityReport",
    "configuration_from_dict",
    "load_configuration",
    "config_validate",
    "xi_dim",
    "trdeg_estimate",
    "coordinate_rank",
    "orbit_blocks",
    "delta",
    "check_submodular",
    "self_sufficient",
    "ss_closure",
    "dim_delta",
    # Exceptions
    "JClosureError",
    "InvalidArgumentError",
    "DomainError",
    "NumericInstabilityError",
    "PrecisionExhaustedError",
    "UnsupportedLevelError",
    "UnsupportedDerivativeError",
    "ParseError",
    "ValidationError",
    "SizeLimitError",
    "CommandError",
]
