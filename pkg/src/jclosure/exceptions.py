#
# Copyright (c) 2025-2026, The jclosure Authors
#
# SPDX-License-Identifier: BSD 2-Clause License
#

"""Custom exceptions for the j-closure toolkit.

This module defines the exception hierarchy used throughout the package for
better error handling and debugging. All exceptions inherit from JClosureError
to provide a common base for toolkit errors, so callers (including the CLI) can
catch one class and still tell computation-domain failures from usage errors.
"""


class JClosureError(Exception):
    """Base exception for all toolkit errors.

    This is the parent class for all exceptions raised by the package. Use this
    for generic errors or when a more specific exception doesn't apply.
    """

    pass


class InvalidArgumentError(JClosureError):
    """Raised when an argument violates an operation's precondition.

    Examples are a singular matrix passed to red(), a non-finite value passed to
    integer relation search, or an iterated system of length zero.
    """

    pass


class DomainError(JClosureError):
    """Raised when a value falls outside the domain of a formula.

    This covers the exclusions of the Ψ/η expressions (j ∈ {0, 1728} or
    j′ = 0) and any evaluation that would need j‴ at such a point.
    """

    pass


class NumericInstabilityError(JClosureError):
    """Raised when an iterative numerical procedure exceeds its step cap."""

    pass


class PrecisionExhaustedError(JClosureError):
    """Raised when a result fails its rounding gate at the working precision.

    Callers may retry with more bits.
    """

    pass


class UnsupportedLevelError(JClosureError):
    """Raised when a modular polynomial level is above the ceiling and not cached."""

    pass


class UnsupportedDerivativeError(JClosureError):
    """Raised when a formal derivative would require j⁗ (a J4 symbol)."""

    pass


class ParseError(JClosureError):
    """Raised when text does not match the j-polynomial or point grammar."""

    pass


class ValidationError(JClosureError):
    """Raised when a configuration fails one or more consistency checks.

    Parameters:
        violations: Human-readable descriptions of every failed check.
    """

    def __init__(self, message: str, violations: list[str] | None = None):
        """Initialize the validation error.

        Args:
            message: Summary message.
            violations: Individual failed checks, in the order they were found.
        """
        super().__init__(message)
        self.violations = violations or []


class SizeLimitError(JClosureError):
    """Raised when a brute-force subset enumeration would exceed its cap."""

    pass


class CommandError(JClosureError):
    """Raised when a CLI command cannot be dispatched or its arguments are malformed."""

    pass
