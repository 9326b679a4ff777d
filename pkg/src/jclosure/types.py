#
# Copyright (c) 2025-2026, The jclosure Authors
#
# SPDX-License-Identifier: BSD 2-Clause License
#

"""Type definitions shared across the toolkit.

This module defines the core types used by more than one module:

- BaseKind: Base over which predimension is measured
- ConfigurationFile: JSON schema of a closure-geometry configuration file
- SystemFile: JSON schema of a Khovanskii system file

Domain types that belong to a single operation family (HPoint, JPoly,
Configuration, ...) live next to the operations that use them.
"""

from enum import Enum
from typing import Required, TypedDict


class BaseKind(Enum):
    """Base over which dim_G and δ are measured.

    Parameters:
        RATIONALS: δ over ℚ; no base points.
        SPECIAL: dim_G relative to the special (CM) points; orbits containing a
            special point do not count.
        DECLARED: an explicit finite list of base points.
    """

    RATIONALS = "rationals"
    SPECIAL = "special"
    DECLARED = "declared"


class ModularClaimSpec(TypedDict):
    """A declared modular relation ``g·z_j = z_i`` in a configuration file.

    Parameters:
        i: 1-based index of the image point.
        j: 1-based index of the source point.
        g: Matrix as ``[[a, b], [c, d]]`` with integer or ``"p/q"`` entries.
    """

    i: int
    j: int
    g: list[list[int | str]]


class ConfigurationFile(TypedDict, total=False):
    """JSON schema for a closure-geometry configuration.

    Parameters:
        points: Basis points as decimal strings (e.g. ``"0.3+1.1i"``).
        base: ``"rationals"``, ``"special"`` or ``{"declared": [points...]}``.
        relations: Relations in the j-polynomial grammar; ``X1..Xn`` name the
            basis points in order, followed by the declared base points.
        modular: Declared modular relations between basis points.
        special: 1-based indices of basis points acknowledged as special.

    Example::

        {
            "points": ["2i", "i"],
            "base": "rationals",
            "relations": ["X1 - 2*X2"],
            "modular": [{"i": 1, "j": 2, "g": [[2, 0], [0, 1]]}],
            "special": [1, 2]
        }
    """

    points: Required[list[str]]
    base: str | dict[str, list[str]]
    relations: list[str]
    modular: list[ModularClaimSpec]
    special: list[int]


class SystemFile(TypedDict, total=False):
    """JSON schema for a Khovanskii system file.

    Parameters:
        equations: Square system in the j-polynomial grammar.
        starts: Optional extra Newton starts, one list of point strings per start.
    """

    equations: Required[list[str]]
    starts: list[list[str]]
