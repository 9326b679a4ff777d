#
# Copyright (c) 2025-2026, The jclosure Authors
#
# SPDX-License-Identifier: BSD 2-Clause License
#

"""The formal ring R[X, j(X), j′(X), j″(X)] with optional GL₂(ℚ) twists.

This module provides:

- GaussianRational: exact coefficients a + bi with a, b ∈ ℚ
- Generator / GeneratorKind: the symbols X_k, J0..J3(X_k), their twists by
  g ∈ GL₂(ℚ) and W = 1/(cX_k + d)
- JPoly: sparse polynomials over those symbols with a canonical string form
- jp_parse: text → JPoly
- jp_diff / partial_generator: the j-derivation partial ∂/∂X_k and formal
  partials with respect to a single symbol
- jp_eval / jp_eval_many: evaluation on a tuple of half-plane points
- flatten: nested j-expressions → equivalent flat systems

Grammar (whitespace insensitive)::

    equation := expr ["=" expr]
    expr     := term (("+" | "-") term)*
    term     := unary (("*" | "/") unary)*          division by constants only
    unary    := ("-" | "+") unary | power
    power    := primary ["^" integer]
    primary  := number | "i" | variable | matrix "*" variable
              | ("j" | "j1" | "j2" | "w") "(" expr ")" | "(" expr ")"
    variable := "X1" | "X2" | ...   (plain names like X, Y where allowed)
    matrix   := "[[" rational "," rational "],[" rational "," rational "]]"

Variables are numbered from 1 in text and from 0 internally.
"""

import re
from collections.abc import Iterator
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Any

from loguru import logger
from mpmath import mpc

from jclosure.exceptions import (
    DomainError,
    InvalidArgumentError,
    ParseError,
    UnsupportedDerivativeError,
)
from jclosure.halfplane import GL2Q, HPoint, act, red
from jclosure.modular_forms import JJet, eta_j3, jet
from jclosure.numerics import PrecisionContext


@dataclass(frozen=True)
class GaussianRational:
    """An exact complex number a + bi with rational a and b."""

    re: Fraction = Fraction(0)
    im: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "re", Fraction(self.re))
        object.__setattr__(self, "im", Fraction(self.im))

    @classmethod
    def from_mpc(cls, value: Any, ctx: PrecisionContext) -> "GaussianRational":
        """Convert a binary floating-point complex exactly into dyadic rationals."""
        M = ctx.mp
        parts = []
        for part in (M.mpc(value).real, M.mpc(value).imag):
            mantissa, exponent = M.frexp(part)
            scaled = int(M.ldexp(mantissa, ctx.bits))
            shift = int(exponent) - ctx.bits
            parts.append(Fraction(scaled) * Fraction(2) ** shift)
        return cls(parts[0], parts[1])

    @property
    def is_zero(self) -> bool:
        """Whether both parts vanish."""
        return self.re == 0 and self.im == 0

    def __add__(self, other: "GaussianRational") -> "GaussianRational":
        return GaussianRational(self.re + other.re, self.im + other.im)

    def __sub__(self, other: "GaussianRational") -> "GaussianRational":
        return GaussianRational(self.re - other.re, self.im - other.im)

    def __neg__(self) -> "GaussianRational":
        return GaussianRational(-self.re, -self.im)

    def __mul__(self, other: "GaussianRational") -> "GaussianRational":
        return GaussianRational(
            self.re * other.re - self.im * other.im, self.re * other.im + self.im * other.re
        )

    def inverse(self) -> "GaussianRational":
        """Return 1/(a + bi).

        Raises:
            InvalidArgumentError: If the value is zero.
        """
        norm = self.re * self.re + self.im * self.im
        if norm == 0:
            raise InvalidArgumentError("division by zero coefficient")
        return GaussianRational(self.re / norm, -self.im / norm)

    def to_mpc(self, ctx: PrecisionContext) -> mpc:
        """Convert at the context precision."""
        M = ctx.mp
        return M.mpc(
            M.mpf(self.re.numerator) / self.re.denominator,
            M.mpf(self.im.numerator) / self.im.denominator,
        )

    def __str__(self) -> str:
        if self.im == 0:
            return str(self.re)
        imaginary = "i" if self.im == 1 else ("-i" if self.im == -1 else f"{self.im}*i")
        if self.re == 0:
            return imaginary
        sign = "-" if self.im < 0 else "+"
        magnitude = "i" if abs(self.im) == 1 else f"{abs(self.im)}*i"
        return f"({self.re}{sign}{magnitude})"


ONE = GaussianRational(Fraction(1))
ZERO = GaussianRational()


class GeneratorKind(Enum):
    """Symbol families of the ring.

    Parameters:
        X: the variable itself (or its twist g·X).
        J0, J1, J2: j, j′, j″ at the (twisted) variable.
        J3: j‴, produced only by differentiation.
        W: 1/(cX + d) for a twist with c ≠ 0, produced only by differentiation
            or written explicitly as ``w(g*Xk)``.
    """

    X = 0
    J0 = 1
    J1 = 2
    J2 = 3
    J3 = 4
    W = 5


_J_KINDS = (GeneratorKind.J0, GeneratorKind.J1, GeneratorKind.J2, GeneratorKind.J3)


@dataclass(frozen=True)
class Generator:
    """One symbol: a kind, a variable index and an optional twist.

    Twists are stored as red(g) with sign fixed so that c > 0, or c = 0 and
    d > 0; the identity twist is stored as None.
    """

    kind: GeneratorKind
    var: int
    twist: GL2Q | None = None

    def sort_key(self) -> tuple:
        """Key giving the canonical generator order."""
        twist = () if self.twist is None else tuple(x for row in self.twist.rows() for x in row)
        return (self.var, self.kind.value, twist)

    def __str__(self) -> str:
        name = f"X{self.var + 1}"
        argument = name if self.twist is None else f"{self.twist}*{name}"
        match self.kind:
            case GeneratorKind.X:
                return argument
            case GeneratorKind.W:
                return f"w({argument})"
            case _:
                return f"{_J_NAMES[self.kind]}({argument})"


_J_NAMES = {
    GeneratorKind.J0: "j",
    GeneratorKind.J1: "j1",
    GeneratorKind.J2: "j2",
    GeneratorKind.J3: "j3",
}


def normalize_twist(g: GL2Q) -> GL2Q | None:
    """Return the canonical representative of a twist, or None for the identity."""
    r = red(g)
    a, b, c, d = r.a, r.b, r.c, r.d
    if c < 0 or (c == 0 and d < 0):
        a, b, c, d = -a, -b, -c, -d
    if (a, b, c, d) == (1, 0, 0, 1):
        return None
    return GL2Q(Fraction(a), Fraction(b), Fraction(c), Fraction(d))


Monomial = tuple[tuple[Generator, int], ...]


def _monomial_key(monomial: Monomial) -> tuple:
    degree = sum(e for _, e in monomial)
    return (-degree, tuple((g.sort_key(), e) for g, e in monomial))


def _multiply_monomials(left: Monomial, right: Monomial) -> Monomial:
    powers: dict[Generator, int] = {}
    for g, e in left + right:
        powers[g] = powers.get(g, 0) + e
    return tuple(sorted(powers.items(), key=lambda item: item[0].sort_key()))


@dataclass(frozen=True)
class JPoly:
    """A sparse polynomial in the generators with Gaussian-rational coefficients.

    Parameters:
        terms: Monomial → nonzero coefficient.
        nvars: Number of variables; every generator index is below it.
    """

    terms: dict[Monomial, GaussianRational] = field(hash=False)
    nvars: int = 0

    def __post_init__(self):
        """Drop zero coefficients and widen nvars to cover every generator."""
        cleaned = {m: c for m, c in self.terms.items() if not c.is_zero}
        object.__setattr__(self, "terms", cleaned)
        used = max((g.var + 1 for m in cleaned for g, _ in m), default=0)
        if used > self.nvars:
            object.__setattr__(self, "nvars", used)

    @classmethod
    def constant(cls, value: GaussianRational | int | Fraction, nvars: int = 0) -> "JPoly":
        """Return a constant polynomial."""
        if not isinstance(value, GaussianRational):
            value = GaussianRational(Fraction(value))
        return cls({(): value}, nvars)

    @classmethod
    def generator(cls, g: Generator, nvars: int = 0) -> "JPoly":
        """Return the polynomial consisting of one symbol."""
        return cls({((g, 1),): ONE}, nvars)

    @classmethod
    def variable(cls, k: int, nvars: int = 0) -> "JPoly":
        """Return X_(k+1)."""
        return cls.generator(Generator(GeneratorKind.X, k), nvars)

    @property
    def is_zero(self) -> bool:
        """Whether the polynomial has no terms."""
        return not self.terms

    @property
    def is_constant(self) -> bool:
        """Whether the only term is the empty monomial (or there are none)."""
        return all(m == () for m in self.terms)

    def constant_term(self) -> GaussianRational:
        """Return the coefficient of the empty monomial."""
        return self.terms.get((), ZERO)

    def generators(self) -> set[Generator]:
        """Return every symbol that occurs."""
        return {g for m in self.terms for g, _ in m}

    def variables(self) -> set[int]:
        """Return the indices of variables that occur."""
        return {g.var for g in self.generators()}

    def __add__(self, other: "JPoly") -> "JPoly":
        terms = dict(self.terms)
        for m, c in other.terms.items():
            terms[m] = terms.get(m, ZERO) + c
        return JPoly(terms, max(self.nvars, other.nvars))

    def __neg__(self) -> "JPoly":
        return JPoly({m: -c for m, c in self.terms.items()}, self.nvars)

    def __sub__(self, other: "JPoly") -> "JPoly":
        return self + (-other)

    def __mul__(self, other: "JPoly") -> "JPoly":
        terms: dict[Monomial, GaussianRational] = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = _multiply_monomials(m1, m2)
                terms[m] = terms.get(m, ZERO) + c1 * c2
        return JPoly(terms, max(self.nvars, other.nvars))

    def scale(self, c: GaussianRational) -> "JPoly":
        """Multiply every coefficient by c."""
        return JPoly({m: c * v for m, v in self.terms.items()}, self.nvars)

    def __pow__(self, exponent: int) -> "JPoly":
        if exponent < 0:
            raise InvalidArgumentError("negative powers are not polynomials")
        result = JPoly.constant(1, self.nvars)
        base = self
        while exponent:
            if exponent & 1:
                result = result * base
            base = base * base
            exponent >>= 1
        return result

    def with_nvars(self, nvars: int) -> "JPoly":
        """Return the same polynomial viewed in at least ``nvars`` variables."""
        return JPoly(dict(self.terms), max(nvars, self.nvars))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, JPoly):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self) -> int:
        return hash(frozenset(self.terms.items()))

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for monomial in sorted(self.terms, key=_monomial_key):
            c = self.terms[monomial]
            factors = [str(g) if e == 1 else f"{g}^{e}" for g, e in monomial]
            if not factors:
                parts.append(str(c))
            elif c == ONE:
                parts.append("*".join(factors))
            elif c == -ONE:
                parts.append("-" + "*".join(factors))
            else:
                parts.append("*".join([str(c)] + factors))
        return " + ".join(parts).replace("+ -", "- ")


JAssignment = dict[int, HPoint]
"""Map from variable index (0-based) to the point it takes."""


# Tokenizer and parser

_TOKEN = re.compile(
    r"\s*(?:"
    r"(?P<matrix>\[\[[^\[\]]*\],\s*\[[^\[\]]*\]\])"
    r"|(?P<number>\d+(?:\.\d*)?|\.\d+)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()=,])"
    r")"
)


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    position: int


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    position = 0
    while position < len(text):
        if text[position:].strip() == "":
            break
        match = _TOKEN.match(text, position)
        if not match or match.end() == position:
            raise ParseError(f"unexpected character {text[position]!r} at {position} in {text!r}")
        kind = match.lastgroup or "op"
        tokens.append(_Token(kind, match.group(kind), match.start(kind)))
        position = match.end()
    return tokens


def _parse_matrix(text: str) -> GL2Q:
    entries = re.findall(r"[-+]?[^,\[\]\s]+", text)
    if len(entries) != 4:
        raise ParseError(f"matrix must have four entries: {text}")
    try:
        a, b, c, d = (Fraction(x) for x in entries)
        return GL2Q(a, b, c, d)
    except (ValueError, ZeroDivisionError) as e:
        raise ParseError(f"bad matrix entry in {text}: {e}") from e
    except InvalidArgumentError as e:
        raise ParseError(str(e)) from e


_FUNCTIONS = {"j": 0, "j1": 1, "j2": 2, "w": -1}
_INDEXED = re.compile(r"X([1-9]\d*)$")


@dataclass(frozen=True)
class _Node:
    """Parse-tree node: ``op`` is one of num, var, twist, call, add, sub, mul, div, pow, neg."""

    op: str
    args: tuple = ()
    value: Any = None


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.index = 0

    def peek(self) -> _Token | None:
        return self.tokens[self.index] if self.index < len(self.tokens) else None

    def take(self, expected: str | None = None) -> _Token:
        token = self.peek()
        if token is None:
            raise ParseError(f"unexpected end of input in {self.text!r}")
        if expected is not None and token.text != expected:
            raise ParseError(
                f"expected {expected!r} at {token.position} in {self.text!r}, got {token.text!r}"
            )
        self.index += 1
        return token

    def parse_equation(self) -> _Node:
        left = self.parse_expr()
        token = self.peek()
        if token is not None and token.text == "=":
            self.take("=")
            right = self.parse_expr()
            left = _Node("sub", (left, right))
        if self.peek() is not None:
            token = self.peek()
            assert token is not None
            raise ParseError(f"unexpected {token.text!r} at {token.position} in {self.text!r}")
        return left

    def parse_expr(self) -> _Node:
        node = self.parse_term()
        while (token := self.peek()) is not None and token.text in ("+", "-"):
            self.take()
            node = _Node("add" if token.text == "+" else "sub", (node, self.parse_term()))
        return node

    def parse_term(self) -> _Node:
        node = self.parse_unary()
        while (token := self.peek()) is not None and token.text in ("*", "/"):
            self.take()
            node = _Node("mul" if token.text == "*" else "div", (node, self.parse_unary()))
        return node

    def parse_unary(self) -> _Node:
        token = self.peek()
        if token is not None and token.text in ("-", "+"):
            self.take()
            operand = self.parse_unary()
            return _Node("neg", (operand,)) if token.text == "-" else operand
        return self.parse_power()

    def parse_power(self) -> _Node:
        base = self.parse_primary()
        token = self.peek()
        if token is not None and token.text == "^":
            self.take()
            exponent = self.take()
            if exponent.kind != "number" or not exponent.text.isdigit():
                raise ParseError(f"exponent must be a nonnegative integer in {self.text!r}")
            return _Node("pow", (base,), int(exponent.text))
        return base

    def parse_variable(self) -> _Node:
        token = self.take()
        if token.kind != "name" or token.text in _FUNCTIONS or token.text == "i":
            raise ParseError(f"expected a variable at {token.position} in {self.text!r}")
        indexed = _INDEXED.match(token.text)
        return _Node("var", (), int(indexed.group(1)) - 1 if indexed else token.text)

    def parse_primary(self) -> _Node:
        token = self.take()
        if token.kind == "number":
            return _Node("num", (), GaussianRational(Fraction(token.text)))
        if token.kind == "matrix":
            g = _parse_matrix(token.text)
            self.take("*")
            return _Node("twist", (self.parse_variable(),), g)
        if token.text == "(":
            node = self.parse_expr()
            self.take(")")
            return node
        if token.kind == "name":
            if token.text == "i":
                return _Node("num", (), GaussianRational(Fraction(0), Fraction(1)))
            if token.text in _FUNCTIONS:
                self.take("(")
                argument = self.parse_expr()
                self.take(")")
                return _Node("call", (argument,), token.text)
            if token.text == "j3":
                raise ParseError("j3 is not a generator; it only arises from differentiation")
            self.index -= 1
            return self.parse_variable()
        raise ParseError(f"unexpected {token.text!r} at {token.position} in {self.text!r}")


def _plain_argument(node: _Node) -> bool:
    return node.op == "var" or (node.op == "twist" and node.args[0].op == "var")


def _twisted_x(g: GL2Q, var: int) -> JPoly:
    twist = normalize_twist(g)
    if twist is None:
        return JPoly.variable(var)
    if twist.c == 0:
        a_over_d = GaussianRational(twist.a / twist.d)
        b_over_d = GaussianRational(twist.b / twist.d)
        return JPoly.variable(var).scale(a_over_d) + JPoly.constant(b_over_d)
    return JPoly.generator(Generator(GeneratorKind.X, var, twist))


class _Builder:
    """Turns parse trees into JPolys given a name → index map."""

    def __init__(self, text: str, names: dict[str, int]):
        self.text = text
        self.names = names

    def index_of(self, node: _Node) -> int:
        if isinstance(node.value, int):
            return node.value
        if node.value in self.names:
            return self.names[node.value]
        raise ParseError(f"unknown variable {node.value!r} in {self.text!r}")

    def build(self, node: _Node) -> JPoly:
        match node.op:
            case "num":
                return JPoly.constant(node.value)
            case "var":
                return JPoly.variable(self.index_of(node))
            case "twist":
                return _twisted_x(node.value, self.index_of(node.args[0]))
            case "neg":
                return -self.build(node.args[0])
            case "add":
                return self.build(node.args[0]) + self.build(node.args[1])
            case "sub":
                return self.build(node.args[0]) - self.build(node.args[1])
            case "mul":
                return self.build(node.args[0]) * self.build(node.args[1])
            case "pow":
                return self.build(node.args[0]) ** node.value
            case "div":
                divisor = self.build(node.args[1])
                if not divisor.is_constant or divisor.is_zero:
                    raise ParseError(f"division is only by nonzero constants in {self.text!r}")
                return self.build(node.args[0]).scale(divisor.constant_term().inverse())
            case "call":
                return self.build_call(node)
        raise ParseError(f"unsupported construct in {self.text!r}")

    def build_call(self, node: _Node) -> JPoly:
        argument = node.args[0]
        if not _plain_argument(argument):
            raise ParseError(
                f"nested application {node.value}(...) in {self.text!r} is not a j-polynomial; "
                "use flatten() to introduce fresh variables"
            )
        if argument.op == "var":
            var, twist = self.index_of(argument), None
        else:
            var, twist = self.index_of(argument.args[0]), normalize_twist(argument.value)
        if node.value == "w":
            if twist is None or twist.c == 0:
                raise ParseError(f"w() needs a twist with c != 0 in {self.text!r}")
            return JPoly.generator(Generator(GeneratorKind.W, var, twist))
        kind = _J_KINDS[_FUNCTIONS[node.value]]
        return JPoly.generator(Generator(kind, var, twist))


def jp_parse(text: str, names: dict[str, int] | None = None) -> JPoly:
    """Parse a j-polynomial; ``lhs = rhs`` yields lhs − rhs.

    Args:
        text: Expression in the module grammar.
        names: Optional map of plain variable names (e.g. ``{"X": 0, "Y": 1}``)
            to 0-based indices.

    Returns:
        The polynomial in canonical sparse form.

    Raises:
        ParseError: On grammar errors, unknown names, division by a
            non-constant, or nested function application.
    """
    tree = _Parser(text).parse_equation()
    return _Builder(text, names or {}).build(tree)


# Differentiation


def _twist_factor(twist: GL2Q, var: int) -> JPoly:
    """d(g·X)/dX = det(g)/(cX + d)², as a polynomial in W."""
    det = GaussianRational(twist.det)
    if twist.c == 0:
        return JPoly.constant(det * GaussianRational(1 / (twist.d * twist.d)))
    w = JPoly.generator(Generator(GeneratorKind.W, var, twist))
    return (w * w).scale(det)


def _generator_derivative(g: Generator) -> JPoly:
    match g.kind:
        case GeneratorKind.X:
            return JPoly.constant(1) if g.twist is None else _twist_factor(g.twist, g.var)
        case GeneratorKind.W:
            assert g.twist is not None
            w = JPoly.generator(g)
            return (w * w).scale(GaussianRational(-g.twist.c))
        case GeneratorKind.J3:
            raise UnsupportedDerivativeError(
                f"differentiating {g} would need the fourth derivative of j"
            )
        case _:
            following = _J_KINDS[_J_KINDS.index(g.kind) + 1]
            raised = JPoly.generator(Generator(following, g.var, g.twist))
            return raised if g.twist is None else raised * _twist_factor(g.twist, g.var)


def _partial(p: JPoly, derivative_of) -> JPoly:
    result = JPoly({}, p.nvars)
    for monomial, c in p.terms.items():
        for position, (g, e) in enumerate(monomial):
            dg = derivative_of(g)
            if dg is None or dg.is_zero:
                continue
            rest = monomial[:position] + ((g, e - 1),) + monomial[position + 1 :]
            rest = tuple((h, k) for h, k in rest if k)
            result = result + JPoly({rest: c * GaussianRational(e)}, p.nvars) * dg
    return result.with_nvars(p.nvars)


def jp_diff(p: JPoly, k: int) -> JPoly:
    """Return the j-derivation partial ∂p/∂X_(k+1).

    ∂X_m = δ_mk, ∂J_t(X_m) = δ_mk·J_(t+1)(X_k), twisted symbols pick up the
    factor det(g)/(cX_k + d)² = det(g)·W², and ∂W = −c·W².

    Raises:
        InvalidArgumentError: If k is not a variable index of p.
        UnsupportedDerivativeError: If a J3 symbol in X_k would be differentiated.
    """
    if not 0 <= k < max(p.nvars, 1):
        raise InvalidArgumentError(f"variable index {k} out of range for {p.nvars} variables")
    return _partial(p, lambda g: _generator_derivative(g) if g.var == k else None)


def partial_generator(p: JPoly, target: Generator) -> JPoly:
    """Return the formal partial ∂p/∂target, all other symbols held independent."""
    return _partial(p, lambda g: JPoly.constant(1) if g == target else None)


# Evaluation


class GeneratorValues:
    """Evaluates symbols at an assignment, sharing jets across polynomials."""

    def __init__(self, assignment: JAssignment, ctx: PrecisionContext):
        """Initialize the evaluator.

        Args:
            assignment: Variable index → point.
            ctx: Precision context.
        """
        self._assignment = assignment
        self._ctx = ctx
        self._points: dict[tuple[int, GL2Q | None], HPoint] = {}
        self._jets: dict[tuple[int, GL2Q | None], JJet] = {}
        self._values: dict[Generator, mpc] = {}

    def point(self, var: int, twist: GL2Q | None) -> HPoint:
        """Return the (twisted) point for a variable."""
        key = (var, twist)
        if key not in self._points:
            if var not in self._assignment:
                raise InvalidArgumentError(f"variable X{var + 1} is not assigned")
            z = self._assignment[var]
            self._points[key] = z if twist is None else act(twist, z, self._ctx)
        return self._points[key]

    def jet_at(self, var: int, twist: GL2Q | None) -> JJet:
        """Return the jet of j at the (twisted) point for a variable."""
        key = (var, twist)
        if key not in self._jets:
            self._jets[key] = jet(self.point(var, twist), self._ctx)
        return self._jets[key]

    def value(self, g: Generator) -> mpc:
        """Return the numeric value of one symbol.

        Raises:
            DomainError: If j‴ is requested at a point where the
                differential equation degenerates.
        """
        if g in self._values:
            return self._values[g]
        M = self._ctx.mp
        match g.kind:
            case GeneratorKind.X:
                value = self.point(g.var, g.twist).value
            case GeneratorKind.W:
                assert g.twist is not None
                z = M.mpc(self.point(g.var, None).value)
                c = M.mpf(g.twist.c.numerator) / g.twist.c.denominator
                d = M.mpf(g.twist.d.numerator) / g.twist.d.denominator
                value = 1 / (c * z + d)
            case GeneratorKind.J3:
                value = self._third_derivative(g)
            case _:
                value = self.jet_at(g.var, g.twist).as_tuple()[_J_KINDS.index(g.kind)]
        self._values[g] = value
        return value

    def _third_derivative(self, g: Generator) -> mpc:
        ctx = self._ctx
        values = self.jet_at(g.var, g.twist)
        try:
            solved = eta_j3(values.j, values.j1, values.j2, ctx)
        except DomainError as e:
            raise DomainError(
                f"{g} cannot be evaluated at X{g.var + 1} = "
                f"{ctx.mp.nstr(self.point(g.var, g.twist).value, 12)}: {e} "
                "(the point is special)"
            ) from e
        drift = abs(solved - values.j3)
        if drift > 8 * ctx.tol * max(1, abs(values.j3)):
            logger.warning(f"Series and closed-form j‴ disagree by {ctx.mp.nstr(drift, 5)} at {g}")
        return values.j3

    def evaluate(self, p: JPoly) -> mpc:
        """Evaluate a polynomial."""
        M = self._ctx.mp
        total = M.mpc(0)
        for monomial, c in p.terms.items():
            term = c.to_mpc(self._ctx)
            for g, e in monomial:
                term *= self.value(g) ** e
            total += term
        return total


def jp_eval(p: JPoly, a: JAssignment, ctx: PrecisionContext) -> mpc:
    """Evaluate p at an assignment of half-plane points.

    J3 symbols take the series value of j‴, cross-checked against the closed
    form from the differential equation.

    Raises:
        InvalidArgumentError: If a variable of p is unassigned.
        DomainError: If j‴ is needed where j′ = 0 or j ∈ {0, 1728}.
    """
    return GeneratorValues(a, ctx).evaluate(p)


def jp_eval_many(polys: list[JPoly], a: JAssignment, ctx: PrecisionContext) -> list[mpc]:
    """Evaluate several polynomials at one assignment, sharing jet computations."""
    values = GeneratorValues(a, ctx)
    return [values.evaluate(p) for p in polys]


# Flattening


class _Flattener:
    def __init__(self, text: str, tree: _Node):
        self.text = text
        self.tree = tree
        self.taken = set(self._indexed(tree))
        self.next_candidate = 0
        self.equations: list[tuple[_Node, _Node | None]] = []

    def _indexed(self, node: _Node) -> Iterator[int]:
        if node.op == "var" and isinstance(node.value, int):
            yield node.value
        for child in node.args:
            yield from self._indexed(child)

    def fresh(self) -> int:
        while self.next_candidate in self.taken:
            self.next_candidate += 1
        self.taken.add(self.next_candidate)
        return self.next_candidate

    def rewrite(self, node: _Node) -> _Node:
        if node.op == "call" and not _plain_argument(node.args[0]):
            var = self.fresh()
            slot = len(self.equations)
            self.equations.append((node, None))
            argument = self.rewrite(node.args[0])
            self.equations[slot] = (argument, _Node("var", (), var))
            return _Node("call", (_Node("var", (), var),), node.value)
        if not node.args:
            return node
        return _Node(node.op, tuple(self.rewrite(child) for child in node.args), node.value)

    def plain_names(self, node: _Node) -> Iterator[str]:
        if node.op == "var" and isinstance(node.value, str):
            yield node.value
        for child in node.args:
            yield from self.plain_names(child)


def flatten(nested_expr: str) -> tuple[list[JPoly], int]:
    """Rewrite a nested j-expression as an equivalent flat system.

    Every argument of j, j1, j2 or w that is not a plain (possibly twisted)
    variable is replaced by a fresh variable v and the equation argument − v = 0
    is added. Fresh variables take the lowest indices not used by indexed
    variables, in pre-order (outermost first); plain names such as ``X`` are then
    numbered after them in order of appearance.

    Args:
        nested_expr: Equation or expression, e.g. ``"j(j1(X^2) + 4) = 1"``.

    Returns:
        ``(equations, fresh_count)`` with the top-level equation first.

    Raises:
        ParseError: On text outside the grammar.
    """
    tree = _Parser(nested_expr).parse_equation()
    flattener = _Flattener(nested_expr, tree)
    top = flattener.rewrite(tree)
    fresh_count = len(flattener.equations)

    names: dict[str, int] = {}
    for node in [top] + [n for pair in flattener.equations for n in pair if n is not None]:
        for name in flattener.plain_names(node):
            if name not in names:
                names[name] = flattener.fresh()

    builder = _Builder(nested_expr, names)
    polys = [builder.build(top)]
    for argument, var in flattener.equations:
        assert var is not None
        polys.append(builder.build(argument) - builder.build(var))
    nvars = max((p.nvars for p in polys), default=0)
    if fresh_count:
        logger.debug(f"Flattened {nested_expr!r} into {len(polys)} equations")
    return [p.with_nvars(nvars) for p in polys], fresh_count
