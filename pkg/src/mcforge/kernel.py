"""Exact scalar arithmetic: rational functions over the integers in declared symbols.

Every coefficient anywhere in the engine is a ScalarExpr: a canonical ratio of
multivariate polynomials with exact integer coefficients.  Equality of values
is decidable (the difference cancels to the structural zero), which is what
makes row reduction and all downstream verification exact.
"""

from __future__ import annotations

import enum
import re
import threading
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

import sympy as sp


class McforgeError(Exception):
    """Base class for all errors raised by this package."""


class DuplicateSymbolError(McforgeError):
    pass


class UnknownSymbolError(McforgeError):
    pass


class ZeroDivisionFunctionError(McforgeError):
    """Division by the zero rational function."""


class DegeneratePointError(McforgeError):
    """Substitution hit a pole / an assumed-nonzero function vanished."""


class ParseError(McforgeError):
    def __init__(self, message, line=None, col=None):
        self.line = line
        self.col = col
        if line is not None:
            message = f"{message} (line {line}, column {col})"
        super().__init__(message)


class SymbolKind(enum.Enum):
    SOURCE = "source-coordinate"
    TARGET = "target-coordinate"
    JET = "jet-symbol"
    PARAMETER = "evaluation-parameter"


_NAME_RE = re.compile(r"^[A-Za-z_][A-Za-z_0-9]*$")


@dataclass(frozen=True)
class Symbol:
    name: str
    kind: SymbolKind
    sym: sp.Symbol

    def __repr__(self):
        return f"Symbol({self.name!r}, {self.kind.value})"


class SymbolTable:
    """Append-only registry of declared symbols plus the genericity ledger.

    The genericity ledger (``assumed_nonzero``) collects every non-constant
    function that has been divided by during the session; all reports surface
    it so standing assumptions like x != 0 are explicit.
    """

    def __init__(self):
        self._symbols: dict[str, Symbol] = {}
        self._lock = threading.Lock()
        self.assumed_nonzero: list[ScalarExpr] = []

    def declare(self, name: str, kind: SymbolKind) -> Symbol:
        if not _NAME_RE.match(name):
            raise ParseError(f"invalid identifier {name!r}")
        with self._lock:
            existing = self._symbols.get(name)
            if existing is not None:
                if existing.kind is kind:
                    return existing
                raise DuplicateSymbolError(
                    f"symbol {name!r} already declared as {existing.kind.value}"
                )
            symbol = Symbol(name, kind, sp.Symbol(name))
            self._symbols[name] = symbol
            return symbol

    def lookup(self, name: str) -> Symbol:
        try:
            return self._symbols[name]
        except KeyError:
            raise UnknownSymbolError(f"symbol {name!r} is not declared") from None

    def get(self, name: str):
        return self._symbols.get(name)

    def __contains__(self, name: str) -> bool:
        return name in self._symbols

    def __len__(self) -> int:
        return len(self._symbols)

    def symbols(self) -> list[Symbol]:
        return list(self._symbols.values())

    def expr(self, symbol: Symbol | str) -> "ScalarExpr":
        if isinstance(symbol, str):
            symbol = self.lookup(symbol)
        return ScalarExpr(symbol.sym, self)

    def record_nonzero(self, value: "ScalarExpr") -> None:
        expr = _nonzero_normal_form(value.expr)
        if expr is None:
            return
        with self._lock:
            if all(expr != a.expr for a in self.assumed_nonzero):
                self.assumed_nonzero.append(ScalarExpr(expr, self))

    def kind_of(self, sym: sp.Symbol):
        entry = self._symbols.get(sym.name)
        return entry.kind if entry is not None else None


def declare_symbols(spec: Iterable[tuple[str, SymbolKind]],
                    table: SymbolTable | None = None) -> SymbolTable:
    """Declare a batch of (name, kind) pairs; names must be pairwise distinct."""
    table = table or SymbolTable()
    seen = set()
    for name, kind in spec:
        if name in seen:
            raise DuplicateSymbolError(f"duplicate symbol name {name!r}")
        seen.add(name)
        table.declare(name, kind)
    return table


def _nonzero_normal_form(expr: sp.Expr):
    # b != 0 iff numerator(b) != 0; normalize to a primitive polynomial with a
    # positive leading sign so the ledger stays duplicate-free.
    num, _ = sp.fraction(sp.cancel(expr))
    num = sp.expand(num)
    if num.is_number:
        return None
    free = sorted(num.free_symbols, key=lambda s: s.name)
    try:
        _, prim = sp.Poly(num, *free).primitive()
        num = prim.as_expr()
    except sp.PolynomialError:
        pass
    if num.could_extract_minus_sign():
        num = -num
    return num


def _coerce(value, table):
    if isinstance(value, ScalarExpr):
        return value
    if isinstance(value, int):
        return ScalarExpr(sp.Integer(value), table)
    if isinstance(value, Fraction):
        return ScalarExpr(sp.Rational(value.numerator, value.denominator), table)
    if isinstance(value, sp.Expr):
        return ScalarExpr(value, table)
    raise TypeError(f"cannot interpret {value!r} as a ScalarExpr")


class ScalarExpr:
    """A rational function over the integers in declared symbols, kept canonical.

    Canonical form: numerator/denominator with common factors cancelled, so
    equal values are structurally identical and zero is unique.
    """

    __slots__ = ("expr", "table")

    def __init__(self, expr, table: SymbolTable | None = None):
        if isinstance(expr, (int, Fraction)):
            expr = sp.Rational(expr)
        self.expr = sp.cancel(sp.together(expr))
        self.table = table

    # -- predicates ----------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return self.expr == 0

    @property
    def is_constant(self) -> bool:
        return self.expr.is_number

    def as_fraction(self) -> Fraction:
        if not self.expr.is_Rational:
            raise McforgeError(f"{self.expr} is not a rational constant")
        return Fraction(int(self.expr.p), int(self.expr.q))

    @property
    def free_names(self) -> set[str]:
        return {s.name for s in self.expr.free_symbols}

    # -- arithmetic ----------------------------------------------------

    def _other(self, value):
        other = _coerce(value, self.table)
        return other, (self.table or other.table)

    def __add__(self, value):
        other, table = self._other(value)
        return ScalarExpr(self.expr + other.expr, table)

    __radd__ = __add__

    def __sub__(self, value):
        other, table = self._other(value)
        return ScalarExpr(self.expr - other.expr, table)

    def __rsub__(self, value):
        other, table = self._other(value)
        return ScalarExpr(other.expr - self.expr, table)

    def __mul__(self, value):
        other, table = self._other(value)
        return ScalarExpr(self.expr * other.expr, table)

    __rmul__ = __mul__

    def __truediv__(self, value):
        other, table = self._other(value)
        if other.is_zero:
            raise ZeroDivisionFunctionError("division by the zero function")
        if table is not None and not other.is_constant:
            table.record_nonzero(other)
        return ScalarExpr(self.expr / other.expr, table)

    def __rtruediv__(self, value):
        other, _ = self._other(value)
        return other / self

    def __neg__(self):
        return ScalarExpr(-self.expr, self.table)

    def __pow__(self, exponent: int):
        if not isinstance(exponent, int):
            raise McforgeError("only integer exponents are supported")
        if exponent < 0:
            if self.is_zero:
                raise ZeroDivisionFunctionError("negative power of the zero function")
            if self.table is not None and not self.is_constant:
                self.table.record_nonzero(self)
        return ScalarExpr(self.expr ** exponent, self.table)

    # -- calculus ------------------------------------------------------

    def diff(self, symbol: Symbol) -> "ScalarExpr":
        return ScalarExpr(sp.diff(self.expr, symbol.sym), self.table)

    def substitute(self, mapping: Mapping[Symbol, "ScalarExpr | int | Fraction"]) -> "ScalarExpr":
        subs = {}
        for key, value in mapping.items():
            coerced = _coerce(value, self.table)
            subs[key.sym] = coerced.expr
        result = self.expr.subs(subs, simultaneous=True)
        result = sp.cancel(sp.together(result))
        if result.has(sp.zoo) or result.has(sp.nan) or result.has(sp.oo):
            raise DegeneratePointError(
                f"substitution into {self.expr} produced a zero denominator"
            )
        return ScalarExpr(result, self.table)

    # -- identity ------------------------------------------------------

    def __eq__(self, value) -> bool:
        if isinstance(value, (int, Fraction, ScalarExpr, sp.Expr)):
            other, _ = self._other(value)
            return sp.cancel(self.expr - other.expr) == 0
        return NotImplemented

    def __hash__(self):
        return hash(self.expr)

    def __bool__(self):
        return not self.is_zero

    def __repr__(self):
        return f"ScalarExpr({self.expr})"

    def __str__(self):
        return sp.sstr(self.expr, order="lex")

    def latex(self) -> str:
        return sp.latex(self.expr, order="lex")


def diff(e: ScalarExpr, s: Symbol) -> ScalarExpr:
    return e.diff(s)


def substitute(e: ScalarExpr, mapping) -> ScalarExpr:
    return e.substitute(mapping)


# ---------------------------------------------------------------------------
# Shared expression grammar: integers, declared identifiers, + - * / ^ with
# integer exponents, parentheses, unary minus; ^ binds tightest.
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(r"\d+|[A-Za-z_][A-Za-z_0-9]*|[-+*/^()]|\S")


@dataclass
class Token:
    kind: str  # 'int' | 'name' | 'op' | 'end'
    text: str
    line: int
    col: int


def tokenize(text: str, line_offset: int = 1) -> list[Token]:
    tokens = []
    for lineno, line in enumerate(text.splitlines() or [""], start=line_offset):
        for match in _TOKEN_RE.finditer(line):
            tok = match.group(0)
            col = match.start() + 1
            if tok.isdigit():
                tokens.append(Token("int", tok, lineno, col))
            elif _NAME_RE.match(tok):
                tokens.append(Token("name", tok, lineno, col))
            elif tok in "+-*/^()":
                tokens.append(Token("op", tok, lineno, col))
            else:
                raise ParseError(f"unexpected character {tok!r}", lineno, col)
    tokens.append(Token("end", "", line_offset, len(text) + 1))
    return tokens


class ExprParser:
    """Recursive-descent parser over pluggable semantics.

    The semantics object supplies: integer(n), name(text, token),
    add/sub/mul/div(a, b, token), neg(a), power(a, b, token).
    """

    def __init__(self, tokens: list[Token], semantics):
        self.tokens = tokens
        self.pos = 0
        self.sem = semantics

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def next(self) -> Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect_end(self):
        tok = self.peek()
        if tok.kind != "end":
            raise ParseError(f"unexpected token {tok.text!r}", tok.line, tok.col)

    def parse(self):
        value = self.parse_sum()
        self.expect_end()
        return value

    def parse_sum(self):
        value = self.parse_term()
        while self.peek().text in ("+", "-"):
            op = self.next()
            rhs = self.parse_term()
            value = self.sem.add(value, rhs, op) if op.text == "+" else self.sem.sub(value, rhs, op)
        return value

    def parse_term(self):
        value = self.parse_factor()
        while self.peek().text in ("*", "/"):
            op = self.next()
            rhs = self.parse_factor()
            value = self.sem.mul(value, rhs, op) if op.text == "*" else self.sem.div(value, rhs, op)
        return value

    def parse_factor(self):
        if self.peek().text == "-":
            self.next()
            return self.sem.neg(self.parse_factor())
        return self.parse_power()

    def parse_power(self):
        base = self.parse_atom()
        if self.peek().text == "^":
            op = self.next()
            if self.peek().text == "-":
                self.next()
                exponent = self.sem.neg(self.parse_power())
            else:
                exponent = self.parse_power()
            return self.sem.power(base, exponent, op)
        return base

    def parse_atom(self):
        tok = self.next()
        if tok.kind == "int":
            return self.sem.integer(int(tok.text))
        if tok.kind == "name":
            return self.sem.name(tok.text, tok)
        if tok.text == "(":
            value = self.parse_sum()
            closing = self.next()
            if closing.text != ")":
                raise ParseError("expected ')'", closing.line, closing.col)
            return value
        raise ParseError(f"unexpected token {tok.text!r}", tok.line, tok.col)


class ScalarSemantics:
    """Plain rational-function semantics over a symbol table."""

    def __init__(self, table: SymbolTable):
        self.table = table

    def integer(self, n):
        return ScalarExpr(sp.Integer(n), self.table)

    def name(self, text, token):
        entry = self.table.get(text)
        if entry is None:
            raise ParseError(f"unknown symbol {text!r}", token.line, token.col)
        return self.table.expr(entry)

    def add(self, a, b, token):
        return a + b

    def sub(self, a, b, token):
        return a - b

    def mul(self, a, b, token):
        return a * b

    def div(self, a, b, token):
        if b.is_zero:
            raise ParseError("division by zero", token.line, token.col)
        return a / b

    def neg(self, a):
        return -a

    def power(self, a, b, token):
        if not isinstance(b, ScalarExpr) or not b.expr.is_Integer:
            raise ParseError("exponent must be an integer", token.line, token.col)
        return a ** int(b.expr)


def parse_expr(text: str, table: SymbolTable, line_offset: int = 1) -> ScalarExpr:
    return ExprParser(tokenize(text, line_offset), ScalarSemantics(table)).parse()
