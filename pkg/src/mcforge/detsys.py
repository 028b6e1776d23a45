"""Linear infinitesimal determining systems: parse, prolong, solve, lift.

The DSL accepts linear homogeneous PDE systems for vector-field jets
(``eta_xy`` is the second derivative of the eta component by x and y).
Solving puts the system in triangular form over the rational-function field;
lifting renames source coordinates to targets and jets to Maurer-Cartan
generators, yielding the linear relations among the restricted forms.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import sympy as sp

from .exterior import McGenerator, OneForm
from .kernel import (
    ExprParser,
    McforgeError,
    ParseError,
    ScalarExpr,
    Symbol,
    SymbolKind,
    SymbolTable,
    _nonzero_normal_form,
    tokenize,
)
from .multiindex import MultiIndex, all_indices


class NonlinearInputError(McforgeError):
    """A product of jet symbols appeared in a determining equation."""


class InconsistentSystemError(McforgeError):
    pass


@dataclass(frozen=True)
class JetSymbol:
    """zeta^b_A: the A-th derivative of vector-field component b."""

    component: int
    index: MultiIndex

    def sort_key(self) -> tuple:
        return (self.index.order, self.component, self.index.entries)

    def __lt__(self, other: "JetSymbol") -> bool:
        return self.sort_key() < other.sort_key()

    def __repr__(self):
        return f"zeta[{self.component}]{self.index.entries}"


def term_key(js: JetSymbol) -> tuple:
    return js.sort_key()


@dataclass
class LinearPdeEquation:
    """Homogeneous linear equation sum coeff(z) * zeta^b_A = 0."""

    terms: dict[JetSymbol, ScalarExpr]

    @property
    def order(self) -> int:
        return max(js.index.order for js in self.terms)

    def pivot(self) -> JetSymbol:
        return max(self.terms, key=term_key)

    def normal_key(self):
        # scale-invariant canonical key for deduplication
        c0 = self.terms[self.pivot()].expr
        items = [((js.component, js.index.entries), sp.cancel(c.expr / c0))
                 for js, c in self.terms.items()]
        items.sort(key=lambda it: it[0])
        return tuple(items)


@dataclass
class DeterminingSystem:
    table: SymbolTable
    coords: list[str]
    targets: list[str]
    fields: list[str]
    equations: list[LinearPdeEquation]

    @property
    def dim(self) -> int:
        return len(self.coords)

    @property
    def order(self) -> int:
        return max((eq.order for eq in self.equations), default=0)

    def source_symbol(self, a: int) -> Symbol:
        return self.table.lookup(self.coords[a])

    def target_symbol(self, a: int) -> Symbol:
        return self.table.lookup(self.targets[a])

    @classmethod
    def empty(cls, coords: list[str], targets: Optional[list[str]] = None,
              fields: Optional[list[str]] = None) -> "DeterminingSystem":
        targets = targets or [c.upper() for c in coords]
        fields = fields or [f"zeta{i + 1}" for i in range(len(coords))]
        table = SymbolTable()
        for c in coords:
            table.declare(c, SymbolKind.SOURCE)
        for t in targets:
            table.declare(t, SymbolKind.TARGET)
        return cls(table, list(coords), targets, fields, [])


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------


class _LinVal:
    """Scalar part plus jet-linear part, for linearity-checked parsing."""

    __slots__ = ("scalar", "jets")

    def __init__(self, scalar: ScalarExpr, jets=None):
        self.jets = {k: v for k, v in (jets or {}).items() if not v.is_zero}
        self.scalar = scalar


class _LinearSemantics:
    def __init__(self, table, coords, fields):
        self.table = table
        self.coords = coords
        self.fields = fields

    def _zero(self):
        return ScalarExpr(0, self.table)

    def integer(self, n):
        return _LinVal(ScalarExpr(n, self.table))

    def name(self, text, token):
        if text in self.coords:
            return _LinVal(self.table.expr(text))
        js = self._jet_symbol(text, token)
        if js is not None:
            return _LinVal(self._zero(), {js: ScalarExpr(1, self.table)})
        entry = self.table.get(text)
        if entry is not None and entry.kind is SymbolKind.TARGET:
            raise ParseError(
                f"target coordinate {text!r} cannot appear in determining equations",
                token.line, token.col)
        raise ParseError(f"unknown symbol {text!r}", token.line, token.col)

    def _jet_symbol(self, text, token):
        if text in self.fields:
            return JetSymbol(self.fields.index(text), MultiIndex())
        if "_" not in text:
            return None
        base, _, suffix = text.rpartition("_")
        if base not in self.fields:
            return None
        entries = _parse_coord_suffix(suffix, self.coords)
        if entries is None:
            raise ParseError(
                f"cannot read {suffix!r} as derivative coordinates in {text!r}",
                token.line, token.col)
        return JetSymbol(self.fields.index(base), MultiIndex(tuple(entries)))

    def add(self, a, b, token):
        jets = dict(a.jets)
        for k, v in b.jets.items():
            jets[k] = jets[k] + v if k in jets else v
        return _LinVal(a.scalar + b.scalar, jets)

    def sub(self, a, b, token):
        return self.add(a, self.neg(b), token)

    def neg(self, a):
        return _LinVal(-a.scalar, {k: -v for k, v in a.jets.items()})

    def mul(self, a, b, token):
        if a.jets and b.jets:
            raise NonlinearInputError(
                f"nonlinear term: product of jet symbols at line {token.line}")
        if b.jets:
            a, b = b, a
        return _LinVal(a.scalar * b.scalar,
                       {k: v * b.scalar for k, v in a.jets.items()})

    def div(self, a, b, token):
        if b.jets:
            raise NonlinearInputError(
                f"nonlinear term: division by a jet symbol at line {token.line}")
        if b.scalar.is_zero:
            raise ParseError("division by zero", token.line, token.col)
        return _LinVal(a.scalar / b.scalar,
                       {k: v / b.scalar for k, v in a.jets.items()})

    def power(self, a, b, token):
        if b.jets or not b.scalar.expr.is_Integer:
            raise ParseError("exponent must be an integer", token.line, token.col)
        n = int(b.scalar.expr)
        if a.jets:
            if n == 1:
                return a
            raise NonlinearInputError(
                f"nonlinear term: jet symbol raised to power {n} at line {token.line}")
        return _LinVal(a.scalar ** n)


def _parse_coord_suffix(suffix: str, coords: list[str]):
    # greedy, longest coordinate name first
    names = sorted(coords, key=len, reverse=True)
    entries = []
    rest = suffix
    while rest:
        for name in names:
            if rest.startswith(name):
                entries.append(coords.index(name))
                rest = rest[len(name):]
                break
        else:
            return None
    return entries


def _split_header(line: str, lineno: int) -> list[str]:
    _, _, rhs = line.partition(":")
    names = [n.strip() for n in rhs.split(",") if n.strip()]
    if not names:
        raise ParseError("empty declaration", lineno, 1)
    return names


def parse_system(text: str) -> DeterminingSystem:
    """Parse the determining-system DSL into a DeterminingSystem."""
    coords: list[str] = []
    targets: list[str] = []
    fields: list[str] = []
    raw_equations: list[tuple[str, int]] = []

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("coords:"):
            coords = _split_header(line, lineno)
        elif line.startswith("targets:"):
            targets = _split_header(line, lineno)
        elif line.startswith("fields:"):
            fields = _split_header(line, lineno)
        elif line.startswith("eq:"):
            raw_equations.append((line[3:].strip(), lineno))
        else:
            raise ParseError(f"unrecognized line {line!r}", lineno, 1)

    if not coords:
        raise ParseError("missing 'coords:' declaration")
    if not fields:
        raise ParseError("missing 'fields:' declaration")
    if len(fields) != len(coords):
        raise ParseError("fields must match coords positionally")
    if not targets:
        targets = [c.upper() for c in coords]
        if set(targets) & set(coords):
            raise ParseError("cannot auto-name targets; add an explicit 'targets:' line")
    if len(targets) != len(coords):
        raise ParseError("targets must match coords positionally")

    table = SymbolTable()
    for c in coords:
        table.declare(c, SymbolKind.SOURCE)
    for t in targets:
        table.declare(t, SymbolKind.TARGET)

    sem = _LinearSemantics(table, coords, fields)
    equations = []
    for text_eq, lineno in raw_equations:
        if text_eq.count("=") != 1:
            raise ParseError("an equation needs exactly one '='", lineno, 1)
        lhs_text, rhs_text = text_eq.split("=")
        lhs = ExprParser(tokenize(lhs_text, lineno), sem).parse()
        rhs = ExprParser(tokenize(rhs_text, lineno), sem).parse()
        diff = sem.sub(lhs, rhs, None)
        if not diff.scalar.is_zero:
            raise ParseError(
                f"equation is not homogeneous (constant term {diff.scalar})", lineno, 1)
        if not diff.jets:
            raise ParseError("equation has no jet symbols", lineno, 1)
        equations.append(LinearPdeEquation(dict(diff.jets)))

    return DeterminingSystem(table, coords, targets, fields, equations)


# ---------------------------------------------------------------------------
# Prolongation
# ---------------------------------------------------------------------------


def total_derivative(eq: LinearPdeEquation, a: int,
                     sys: DeterminingSystem) -> LinearPdeEquation:
    """D_{z^a} of a linear equation: differentiate coefficients, shift jets."""
    z_a = sys.source_symbol(a)
    terms: dict[JetSymbol, ScalarExpr] = {}

    def bump(js, c):
        if c.is_zero:
            return
        terms[js] = terms[js] + c if js in terms else c

    for js, c in eq.terms.items():
        bump(js, c.diff(z_a))
        bump(JetSymbol(js.component, js.index.append(a)), c)
    return LinearPdeEquation({k: v for k, v in terms.items() if not v.is_zero})


def prolong(sys: DeterminingSystem, n: int) -> DeterminingSystem:
    """Close the system under total derivatives up to jet order n."""
    if n < sys.order:
        raise ValueError(f"prolongation order {n} below system order {sys.order}")
    seen: dict[tuple, LinearPdeEquation] = {}
    queue = []
    for eq in sys.equations:
        key = eq.normal_key()
        if key not in seen:
            seen[key] = eq
            queue.append(eq)
    while queue:
        eq = queue.pop()
        for a in range(sys.dim):
            deq = total_derivative(eq, a, sys)
            if not deq.terms or deq.order > n:
                continue
            key = deq.normal_key()
            if key not in seen:
                seen[key] = deq
                queue.append(deq)
    equations = sorted(seen.values(),
                       key=lambda e: (e.pivot().sort_key(), str(e.normal_key())))
    return DeterminingSystem(sys.table, sys.coords, sys.targets, sys.fields, equations)


# ---------------------------------------------------------------------------
# Row reduction over the rational-function field
# ---------------------------------------------------------------------------


@dataclass
class SolvedSourceRelations:
    """Triangular solved form: each dependent jet -> combination of parametric jets."""

    system: DeterminingSystem
    order: int
    solved: dict[JetSymbol, dict[JetSymbol, ScalarExpr]]
    parametric: list[JetSymbol]
    assumptions: list[ScalarExpr]
    stable: bool = True

    def restricted(self, order: int) -> "SolvedSourceRelations":
        solved = {p: rhs for p, rhs in self.solved.items() if p.index.order <= order}
        parametric = [j for j in self.parametric if j.index.order <= order]
        return SolvedSourceRelations(self.system, order, solved, parametric,
                                     list(self.assumptions), self.stable)

    def shape_key(self):
        return frozenset(
            (p, frozenset((j, c.expr) for j, c in rhs.items()))
            for p, rhs in self.solved.items())


def reduce_system(sys: DeterminingSystem,
                  order: Optional[int] = None) -> SolvedSourceRelations:
    """Gaussian elimination, eliminating the highest-ordered jets first.

    ``order`` bounds the parametric enumeration; it defaults to the highest
    equation order but must be given explicitly for systems with few or no
    equations (the diffeomorphism pseudo-group has none at all).
    """
    pivot_rows: dict[JetSymbol, dict[JetSymbol, ScalarExpr]] = {}
    assumed: list[ScalarExpr] = []

    def note_division(c: ScalarExpr):
        expr = _nonzero_normal_form(c.expr)
        if expr is None:
            return
        if all(expr != a.expr for a in assumed):
            assumed.append(ScalarExpr(expr, sys.table))

    def substitute_into(row, pivot, c):
        for j, v in pivot_rows[pivot].items():
            cur = row.get(j)
            nv = c * v if cur is None else cur + c * v
            if nv.is_zero:
                row.pop(j, None)
            else:
                row[j] = nv

    for eq in sys.equations:
        row = dict(eq.terms)
        pivot = None
        while row:
            pivot = max(row, key=term_key)
            if pivot not in pivot_rows:
                break
            substitute_into(row, pivot, row.pop(pivot))
        else:
            continue  # redundant equation
        c = row.pop(pivot)
        note_division(c)
        rhs = {j: -(v / c) for j, v in row.items()}
        pivot_rows[pivot] = rhs

    # back substitution: right-hand sides over parametric jets only
    changed = True
    while changed:
        changed = False
        for p in list(pivot_rows):
            rhs = pivot_rows[p]
            hits = [j for j in rhs if j in pivot_rows]
            if not hits:
                continue
            new = dict(rhs)
            for j in hits:
                substitute_into(new, j, new.pop(j))
            pivot_rows[p] = new
            changed = True

    order = sys.order if order is None else max(order, sys.order)
    parametric = [
        JetSymbol(b, A)
        for A in all_indices(sys.dim, order)
        for b in range(sys.dim)
        if JetSymbol(b, A) not in pivot_rows
    ]
    parametric.sort(key=term_key)
    return SolvedSourceRelations(sys, order, pivot_rows, parametric, assumed)


def solve_to_order(sys: DeterminingSystem, order: int,
                   cap: Optional[int] = None) -> SolvedSourceRelations:
    """Prolong-and-solve until the solved shape at the working order stabilizes.

    Late integrability conditions show up as new low-order relations when the
    system is prolonged further; if the shape is still changing at the cap the
    result is flagged unstable.
    """
    start = max(order, sys.order)
    cap = max(cap if cap is not None else order + 2, start + 1)
    prev_shape = None
    last = None
    for k in range(start, cap + 1):
        sol = reduce_system(prolong(sys, k), order=k).restricted(order)
        shape = sol.shape_key()
        if shape == prev_shape:
            sol.stable = True
            return sol
        prev_shape = shape
        last = sol
    last.stable = False
    return last


# ---------------------------------------------------------------------------
# Lifting (source -> target, jets -> Maurer-Cartan generators)
# ---------------------------------------------------------------------------


@dataclass
class LiftedRelations:
    """Solved linear relations among Maurer-Cartan generators at a target fiber."""

    system: DeterminingSystem
    order: int
    solved: dict[McGenerator, OneForm]
    parametric: list[McGenerator]
    assumptions: list[ScalarExpr]
    stable: bool = True


def lift(solved: SolvedSourceRelations) -> LiftedRelations:
    """Replace z by Z and zeta^b_A by mu^b_A, keeping the triangular shape."""
    sys = solved.system
    rename = {sys.source_symbol(a): sys.table.expr(sys.targets[a])
              for a in range(sys.dim)}

    def lift_coeff(c: ScalarExpr) -> ScalarExpr:
        return c.substitute(rename)

    lifted: dict[McGenerator, OneForm] = {}
    for p, rhs in solved.solved.items():
        form = OneForm({McGenerator(j.component, j.index): lift_coeff(v)
                        for j, v in rhs.items()})
        lifted[McGenerator(p.component, p.index)] = form
    parametric = [McGenerator(j.component, j.index) for j in solved.parametric]
    assumptions = [lift_coeff(a) for a in solved.assumptions]
    return LiftedRelations(sys, solved.order, lifted, parametric,
                           assumptions, solved.stable)
