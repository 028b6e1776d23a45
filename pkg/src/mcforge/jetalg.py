"""Lie algebra of vector-field jets and the duality check against structure equations.

Monomial fields v_a^A = (z - z0)^A / A! d/dz^a have integer bracket
coefficients built from multinomials and single deletions; truncated jets
extend them bilinearly, losing one order per bracket.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Optional

from .detsys import DeterminingSystem, solve_to_order
from .exterior import McGenerator
from .kernel import DegeneratePointError, McforgeError, ScalarExpr
from .multiindex import MultiIndex, delete_one, multinomial
from .structure import StructureEquationSet


class TruncationMismatchError(McforgeError):
    pass


@dataclass(frozen=True)
class MonomialVectorField:
    component: int
    index: MultiIndex

    def sort_key(self):
        return (self.index.order, self.component, self.index.entries)


def bracket_monomial(a: int, A: MultiIndex, b: int, B: MultiIndex
                     ) -> list[tuple[int, int, MultiIndex]]:
    """[v_a^A, v_b^B] as (integer coefficient, component, index) terms."""
    raw = []
    B_del = delete_one(B, a)
    if B_del is not None:
        target = A.union(B_del)
        raw.append((multinomial(target, A), b, target))
    A_del = delete_one(A, b)
    if A_del is not None:
        target = B.union(A_del)
        raw.append((-multinomial(target, B), a, target))
    combined: dict[tuple[int, MultiIndex], int] = {}
    for c, comp, idx in raw:
        key = (comp, idx)
        combined[key] = combined.get(key, 0) + c
    return [(c, comp, idx) for (comp, idx), c in combined.items() if c != 0]


class JetVectorField:
    """Truncated Taylor jet of a vector field at the session base point.

    Coefficients map (component, multi-index) to exact scalars; everything of
    order above the truncation is dropped.
    """

    __slots__ = ("coefficients", "truncation")

    def __init__(self, coefficients: Mapping, truncation: int):
        self.truncation = truncation
        coeffs = {}
        for (comp, idx), value in coefficients.items():
            if idx.order > truncation:
                continue
            if not isinstance(value, ScalarExpr):
                value = ScalarExpr(value)
            if not value.is_zero:
                coeffs[(comp, idx)] = value
        self.coefficients = coeffs

    @classmethod
    def monomial(cls, comp: int, idx: MultiIndex, truncation: int) -> "JetVectorField":
        return cls({(comp, idx): ScalarExpr(1)}, truncation)

    @property
    def is_zero(self) -> bool:
        return not self.coefficients

    def coefficient(self, comp: int, idx: MultiIndex) -> ScalarExpr:
        return self.coefficients.get((comp, idx), ScalarExpr(0))

    def pair(self, g: McGenerator) -> ScalarExpr:
        """Dual pairing <mu^a_A, jet> = coefficient at (a, A)."""
        return self.coefficient(g.component, g.index)

    def truncate(self, order: int) -> "JetVectorField":
        if order > self.truncation:
            raise TruncationMismatchError(
                f"cannot extend truncation {self.truncation} to {order}")
        return JetVectorField(self.coefficients, order)

    def __add__(self, other: "JetVectorField") -> "JetVectorField":
        if other.truncation != self.truncation:
            raise TruncationMismatchError("mismatched truncations")
        coeffs = dict(self.coefficients)
        for key, v in other.coefficients.items():
            coeffs[key] = coeffs[key] + v if key in coeffs else v
        return JetVectorField(coeffs, self.truncation)

    def __sub__(self, other):
        return self + other.scale(ScalarExpr(-1))

    def scale(self, c) -> "JetVectorField":
        if not isinstance(c, ScalarExpr):
            c = ScalarExpr(c)
        return JetVectorField(
            {k: v * c for k, v in self.coefficients.items()}, self.truncation)

    def __eq__(self, other):
        if not isinstance(other, JetVectorField):
            return NotImplemented
        keys = set(self.coefficients) | set(other.coefficients)
        return all(self.coefficient(*k) == other.coefficient(*k) for k in keys)

    def __repr__(self):
        items = sorted(self.coefficients.items(),
                       key=lambda kv: (kv[0][1].sort_key(), kv[0][0]))
        body = " + ".join(f"({c})*v[{comp}]{idx.entries}"
                          for (comp, idx), c in items)
        return f"Jet<{self.truncation}>({body or '0'})"


def bracket(v: JetVectorField, w: JetVectorField) -> JetVectorField:
    """Lie bracket of jets; the result is exact one order below the inputs."""
    if v.truncation != w.truncation:
        raise TruncationMismatchError(
            f"mismatched truncations {v.truncation} != {w.truncation}")
    out_trunc = v.truncation - 1
    coeffs: dict = {}
    for (a, A), cv in v.coefficients.items():
        for (b, B), cw in w.coefficients.items():
            for c, comp, idx in bracket_monomial(a, A, b, B):
                if idx.order > out_trunc:
                    continue
                key = (comp, idx)
                term = cv * cw * c
                coeffs[key] = coeffs[key] + term if key in coeffs else term
    return JetVectorField(coeffs, out_trunc)


def _point_map(sys: DeterminingSystem, point: Mapping[str, object], target: bool):
    names = sys.targets if target else sys.coords
    out = {}
    for a, coord in enumerate(sys.coords):
        if coord not in point:
            raise McforgeError(f"missing coordinate {coord!r} in evaluation point")
        out[sys.table.lookup(names[a])] = point[coord]
    return out


def default_point(sys: DeterminingSystem) -> dict[str, Fraction]:
    """All source coordinates set to 1, dodging the x = 0 degeneracies."""
    return {c: Fraction(1) for c in sys.coords}


def solution_basis(sys: DeterminingSystem, point: Mapping[str, object],
                   N: int, cap: Optional[int] = None) -> list[JetVectorField]:
    """Echelon basis of the determining system's solution jets at the point.

    The system is solved one order above N so that order-N data is exact.
    Values in ``point`` may be rationals or declared parameter symbols.
    """
    sol = solve_to_order(sys, N + 1, cap=cap)
    subs = _point_map(sys, point, target=False)
    for assumption in sol.assumptions:
        if assumption.substitute(subs).is_zero:
            raise DegeneratePointError(
                f"assumed-nonzero function {assumption} vanishes at the point")
    basis = []
    dependents = [(d, rhs) for d, rhs in sol.solved.items()
                  if d.index.order <= N]
    for p in sol.parametric:
        if p.index.order > N:
            continue
        coeffs = {(p.component, p.index): ScalarExpr(1)}
        for d, rhs in dependents:
            c = rhs.get(p)
            if c is None:
                continue
            value = c.substitute(subs)
            if not value.is_zero:
                coeffs[(d.component, d.index)] = value
        basis.append(JetVectorField(coeffs, N))
    return basis


def expand_in_basis(v: JetVectorField, sol_parametric: list) -> dict:
    """Coordinates of a solution jet with respect to an echelon basis."""
    return {p: v.coefficient(p.component, p.index)
            for p in sol_parametric if p.index.order <= v.truncation}


@dataclass
class DualityReport:
    pairings: int
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def check_duality(eqs: StructureEquationSet, basis: list[JetVectorField],
                  point: Mapping[str, object]) -> DualityReport:
    """Check (d g)(v_i, v_j) = -<g, [v_i, v_j]> for all basis generators and jet pairs.

    Structure-equation coefficients are evaluated at the target point, which
    coincides with the source point on the identity fiber.
    """
    subs = _point_map(eqs.system, point, target=True)
    evaluated = {}
    for g in eqs.basis:
        evaluated[g] = [(h, k, c.substitute(subs))
                        for (h, k), c in eqs.equations[g].terms.items()]
    pairings = 0
    violations = []
    for i, j in itertools.combinations(range(len(basis)), 2):
        vi, vj = basis[i], basis[j]
        br = bracket(vi, vj)
        for g in eqs.basis:
            lhs = ScalarExpr(0)
            for h, k, c in evaluated[g]:
                lhs = lhs + c * (vi.pair(h) * vj.pair(k) - vj.pair(h) * vi.pair(k))
            rhs = -br.pair(g)
            pairings += 1
            if lhs != rhs:
                violations.append((g, i, j, lhs, rhs))
    return DualityReport(pairings, violations)


@dataclass
class JacobiReport:
    triples: int
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def jacobi_check(basis: list[JetVectorField]) -> JacobiReport:
    """Cyclic double brackets must vanish at truncation N - 2."""
    triples = 0
    violations = []
    for i, j, k in itertools.combinations(range(len(basis)), 3):
        u, v, w = basis[i], basis[j], basis[k]
        total = (bracket(bracket(u, v), w.truncate(u.truncation - 1))
                 + bracket(bracket(v, w), u.truncate(u.truncation - 1))
                 + bracket(bracket(w, u), v.truncate(u.truncation - 1)))
        triples += 1
        if not total.is_zero:
            violations.append((i, j, k, total))
    return JacobiReport(triples, violations)


def structure_constants(eqs: StructureEquationSet,
                        point: Mapping[str, object]) -> list[tuple[int, int, int, ScalarExpr]]:
    """Coefficients C^i_{jk} of d mu^i = sum_{j<k} C^i_{jk} mu^j ^ mu^k at the point.

    Indices refer to positions in eqs.basis; pairs involving generators
    outside the basis are skipped (infinite-type tails).
    """
    subs = _point_map(eqs.system, point, target=True)
    pos = {g: i for i, g in enumerate(eqs.basis)}
    out = []
    for i, g in enumerate(eqs.basis):
        for (h, k), c in sorted(eqs.equations[g].terms.items(),
                                key=lambda kv: (kv[0][0].sort_key(), kv[0][1].sort_key())):
            if h in pos and k in pos:
                value = c.substitute(subs)
                if not value.is_zero:
                    out.append((i, pos[h], pos[k], value))
    return out
