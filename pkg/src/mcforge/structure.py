"""Maurer-Cartan structure equations: diffeomorphism expansion and reduction.

``diffeo_structure_equation`` expands d mu^a_C over all splits C = (A, B) with
multinomial weights; ``pseudo_group_structure`` runs the whole pipeline
(prolong, solve, lift, expand, reduce) and the d-squared checker closes the
equations one order higher to verify integrability.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .detsys import DeterminingSystem, LiftedRelations, lift, solve_to_order
from .exterior import (
    McGenerator,
    ThreeForm,
    TwoForm,
    d_apply_two,
    reduce_two,
)
from .kernel import McforgeError, ScalarExpr
from .multiindex import MultiIndex, multinomial, sub_multisets


class InternalReductionError(McforgeError):
    """A source coordinate survived into a reduced structure equation."""


def diffeo_structure_equation(a: int, C: MultiIndex, m: int) -> TwoForm:
    """d mu^a_C for the full diffeomorphism pseudo-group, no relations applied."""
    terms: dict = {}
    for A, B in sub_multisets(C):
        weight = multinomial(C, A)
        for b in range(m):
            lhs = McGenerator(a, A.append(b))
            rhs = McGenerator(b, B)
            if lhs == rhs:
                continue
            key, sign = ((lhs, rhs), 1) if lhs < rhs else ((rhs, lhs), -1)
            c = ScalarExpr(weight * sign)
            terms[key] = terms[key] + c if key in terms else c
    return TwoForm(terms)


@dataclass
class StructureEquationSet:
    """Structure equations d(basis generator) = TwoForm, in basis order."""

    system: DeterminingSystem
    dim: int
    order: int
    basis: list[McGenerator]
    equations: dict[McGenerator, TwoForm]
    relations: LiftedRelations
    assumptions: list[ScalarExpr]
    coefficient_dependence: dict[McGenerator, list[str]] = field(default_factory=dict)
    stable: bool = True

    def rhs_generators(self) -> list[McGenerator]:
        gens = set()
        for two in self.equations.values():
            for g, h in two.terms:
                gens.add(g)
                gens.add(h)
        return sorted(gens, key=McGenerator.sort_key)


def pseudo_group_structure(sys: DeterminingSystem, n: int,
                           cap: int | None = None) -> StructureEquationSet:
    """Structure equations for the parametric Maurer-Cartan forms of order <= n.

    The determining system is prolonged and solved to order n+1 (d of an
    order-n form involves order-(n+1) generators), lifted, and the
    diffeomorphism equations are reduced modulo the lifted relations.
    """
    if n < 0:
        raise ValueError("order must be >= 0")
    working = n + 1
    solved = solve_to_order(sys, working, cap=cap if cap is not None else n + 3)
    relations = lift(solved)
    basis = [g for g in relations.parametric if g.index.order <= n]

    target_names = set(sys.targets)
    source_names = set(sys.coords)
    equations: dict[McGenerator, TwoForm] = {}
    dependence: dict[McGenerator, list[str]] = {}
    for g in basis:
        raw = diffeo_structure_equation(g.component, g.index, sys.dim)
        reduced = reduce_two(raw, relations)
        used = set()
        for coeff in reduced.terms.values():
            names = coeff.free_names
            if names & source_names:
                raise InternalReductionError(
                    f"source coordinates {names & source_names} in d{g}")
            used |= names & target_names
        equations[g] = reduced
        dependence[g] = sorted(used)

    return StructureEquationSet(
        system=sys, dim=sys.dim, order=n, basis=basis, equations=equations,
        relations=relations, assumptions=list(relations.assumptions),
        coefficient_dependence=dependence, stable=relations.stable)


@dataclass
class D2Report:
    order: int
    residues: dict[McGenerator, ThreeForm]

    @property
    def ok(self) -> bool:
        return all(r.is_zero for r in self.residues.values())

    def failures(self) -> list[McGenerator]:
        return [g for g, r in self.residues.items() if not r.is_zero]


def d_squared_residues(eqs: StructureEquationSet,
                       generators: list[McGenerator]) -> dict[McGenerator, ThreeForm]:
    """d(d g) for each generator, using eqs as the rule set (must be closed)."""
    out = {}
    for g in generators:
        out[g] = d_apply_two(eqs.equations[g], eqs.equations, eqs.relations)
    return out


def check_d_squared(eqs: StructureEquationSet, cap: int | None = None) -> D2Report:
    """Verify d(d g) = 0 for every basis generator of eqs.

    The rule set is extended internally by one order so that every generator
    on a right-hand side has its own structure equation.
    """
    closed = pseudo_group_structure(eqs.system, eqs.order + 1, cap=cap)
    residues = d_squared_residues(closed, eqs.basis)
    return D2Report(eqs.order, residues)
