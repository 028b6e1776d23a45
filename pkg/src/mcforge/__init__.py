"""mcforge: Maurer-Cartan structure equations of Lie pseudo-groups.

Compute the structure equations of a Lie pseudo-group directly from its
linear infinitesimal determining equations, and verify them independently
against the dual Lie brackets of infinitesimal-generator jets.
"""

from .detsys import (
    DeterminingSystem,
    JetSymbol,
    LiftedRelations,
    LinearPdeEquation,
    SolvedSourceRelations,
    lift,
    parse_system,
    prolong,
    reduce_system,
    solve_to_order,
)
from .exterior import McGenerator, OneForm, ThreeForm, TwoForm, d_apply, reduce_form, wedge
from .jetalg import (
    JetVectorField,
    MonomialVectorField,
    bracket,
    bracket_monomial,
    check_duality,
    jacobi_check,
    solution_basis,
)
from .kernel import (
    DegeneratePointError,
    McforgeError,
    ParseError,
    ScalarExpr,
    Symbol,
    SymbolKind,
    SymbolTable,
    declare_symbols,
    parse_expr,
)
from .multiindex import MultiIndex, delete_one, factorial_weight, multinomial, sub_multisets
from .structure import (
    StructureEquationSet,
    check_d_squared,
    diffeo_structure_equation,
    pseudo_group_structure,
)

__version__ = "0.1.0"

__all__ = [
    "DeterminingSystem", "JetSymbol", "LiftedRelations", "LinearPdeEquation",
    "SolvedSourceRelations", "lift", "parse_system", "prolong", "reduce_system",
    "solve_to_order", "McGenerator", "OneForm", "TwoForm", "ThreeForm",
    "d_apply", "reduce_form", "wedge", "JetVectorField", "MonomialVectorField",
    "bracket", "bracket_monomial", "check_duality", "jacobi_check",
    "solution_basis", "DegeneratePointError", "McforgeError", "ParseError",
    "ScalarExpr", "Symbol", "SymbolKind", "SymbolTable", "declare_symbols",
    "parse_expr", "MultiIndex", "delete_one", "factorial_weight", "multinomial",
    "sub_multisets", "StructureEquationSet", "check_d_squared",
    "diffeo_structure_equation", "pseudo_group_structure", "__version__",
]
