import itertools
import math
from fractions import Fraction

import pytest
import sympy as sp

from mcforge.detsys import DeterminingSystem, prolong
from mcforge.exterior import McGenerator
from mcforge.jetalg import (
    JetVectorField,
    TruncationMismatchError,
    bracket,
    bracket_monomial,
    check_duality,
    default_point,
    expand_in_basis,
    jacobi_check,
    solution_basis,
    structure_constants,
)
from mcforge.kernel import DegeneratePointError, ScalarExpr
from mcforge.multiindex import MultiIndex, all_indices, factorial_weight
from mcforge.structure import pseudo_group_structure


def mi(*entries):
    return MultiIndex(entries)


def mc(comp, *entries):
    return McGenerator(comp, MultiIndex(entries))


# ---------------------------------------------------------------------------
# Monomial brackets against a symbolic vector-field oracle
# ---------------------------------------------------------------------------


def sympy_bracket(a, A, b, B, m):
    """[x^A/A! d_a, x^B/B! d_b] expanded in the monomial basis x^C/C! d_c."""
    xs = sp.symbols(f"x0:{m}")
    pA = sp.prod([xs[e] for e in A.entries]) / factorial_weight(A)
    pB = sp.prod([xs[e] for e in B.entries]) / factorial_weight(B)
    # commutator components: v(w^c) - w(v^c)
    comp = {b: sp.Integer(0), a: sp.Integer(0)}
    comp[b] += pA * sp.diff(pB, xs[a])
    comp[a] -= pB * sp.diff(pA, xs[b])
    out = {}
    for c, expr in comp.items():
        expr = sp.expand(expr)
        if expr == 0:
            continue
        for monom, coeff in sp.Poly(expr, *xs).terms():
            C = MultiIndex(tuple(itertools.chain.from_iterable(
                (i,) * k for i, k in enumerate(monom))))
            value = int(coeff * factorial_weight(C))
            key = (c, C)
            out[key] = out.get(key, 0) + value
    return {k: v for k, v in out.items() if v}


@pytest.mark.parametrize("m", [1, 2])
def test_bracket_monomial_against_sympy(m):
    idxs = all_indices(m, 3)
    for a, b in itertools.product(range(m), repeat=2):
        for A, B in itertools.product(idxs, repeat=2):
            got = {(comp, idx): c for c, comp, idx in bracket_monomial(a, A, b, B)}
            assert got == sympy_bracket(a, A, b, B, m), (a, A, b, B)


def test_bracket_monomial_examples():
    # [d_x, x d_x] = d_x
    assert bracket_monomial(0, mi(), 0, mi(0)) == [(1, 0, mi())]
    # [x d_x, x^2/2 d_x] = x^2/2 d_x
    assert bracket_monomial(0, mi(0), 0, mi(0, 0)) == [(1, 0, mi(0, 0))]
    # [d_x, d_y] = 0
    assert bracket_monomial(0, mi(), 1, mi()) == []


def test_bracket_1d_closed_form():
    # [v_j, v_k] = (C(j+k-1, j) - C(j+k-1, k)) v_{j+k-1}
    for j in range(6):
        for k in range(6):
            got = bracket_monomial(0, mi(*([0] * j)), 0, mi(*([0] * k)))
            c = math.comb(j + k - 1, j) - math.comb(j + k - 1, k) \
                if j + k >= 1 else 0
            expected = [(c, 0, mi(*([0] * (j + k - 1))))] if c else []
            assert got == expected, (j, k)


# ---------------------------------------------------------------------------
# Truncated jets
# ---------------------------------------------------------------------------


def test_jet_truncation_drops_high_order():
    v = JetVectorField({(0, mi()): 1, (0, mi(0, 0, 0)): 5}, 2)
    assert (0, mi(0, 0, 0)) not in v.coefficients
    with pytest.raises(TruncationMismatchError):
        v.truncate(3)


def test_bracket_truncation_bookkeeping():
    v = JetVectorField.monomial(0, mi(), 3)
    w = JetVectorField.monomial(0, mi(0), 3)
    out = bracket(v, w)
    assert out.truncation == 2
    assert out == JetVectorField.monomial(0, mi(), 2)
    with pytest.raises(TruncationMismatchError):
        bracket(v, out)


def test_bracket_antisymmetric_bilinear():
    u = JetVectorField({(0, mi(0)): 2, (1, mi(1, 1)): ScalarExpr(Fraction(1, 3))}, 3)
    v = JetVectorField({(1, mi()): 1, (0, mi(0, 1)): -1}, 3)
    w = JetVectorField({(0, mi()): 1, (1, mi(0)): 4}, 3)
    assert bracket(u, v) == bracket(v, u).scale(-1)
    assert bracket(u + w, v) == bracket(u, v) + bracket(w, v)
    assert bracket(u.scale(7), v) == bracket(u, v).scale(7)
    assert bracket(u, u).is_zero


def test_jacobi_on_monomial_bases():
    for m in (1, 2):
        sys = DeterminingSystem.empty(["x", "y"][:m])
        basis = solution_basis(sys, default_point(sys), 4)
        report = jacobi_check(basis)
        assert report.ok
        assert report.triples == math.comb(len(basis), 3)


# ---------------------------------------------------------------------------
# Solution bases
# ---------------------------------------------------------------------------


def test_diffeo_solution_basis_is_monomial():
    sys = DeterminingSystem.empty(["x"])
    basis = solution_basis(sys, default_point(sys), 3)
    assert len(basis) == 4
    for v, order in zip(basis, range(4)):
        assert v.coefficients == {(0, mi(*([0] * order))): ScalarExpr(1)}


def test_translation_solution_basis(translation_system):
    basis = solution_basis(translation_system, {"x": 1, "y": 0}, 3)
    assert len(basis) == 1
    (v,) = basis
    # the jet of x d_y at (1, 0): eta = 1, eta_x = 1, all else zero
    assert v.coefficients == {(1, mi()): ScalarExpr(1), (1, mi(0)): ScalarExpr(1)}


def test_translation_degenerate_point(translation_system):
    with pytest.raises(DegeneratePointError):
        solution_basis(translation_system, {"x": 0, "y": 0}, 2)


def test_essential_solution_basis_satisfies_system(essential_system):
    point = {"x": Fraction(1), "y": Fraction(2), "z": Fraction(-1)}
    N = 3
    basis = solution_basis(essential_system, point, N)
    prolonged = prolong(essential_system, N)
    subs = {essential_system.table.lookup(c): point[c]
            for c in essential_system.coords}
    for v in basis:
        for eq in prolonged.equations:
            total = ScalarExpr(0, essential_system.table)
            for js, c in eq.terms.items():
                coeff = v.coefficient(js.component, js.index)
                if not coeff.is_zero:
                    total = total + c.substitute(subs) * coeff
            assert total.is_zero


def test_expand_in_basis_roundtrip(essential_system):
    point = default_point(essential_system)
    basis = solution_basis(essential_system, point, 2)
    sol = pseudo_group_structure(essential_system, 1).relations
    parametric = [McGenerator(g.component, g.index) for g in sol.parametric]
    combo = basis[0].scale(3) + basis[2].scale(-2)
    coords = expand_in_basis(combo, parametric)
    rebuilt = JetVectorField({}, 2)
    for i, p in enumerate(parametric):
        if p.index.order <= 2:
            rebuilt = rebuilt + basis[i].scale(coords[p])
    assert rebuilt == combo


# ---------------------------------------------------------------------------
# Duality
# ---------------------------------------------------------------------------


def test_duality_1d_single_pairing():
    # (d mu_2)(v_1, v_2) = -<mu_2, [v_1, v_2]> = -1 by hand
    sys = DeterminingSystem.empty(["x"])
    eqs = pseudo_group_structure(sys, 2)
    point = default_point(sys)
    basis = solution_basis(sys, point, 3)
    v1, v2 = basis[1], basis[2]
    br = bracket(v1, v2)
    assert br == JetVectorField.monomial(0, mi(0, 0), 2)
    g = mc(0, 0, 0)
    # evaluate d mu_2 on (v1, v2) by the wedge convention
    total = ScalarExpr(0)
    for (h, k), c in eqs.equations[g].terms.items():
        total = total + c * (v1.pair(h) * v2.pair(k) - v2.pair(h) * v1.pair(k))
    assert total == -1
    assert -br.pair(g) == -1


@pytest.mark.parametrize("m,order", [(1, 2), (1, 3), (2, 2)])
def test_duality_diffeo(m, order):
    sys = DeterminingSystem.empty(["x", "y"][:m])
    point = default_point(sys)
    eqs = pseudo_group_structure(sys, order)
    basis = solution_basis(sys, point, order + 1)
    report = check_duality(eqs, basis, point)
    assert report.ok
    assert report.pairings == math.comb(len(basis), 2) * len(eqs.basis)


def test_duality_essential(essential_system):
    point = {"x": Fraction(1), "y": Fraction(1), "z": Fraction(1)}
    eqs = pseudo_group_structure(essential_system, 1)
    basis = solution_basis(essential_system, point, 2)
    report = check_duality(eqs, basis, point)
    assert report.ok and report.pairings > 0


def test_duality_detects_wrong_sign(essential_system):
    point = default_point(essential_system)
    eqs = pseudo_group_structure(essential_system, 1)
    eqs.equations[mc(1)] = -eqs.equations[mc(1)]
    basis = solution_basis(essential_system, point, 2)
    report = check_duality(eqs, basis, point)
    assert not report.ok


# ---------------------------------------------------------------------------
# Structure constants vs brackets
# ---------------------------------------------------------------------------


def test_structure_constants_match_brackets(essential_system):
    """d mu^i = sum D^i_{jk} mu^j ^ mu^k pairs with [v_j, v_k] = -sum D^i_{jk} v_i."""
    point = {"x": Fraction(1), "y": Fraction(1), "z": Fraction(1)}
    eqs = pseudo_group_structure(essential_system, 1)
    basis = solution_basis(essential_system, point, 2)
    constants = {(i, j, k): c for i, j, k, c in structure_constants(eqs, point)}
    pos = {g: i for i, g in enumerate(eqs.basis)}
    for j in range(len(eqs.basis)):
        for k in range(j + 1, len(eqs.basis)):
            br = bracket(basis[j], basis[k])
            for g, i in pos.items():
                expected = -constants.get((i, j, k), ScalarExpr(0))
                assert br.pair(g) == expected, (i, j, k)


def test_structure_constants_abelian(translation_system):
    eqs = pseudo_group_structure(translation_system, 0)
    assert structure_constants(eqs, {"x": 1, "y": 0}) == []
