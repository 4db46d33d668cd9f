from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from greenfn.cli import parse_ascii
from greenfn.symring import (
    ONE,
    Q,
    ZERO,
    RationalFunction,
    RationalPoly,
    SignAssignment,
    SignExpr,
    SymExpr,
    SymringError,
    arith,
    check_integral,
    check_nonneg,
    cyclotomic,
    cyclotomic_display,
    eval_at,
    from_json,
    parse_display,
    substitute,
    to_json,
)

fracs = st.fractions(min_value=-20, max_value=20, max_denominator=6)
polys = st.lists(fracs, max_size=6).map(RationalPoly)
nonzero_polys = polys.filter(bool)
SIGNS = ["a10", "a22", "a27"]
monos = st.frozensets(st.sampled_from(SIGNS), max_size=2)
sign_exprs = st.dictionaries(monos, polys, max_size=3).map(SignExpr)
sym_exprs = st.one_of(
    sign_exprs.map(SymExpr),
    st.tuples(sign_exprs, sign_exprs).map(lambda t: SymExpr(cases={1: t[0], 3: t[1]})),
)


# -- oracles ------------------------------------------------------------------


def test_cyclotomic_values():
    assert cyclotomic(1) == Q - 1
    assert cyclotomic(2) == Q + 1
    assert cyclotomic(3) == Q**2 + Q + 1
    assert cyclotomic(4) == Q**2 + 1
    assert cyclotomic(6) == Q**2 - Q + 1


def test_spin8_order_display():
    order = Q**12 * (Q**2 - 1) * (Q**4 - 1) ** 2 * (Q**6 - 1)
    assert cyclotomic_display(order) == "q^12P1^4P2^4P3P4^2P6"


@pytest.mark.parametrize(
    "text",
    ["P2P3P4^2P6", "q^4+3*q^3+3*q^2+q+1", "1/4*(q-a22-4)", "1/2*P1P2", ".", "-q^4P1", "2*q",
     "1/4*qP1^2", "1/2*(-a22+1)", "-2*q", "1", "-P1P3P4^2P6", "q^3P2"],
)
def test_table_strings_round_trip(text):
    assert cyclotomic_display(parse_display(text)) == text


def test_golden_cells_round_trip(golden):
    for text in golden.values():
        _, _, cells = parse_ascii(text)
        for row in cells:
            for c in row:
                assert cyclotomic_display(parse_display(c)) == c


def test_signed_factor_display():
    a10 = SymExpr.sign("a10")
    x = (a10 - 1) * SymExpr(Q**4 + Q**3) * SymExpr(RationalPoly.const(Fraction(1, 4)))
    assert cyclotomic_display(x) == "1/4*q^3P2*(a10-1)"
    assert cyclotomic_display(-SymExpr.sign("a22")) == "-a22"


def test_split_display_and_parse():
    x = SymExpr(cases={1: SignExpr.lift(Q), 3: SignExpr.lift(-Q)})
    s = cyclotomic_display(x)
    assert s == "{1:q;3:-q}"
    assert parse_display(s) == x


def test_equal_branches_collapse():
    x = SymExpr(cases={1: SignExpr.lift(Q), 3: SignExpr.lift(Q)})
    assert not x.is_split


def test_sign_squares_to_one():
    a = SymExpr.sign("a22")
    assert a * a == SymExpr(1)


def test_substitute_per_residue():
    x = SymExpr(Q) - SymExpr.sign("a22")
    s = SignAssignment({1: {"a22": 1}, 3: {"a22": -1}})
    y = substitute(x, s)
    assert y.branch(1) == SignExpr.lift(Q - 1) and y.branch(3) == SignExpr.lift(Q + 1)


def test_substitute_unassigned_errors():
    with pytest.raises(SymringError):
        substitute(SymExpr.sign("a10"), {"a22": 1})


def test_nonneg_oracles():
    assert check_nonneg(SymExpr(Q - 3), 3)
    assert not check_nonneg(SymExpr(Q - 4), 3)
    # (q-4)^2 touches zero but never goes negative
    assert check_nonneg(SymExpr((Q - 4) ** 2), 3)
    # negative between 3.5 and 3.6 only: caught by the root count
    p = (Q - Fraction(7, 2)) * (Q - Fraction(18, 5))
    assert not check_nonneg(SymExpr(p), 3)


def test_nonneg_residue_start():
    # q - 4 is negative at q = 3 but the branch for q = 1 mod 4 starts at 5
    x = SymExpr(cases={1: SignExpr.lift(Q - 4), 3: SignExpr.lift(Q - 3)})
    assert check_nonneg(x, 3)
    assert check_nonneg(x, 3, residue=1)


def test_integral_oracles():
    assert check_integral(SymExpr(Q * (Q - 1) / 2))
    assert not check_integral(SymExpr(Q / 2))
    # (q - 1)/4 is integral only for q = 1 mod 4
    x = SymExpr((Q - 1) / 4)
    assert check_integral(x, residue=1)
    assert not check_integral(x, residue=3)
    assert check_integral(SymExpr((Q * Q - 1) / 8))


def test_eval_at():
    assert eval_at(SymExpr(cyclotomic(2) * cyclotomic(3)), 3) == 4 * 13
    with pytest.raises(SymringError):
        eval_at(SymExpr.sign("a10"), 3)


def test_divmod_and_gcd():
    a = (Q - 1) * (Q + 2)
    b = (Q - 1) * (Q**2 + 1)
    assert a.gcd(b) == Q - 1
    quo, rem = divmod(Q**3 + 1, Q + 1)
    assert quo == Q**2 - Q + 1 and not rem


def test_rational_function_reduced():
    f = RationalFunction((Q - 1) * (Q + 1), 2 * (Q - 1))
    assert f.is_poly() and f.to_poly() == (Q + 1) / 2
    with pytest.raises(SymringError):
        RationalFunction(ONE, ZERO)


def test_arith_scalar_div():
    assert arith(SymExpr(Q), 2, "scalar_div") == SymExpr(Q / 2)
    with pytest.raises(SymringError):
        arith(SymExpr(Q), 0, "scalar_div")


# -- properties ---------------------------------------------------------------


@given(polys, polys, polys)
def test_poly_ring_laws(a, b, c):
    assert a + b == b + a
    assert a * b == b * a
    assert (a + b) + c == a + (b + c)
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a - a == ZERO


@given(polys, nonzero_polys)
def test_division_algorithm(a, b):
    quo, rem = divmod(a, b)
    assert quo * b + rem == a
    assert not rem or rem.degree < b.degree


@given(polys, st.integers(-5, 5), st.integers(-5, 5))
def test_compose_linear(p, a, b):
    t = Fraction(3, 2)
    assert p.compose_linear(a, b)(t) == p(a * t + b)


@given(sign_exprs, sign_exprs, sign_exprs)
def test_sign_ring_laws(a, b, c):
    assert a * b == b * a
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c


@given(sign_exprs, st.fixed_dictionaries({s: st.sampled_from([1, -1]) for s in SIGNS}))
def test_substitution_is_a_homomorphism(a, vals):
    b = a * a + a
    lhs = b.substitute(vals)
    sa = a.substitute(vals)
    assert lhs == sa * sa + sa


@settings(max_examples=150)
@given(sym_exprs)
def test_display_round_trip(x):
    assert parse_display(cyclotomic_display(x)) == x


@given(sym_exprs)
def test_json_round_trip(x):
    assert from_json(to_json(x)) == x


@given(polys, st.integers(3, 40))
def test_nonneg_agrees_with_sampling(p, q0):
    if check_nonneg(SymExpr(p), 3):
        assert p(q0) >= 0
