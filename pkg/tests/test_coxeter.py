from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from greenfn.coxeter import (
    CoxeterError,
    build,
    centralizer_order,
    charpoly,
    coxeter_matrix_of,
    fuse,
    identity,
    mat_mul,
    poincare_quotient,
    relative_weyl,
)
from greenfn.symring import Q, RationalPoly, cyclotomic

D4 = build(coxeter_matrix_of("D4"), name="D4")


@pytest.mark.parametrize(
    "kind, order, nclasses",
    [("A1", 2, 2), ("A1xA1xA1", 8, 8), ("B2", 8, 5), ("D4", 192, 13)],
)
def test_orders_and_class_counts(kind, order, nclasses):
    w = D4 if kind == "D4" else build(coxeter_matrix_of(kind))
    assert w.order == order
    assert len(w.classes) == nclasses
    assert sum(c.size for c in w.classes) == order


@pytest.mark.parametrize("kind", ["A1", "A1xA1xA1", "B2", "D4"])
def test_character_table_orthogonality(kind):
    w = D4 if kind == "D4" else build(coxeter_matrix_of(kind))
    table = w.character_table
    assert len(table) == len(w.classes)
    assert w.check_orthogonality()
    assert sum(row[0] ** 2 for row in table) == w.order


def test_d4_degrees():
    degrees = sorted(row[0] for row in D4.character_table)
    assert degrees == [1, 1, 2, 3, 3, 3, 3, 3, 3, 4, 4, 6, 8]


def test_class_words_are_shortlex_minimal():
    for c in D4.classes:
        members = [D4.words[D4.index[x]] for x in D4.class_members(c.index)]
        assert c.word == min(members, key=lambda w: (len(w), w))


def test_poincare_polynomial_d4():
    expected = RationalPoly.const(1)
    for d in (2, 4, 4, 6):
        expected = expected * sum((Q**k for k in range(d)), RationalPoly.const(0))
    assert poincare_quotient(D4, ()) == expected


def test_relative_weyl_b2_blocks():
    for nodes, other in (((1, 2), 4), ((1, 4), 2), ((2, 4), 1)):
        rel = relative_weyl(D4, nodes)
        assert rel.group.order == 8
        assert sorted(rel.group.labels) == sorted([3, other])
        assert len(rel.group.classes) == 5


def test_relative_weyl_of_124():
    rel = relative_weyl(D4, (1, 2, 4))
    assert rel.group.order == 2
    t = rel.group.classes[1].rep
    assert rel.complement_charpoly(t) == Q + 1
    assert rel.complement_charpoly(identity(4)) == Q - 1
    # -s1 s2 s4 fixes the three simple roots, so it is the relative generator
    s = [D4.gens[i] for i in (1, 2, 4)]
    minus = tuple(tuple(-x for x in row) for row in mat_mul(mat_mul(s[0], s[1]), s[2]))
    assert rel.group.class_index(minus) == 1


def test_torus_complement_is_full_charpoly():
    rel = relative_weyl(D4, ())
    assert rel.complement_charpoly(identity(4)) == cyclotomic(1) ** 4


def test_fusion_from_levi():
    wm = D4.parabolic((1, 2, 4))
    for nodes in ((1, 2), (1, 4), (2, 4)):
        sub, over = relative_weyl(wm, nodes), relative_weyl(D4, nodes)
        f = fuse(sub, over)
        assert f.mapping[0] == 0
        (other,) = [j for j in (1, 2, 4) if j not in nodes]
        # the nontrivial element s_j lands on the class of the B2 generator s_j
        assert over.group.classes[f.mapping[1]].word == (other,)


def test_invalid_nodes():
    with pytest.raises(CoxeterError):
        relative_weyl(D4, (5,))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 191), st.integers(0, 191))
def test_class_function_constancy(i, j):
    x, g = D4.elements[i], D4.elements[j]
    y = mat_mul(mat_mul(g, x), D4.inverse(g))
    assert D4.class_index(x) == D4.class_index(y)
    assert charpoly(x) == charpoly(y)


@given(st.integers(0, 12))
def test_centralizer_orders(c):
    assert centralizer_order(D4, c) * D4.classes[c].size == 192
