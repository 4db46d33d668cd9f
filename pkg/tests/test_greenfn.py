from __future__ import annotations

import pytest

from greenfn import greenfn as gf
from greenfn import groupdata as gd
from greenfn.coxeter import poincare_quotient
from greenfn.symring import Q, RationalFunction, RationalPoly, SymExpr


def col(table, block, word):
    return table.column(table.column_index(block, word))


# -- SL2 ----------------------------------------------------------------------


def test_sl2_table(sl2_table):
    t = sl2_table
    assert t.row_labels == ["11,1", "2,1", "2,2"]
    assert t.sizes == [RationalPoly.const(1), (Q**2 - 1) / 2, (Q**2 - 1) / 2]
    assert col(t, "T", ()) == [SymExpr(Q + 1), SymExpr(1), SymExpr(1)]
    assert col(t, "T", (1,)) == [SymExpr(1 - Q), SymExpr(1), SymExpr(1)]
    assert col(t, "1", ()) == [SymExpr(0), SymExpr(1), SymExpr(-1)]


def test_sl2_norms(sl2_table):
    # (Q_w, Q_w) = 2 / |T_w(q)|
    assert gf.norm_ratio(sl2_table, 0) == RationalFunction(2, Q - 1)
    assert gf.norm_ratio(sl2_table, 1) == RationalFunction(2, Q + 1)
    assert gf.verify_orthogonality(sl2_table) == []


def test_cuspidal_block_is_its_y_function():
    s = gd.setup("sl2")
    d = gf.lusztig_shoji(s, s.blocks[1])
    assert d.p == {(("2", "e"), ("2", "e")): RationalPoly.const(1)}


# -- Y-functions --------------------------------------------------------------


def test_y_functions():
    cat = gd.catalog("spin8")
    y = gf.y_function(cat, ("11111111", "1"))
    assert y.values == {("11111111", "1"): SymExpr(1)}
    y = gf.y_function(cat, ("44+", "e"))
    assert [y(("44+", a)) for a in ("1", "g")] == [SymExpr(1), SymExpr(-1)]
    y = gf.y_function(cat, ("53", "v"))
    a22 = SymExpr.sign("a22")
    assert [y(("53", a)) for a in ("1", "c", "v", "s")] == [a22, -a22, a22, -a22]
    assert y(("71", "1")) == SymExpr(0)
    with pytest.raises(gf.GreenError):
        gf.y_function(cat, ("53", "x"))


def test_y_orthogonality_on_a_class(spin8_table):
    # exact only where the finite classes inside C have equal sizes; 3311 is the exception
    cat = gd.catalog("spin8")
    size = dict(zip(spin8_table.rows, spin8_table.sizes))
    unequal = []
    for cls in cat.classes:
        if len({size[cls.label, x] for x in cls.finite}) > 1:
            unequal.append(cls.label)
            continue
        ys = [gf.y_function(cat, (cls.label, chi)) for chi in cls.group.characters]
        for i, a in enumerate(ys):
            for b in ys[i + 1:]:
                s = SymExpr(0)
                for x in cls.finite:
                    s = s + a((cls.label, x)) * b((cls.label, x)) * SymExpr(size[cls.label, x])
                assert s.is_zero()
    assert unequal == ["3311"]


# -- Spin8 --------------------------------------------------------------------


def test_spin8_shape(spin8_table):
    assert len(spin8_table.rows) == 28 and len(spin8_table.cols) == 28
    assert sum(spin8_table.sizes, RationalPoly()) == Q**24


def test_spin8_trivial_class_value(spin8_table, spin8):
    v = spin8_table.values[0][spin8_table.column_index("T", ())]
    p = v.cases.plain()
    assert p.degree == 12
    assert p == poincare_quotient(spin8.datum.weyl, ())


def test_spin8_orthogonality(spin8_table):
    assert gf.verify_orthogonality(spin8_table) == []


def test_spin8_value_shapes(spin8_table):
    for row in spin8_table.values:
        for v in row:
            monos = [m for m in v.cases.terms]
            assert len(monos) <= 1
            c = v.cases.terms[monos[0]] if monos else None
            assert c is None or isinstance(c, RationalPoly)


def test_triangularity(spin8):
    cat = spin8.catalog
    for b in spin8.blocks:
        d = gf.lusztig_shoji(spin8, b)
        for (iota, chi), c in d.p.items():
            assert cat[iota[0]].dim <= cat[chi[0]].dim
            if iota[0] == chi[0]:
                if iota == chi:
                    assert c == Q ** gf.diagonal_exponent(spin8, iota[0])
                else:
                    assert not c


def test_tie_break_order_is_irrelevant(spin8):
    classes = list(spin8.catalog.classes)
    labels = [c.label for c in classes]
    perm = list(classes)
    for a, b in (("2222+", "311111"), ("44+", "5111")):
        i, j = labels.index(a), labels.index(b)
        perm[i], perm[j] = perm[j], perm[i]
    cat = gd.UnipotentClassCatalog(spin8.catalog.group, perm, spin8.catalog.signs)
    other = gd.GroupSetup(spin8.name, spin8.datum, cat, spin8.blocks)
    torus = spin8.blocks[0]
    assert gf.lusztig_shoji(spin8, torus).p == gf.lusztig_shoji(other, torus).p


# -- Levi ---------------------------------------------------------------------


@pytest.mark.parametrize("twist", ["split", "twisted"])
def test_levi_transfer_matches_direct_decomposition(pipe, twist):
    setup = pipe.setup("levi124", twist)
    transferred = pipe.green("levi124", twist)
    direct = gf.green_table(setup)
    assert transferred.values == direct.values
    assert transferred.sizes == direct.sizes
    assert [c.norm for c in transferred.cols] == [c.norm for c in direct.cols]


@pytest.mark.parametrize("twist", ["split", "twisted"])
def test_levi_table(pipe, twist):
    t = pipe.green("levi124", twist)
    assert len(t.rows) == 14 and len(t.cols) == 14
    assert sum(t.sizes, RationalPoly()) == Q**6
    assert gf.verify_orthogonality(t) == []
    # trivial class, torus identity column: product of the three SL2 values
    assert t.values[0][0] == SymExpr((Q + 1) ** 3)


def test_split_class_of_regular_levi_class(pipe):
    cat = pipe.setup("levi124").catalog
    assert cat["2.2.2"].factor_reps["1"] == ("1", "1", "1")


# -- serialization and failures -------------------------------------------------


def test_json_round_trip(pipe):
    for t in (pipe.green("spin8"), pipe.green("levi124", "twisted")):
        text = t.dumps()
        back = gf.GreenTable.loads(text)
        assert back.dumps() == text
        assert back.values == t.values


def test_bad_schema():
    with pytest.raises(gf.GreenError):
        gf.GreenTable.from_json({"schema": "nope"})


def test_corrupted_table_is_reported(sl2_table):
    t = gf.GreenTable.loads(sl2_table.dumps())
    t.values[1][0] = SymExpr(2)
    report = gf.verify_orthogonality(t)
    assert report and {(v.i, v.j) for v in report} >= {(0, 0)}


def test_signs_cancel_in_norms(spin8_table):
    j = next(j for j, c in enumerate(spin8_table.cols) if c.block == "24")
    s = gf.scalar_product_times_order(spin8_table, j, j)
    assert not s.signs and s.plain() == (spin8_table.cols[j].norm * RationalFunction(spin8_table.order)).to_poly()


def test_singular_pivot():
    with pytest.raises(gf.GreenError, match="singular"):
        gf._solve([[RationalFunction(0)]], [[RationalFunction(1)]], "test")
