from __future__ import annotations

import json
import shutil

import pytest

from greenfn import groupdata as gd
from greenfn.symring import Q


def test_spin8_order(spin8):
    assert spin8.order == Q**12 * (Q**2 - 1) * (Q**4 - 1) ** 2 * (Q**6 - 1)
    assert spin8.datum.dimension == 28


@pytest.mark.parametrize("twist, z0", [("split", Q - 1), ("twisted", Q + 1)])
def test_levi_center_order(twist, z0):
    m = gd.levi(gd.spin8_datum(), (1, 2, 4), twist)
    assert m.z0_order == z0
    assert m.order == Q**3 * (Q**2 - 1) ** 3 * z0


def test_torus_levi():
    t = gd.levi(gd.spin8_datum(), (), "split")
    assert t.z0_order == (Q - 1) ** 4


def test_levi_errors():
    with pytest.raises(gd.DataError):
        gd.levi(gd.spin8_datum(), (1, 7))
    with pytest.raises(gd.DataError):
        gd.levi(gd.spin8_datum(), (1, 2, 4), 5)


def test_spin8_catalog():
    cat = gd.catalog("spin8")
    assert len(cat.classes) == 12
    orders = sorted(c.group.order for c in cat.classes)
    assert orders == [1, 1] + [2] * 7 + [4] * 3
    assert len(cat.finite_classes()) == 28
    for label in ("3221", "53", "71"):
        assert cat[label].group.order == 4
        assert cat[label].sign is not None
    assert [c.sign[0] for c in cat.classes if c.sign] == ["a10", "a22", "a27"]


def test_levi_catalog():
    cat = gd.catalog("levi124")
    assert [len(c.finite) for c in cat.classes] == [1, 1, 1, 2, 1, 2, 2, 4]
    assert len(cat.finite_classes()) == 14
    assert cat.labels[0] == "11.11.11" and cat.labels[-1] == "2.2.2"


def test_quotient_component_groups():
    cov = gd.covering_data()
    q = gd.quotient_component_group(cov, "2.2.2")
    assert q.group.order == 4
    assert list(q.reps.values()) == [("1", "1", "1"), ("1", "1", "g"), ("1", "g", "1"), ("1", "g", "g")]
    assert gd.quotient_component_group(cov, "11.11.2").group.order == 1
    assert gd.quotient_component_group(cov, "11.11.11").group.order == 1
    # the quotient's characters are those trivial on the diagonal kernel
    assert set(q.product_chars) == {"1.1.1", "1.e.e", "e.1.e", "e.e.1"}


def test_springer_blocks_counts():
    blocks = gd.springer_blocks("spin8")
    assert [len(b.chars) for b in blocks] == [13, 5, 5, 5]
    assert [b.group.order for b in blocks] == [192, 8, 8, 8]
    for b in blocks[1:]:
        assert b.cuspidal_dim == 4 and b.d == -2
    levi = gd.springer_blocks("levi124")
    assert [len(b.chars) for b in levi] == [8, 2, 2, 2]


def test_springer_bijective():
    for group in ("spin8", "levi124", "sl2"):
        s = gd.setup(group)
        pairs = [p for b in s.blocks for p in b.chars]
        assert sorted(pairs) == sorted(s.catalog.pairs())
        for b in s.blocks:
            assert sorted(b.chars.values()) == sorted(b.group.character_table)


def test_class_dimension():
    cat = gd.catalog("spin8")
    assert gd.class_dimension(cat, "11111111") == 0
    assert gd.class_dimension(cat, "71") == 28 - 4
    assert gd.class_dimension(gd.catalog("sl2"), "2") == 2
    with pytest.raises(gd.DataError):
        gd.class_dimension(cat, "9")


def test_unipotent_count():
    assert gd.spin8_datum().unipotent_count == Q**24


def test_manifest_pins():
    assert gd.manifest_mismatches() == []


def _copy_data(tmp_path):
    dst = tmp_path / "data"
    shutil.copytree(gd.data_dir(), dst)
    return dst


def test_missing_pair_is_reported(tmp_path):
    dst = _copy_data(tmp_path)
    path = dst / "spin8_springer.json"
    data = json.loads(path.read_text())
    data["blocks"][1]["map"].pop()
    path.write_text(json.dumps(data))
    with pytest.raises(gd.DataError, match="not a bijection"):
        gd.setup("spin8", directory=str(dst))
    assert "spin8_springer.json" in gd.manifest_mismatches(str(dst))


def test_unknown_schema(tmp_path):
    dst = _copy_data(tmp_path)
    path = dst / "sl2_springer.json"
    data = json.loads(path.read_text())
    data["schema"] = "other/9"
    path.write_text(json.dumps(data))
    with pytest.raises(gd.DataError, match="schema"):
        gd.setup("sl2", directory=str(dst))


def test_env_override(tmp_path, monkeypatch):
    monkeypatch.setenv("GREENFN_DATA", str(tmp_path))
    with pytest.raises(gd.DataError, match="missing"):
        gd.catalog("spin8")


def test_unsupported_group():
    with pytest.raises(gd.DataError):
        gd.catalog("e8")
