"""Group bookkeeping: root data, Levi subgroups, unipotent catalogs, Springer blocks.

The unipotent class catalogs and the generalized Springer maps are read
from the JSON files in ``greenfn/data`` (or a directory given by the
``GREENFN_DATA`` environment variable).  The Levi subgroup of type
A1+A1+A1 gets its catalog from the SL2 catalog through the covering
SL2^3 -> [M, M].
"""

from __future__ import annotations

import hashlib
import itertools
import json
import os
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Sequence

from .coxeter import (
    CoxeterGroup,
    Matrix,
    RelativeWeylGroup,
    Word,
    build,
    charpoly,
    coxeter_matrix_of,
    identity,
    poincare_quotient,
    relative_weyl,
)
from .symring import Q, RationalPoly

SCHEMAS = {"greenfn.classes/1", "greenfn.springer/1"}

Pair = tuple[str, str]
FiniteClass = tuple[str, str]


class DataError(ValueError):
    """Missing, malformed or inconsistent data files."""


def data_dir(override: str | os.PathLike | None = None) -> Path:
    if override:
        return Path(override)
    env = os.environ.get("GREENFN_DATA")
    if env:
        return Path(env)
    return Path(__file__).with_name("data")


def load_json(name: str, directory: str | os.PathLike | None = None) -> dict:
    path = data_dir(directory) / name
    try:
        data = json.loads(path.read_text())
    except FileNotFoundError as exc:
        raise DataError(f"missing data file {path}") from exc
    except json.JSONDecodeError as exc:
        raise DataError(f"malformed JSON in {path}: {exc}") from exc
    if data.get("schema") not in SCHEMAS:
        raise DataError(f"{path}: unknown schema {data.get('schema')!r}")
    return data


def file_digest(name: str, directory: str | os.PathLike | None = None) -> str:
    return hashlib.sha256((data_dir(directory) / name).read_bytes()).hexdigest()


def manifest_mismatches(directory: str | os.PathLike | None = None) -> list[str]:
    """Data files whose SHA-256 differs from MANIFEST.json (empty if there is no manifest)."""
    path = data_dir(directory) / "MANIFEST.json"
    if not path.exists():
        return []
    pins = json.loads(path.read_text())["sha256"]
    bad = []
    for name, digest in sorted(pins.items()):
        try:
            if file_digest(name, directory) != digest:
                bad.append(name)
        except FileNotFoundError:
            bad.append(name)
    return bad


# ---------------------------------------------------------------------------
# component groups (all elementary abelian 2-groups here)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ComponentGroup:
    """Elementary abelian 2-group with named elements and characters."""

    kind: str
    elements: tuple[str, ...]
    characters: tuple[str, ...]
    bits: dict[str, tuple[int, ...]] = field(hash=False, compare=False)
    char_bits: dict[str, tuple[int, ...]] = field(hash=False, compare=False)

    def value(self, chi: str, a: str) -> int:
        lam, x = self.char_bits[chi], self.bits[a]
        return -1 if sum(u * v for u, v in zip(lam, x)) % 2 else 1

    def mul(self, a: str, b: str) -> str:
        target = tuple((u + v) % 2 for u, v in zip(self.bits[a], self.bits[b]))
        return next(k for k, v in self.bits.items() if v == target)

    @property
    def order(self) -> int:
        return len(self.elements)


def standard_component_group(kind: str) -> ComponentGroup:
    if kind == "1":
        return ComponentGroup("1", ("1",), ("1",), {"1": ()}, {"1": ()})
    if kind == "Z2":
        return ComponentGroup("Z2", ("1", "g"), ("1", "e"), {"1": (0,), "g": (1,)}, {"1": (0,), "e": (1,)})
    if kind == "Z2xZ2":
        # the character named x is the one whose kernel is {1, x}
        bits = {"1": (0, 0), "v": (1, 0), "s": (0, 1), "c": (1, 1)}
        chars = {"1": (0, 0), "v": (0, 1), "s": (1, 0), "c": (1, 1)}
        return ComponentGroup("Z2xZ2", ("1", "v", "s", "c"), ("1", "v", "s", "c"), bits, chars)
    raise DataError(f"unknown component group {kind!r}")


@dataclass
class UnipotentClass:
    label: str
    dim: int
    group: ComponentGroup
    finite: list[str]
    central: dict[str, str] = field(default_factory=dict)
    sign: tuple[str, str] | None = None
    center_image: str | None = None
    # for classes of a covered group: representative factor classes per finite class
    factors: tuple[str, ...] = ()
    factor_reps: dict[str, tuple[str, ...]] = field(default_factory=dict)

    def char_value(self, chi: str, a: str) -> int:
        return self.group.value(chi, a)


@dataclass
class UnipotentClassCatalog:
    group: str
    classes: list[UnipotentClass]
    signs: tuple[str, ...] = ()

    def __post_init__(self):
        self._by_label = {c.label: c for c in self.classes}

    def __getitem__(self, label: str) -> UnipotentClass:
        try:
            return self._by_label[label]
        except KeyError:
            raise DataError(f"unknown class label {label!r} in {self.group}") from None

    def __contains__(self, label: str) -> bool:
        return label in self._by_label

    @property
    def labels(self) -> list[str]:
        return [c.label for c in self.classes]

    def finite_classes(self) -> list[FiniteClass]:
        return [(c.label, a) for c in self.classes for a in c.finite]

    def finite_label(self, fc: FiniteClass) -> str:
        c = self[fc[0]]
        return f"{c.label},{c.finite.index(fc[1]) + 1}"

    def pairs(self) -> list[Pair]:
        return [(c.label, chi) for c in self.classes for chi in c.group.characters]


def _catalog_from_json(data: dict, key: str = "classes") -> UnipotentClassCatalog:
    out = []
    for e in data[key]:
        g = standard_component_group(e["component_group"])
        if sorted(e["finite"]) != sorted(g.elements):
            raise DataError(f"class {e['label']}: finite classes {e['finite']} do not match {g.kind}")
        sign = (e["sign"]["name"], e["sign"]["character"]) if "sign" in e else None
        out.append(
            UnipotentClass(e["label"], int(e["dim"]), g, list(e["finite"]), dict(e.get("central", {})),
                           sign, e.get("center_image"))
        )
    return UnipotentClassCatalog(data["group"], out, tuple(data.get("signs", ())))


# ---------------------------------------------------------------------------
# root data
# ---------------------------------------------------------------------------


@dataclass
class GroupDatum:
    name: str
    weyl: CoxeterGroup
    nodes: tuple[int, ...]
    rank: int
    center: tuple[str, ...]
    data_directory: str | None = None

    @cached_property
    def n_pos_roots(self) -> int:
        return self.weyl.length(self.weyl.longest(self.nodes))

    @property
    def dimension(self) -> int:
        return self.rank + 2 * self.n_pos_roots

    @cached_property
    def order(self) -> RationalPoly:
        return Q**self.n_pos_roots * (Q - 1) ** self.rank * poincare_quotient(self.weyl, ())

    @property
    def z0_order(self) -> RationalPoly:
        return RationalPoly.const(1)

    @property
    def twist(self) -> Matrix:
        return identity(self.weyl.dim)

    @property
    def unipotent_count(self) -> RationalPoly:
        return Q ** (2 * self.n_pos_roots)


def spin8_datum(directory: str | None = None) -> GroupDatum:
    w = build(coxeter_matrix_of("D4"), labels=(1, 2, 3, 4), name="D4")
    return GroupDatum("spin8", w, (1, 2, 3, 4), 4, ("1", "v", "s", "c"), directory)


def sl2_datum(directory: str | None = None) -> GroupDatum:
    w = build(coxeter_matrix_of("A1"), labels=(1,), name="A1")
    return GroupDatum("sl2", w, (1,), 1, ("1", "z"), directory)


@dataclass
class Levi:
    """F-stable Levi subgroup L_w of a parent group, w a class of N_W(W_I)/W_I."""

    parent: GroupDatum
    nodes: tuple[int, ...]
    twist_class: int
    relative: RelativeWeylGroup
    name: str = ""

    @property
    def twist(self) -> Matrix:
        return self.relative.group.classes[self.twist_class].rep

    @property
    def twist_label(self) -> str:
        return "split" if self.twist_class == 0 else "twisted"

    @cached_property
    def weyl(self) -> CoxeterGroup:
        return self.parent.weyl.parabolic(self.nodes)

    @property
    def rank(self) -> int:
        return self.parent.rank

    @cached_property
    def n_pos_roots(self) -> int:
        return self.weyl.length(self.weyl.longest(self.nodes))

    @property
    def dimension(self) -> int:
        return self.rank + 2 * self.n_pos_roots

    @cached_property
    def z0_order(self) -> RationalPoly:
        """|Z0(L_w)^F| = det(q - w) on the cocharacters of Z0(L)."""
        return self.relative.complement_charpoly(self.twist)

    @cached_property
    def order(self) -> RationalPoly:
        t = self.twist
        for s in self.nodes:
            g = self.weyl.gens[s]
            if tuple(map(tuple, _conj(t, g, self.parent.weyl))) != g:
                raise DataError("twists permuting the Levi's nodes are out of scope")
        return Q**self.n_pos_roots * charpoly(t) * poincare_quotient(self.weyl, ())

    @property
    def unipotent_count(self) -> RationalPoly:
        return Q ** (2 * self.n_pos_roots)


def _conj(t: Matrix, g: Matrix, w: CoxeterGroup) -> Matrix:
    from .coxeter import mat_mul

    return mat_mul(mat_mul(t, g), w.inverse(t))


TWISTS = {"split": 0, "twisted": 1, "nonsplit": 1}


def levi(datum: GroupDatum, nodes: Sequence[int], twist: int | str = 0) -> Levi:
    nodes = tuple(sorted(nodes))
    if not set(nodes) <= set(datum.nodes):
        raise DataError(f"invalid nodes {nodes} for {datum.name}")
    rel = relative_weyl(datum.weyl, nodes)
    if isinstance(twist, str):
        if twist not in TWISTS:
            raise DataError(f"unknown twist {twist!r}")
        twist = TWISTS[twist]
    if not 0 <= twist < len(rel.group.classes):
        raise DataError(f"twist class {twist} out of range")
    name = f"levi{''.join(map(str, nodes))}" if nodes else "torus"
    return Levi(datum, nodes, twist, rel, name)


# ---------------------------------------------------------------------------
# covering data and the Levi catalog
# ---------------------------------------------------------------------------


@dataclass
class CoveringData:
    """Simply connected cover G1 x ... x Gk of the derived group, kernel K in the centers."""

    factor_catalog: UnipotentClassCatalog
    nodes: tuple[int, ...]
    kernel: list[tuple[int, ...]]

    def factor_labels(self, label: str) -> tuple[str, ...]:
        parts = tuple(label.split("."))
        if len(parts) != len(self.nodes) or any(p not in self.factor_catalog for p in parts):
            raise DataError(f"label {label!r} is not a product of factor classes")
        return parts

    def kernel_image(self, label: str) -> list[tuple[str, ...]]:
        """Images of the kernel generators in the product of component groups."""
        parts = self.factor_labels(label)
        out = []
        for gen in self.kernel:
            img = []
            for e, p in zip(gen, parts):
                c = self.factor_catalog[p]
                z = c.center_image if (e and c.center_image) else "1"
                img.append(z)
            out.append(tuple(img))
        return out


@dataclass(frozen=True)
class QuotientGroup:
    group: ComponentGroup
    reps: dict[str, tuple[str, ...]]
    product_chars: dict[str, tuple[str, ...]]


def quotient_component_group(cov: CoveringData, label: str) -> QuotientGroup:
    """(A1 x ... x Ak) / image(K), with cosets enumerated from the split class."""
    parts = cov.factor_labels(label)
    groups = [cov.factor_catalog[p].group for p in parts]
    kbar = cov.kernel_image(label)
    for k in kbar:
        if any(a not in g.elements for a, g in zip(k, groups)):
            raise DataError("kernel image is not contained in the product")

    def mul(x, y):
        return tuple(g.mul(a, b) for g, a, b in zip(groups, x, y))

    sub = {tuple("1" for _ in groups)}
    while True:
        new = {mul(x, k) for x in sub for k in kbar} | sub
        if new == sub:
            break
        sub = new
    reps: dict[str, tuple[str, ...]] = {}
    seen = set()
    for x in itertools.product(*(g.elements for g in groups)):
        if x in seen:
            continue
        coset = {mul(x, k) for k in sub}
        seen |= coset
        reps[str(len(reps) + 1)] = x
    chars = {}
    for chi in itertools.product(*(g.characters for g in groups)):
        if all(_prod_value(groups, chi, k) == 1 for k in sub):
            chars[".".join(chi)] = chi
    if len(chars) != len(reps):
        raise DataError(f"quotient of {label}: {len(chars)} characters for {len(reps)} classes")
    bits = {name: tuple(int(i == j) for j in range(len(reps))) for i, name in enumerate(reps)}
    cg = _TableGroup(
        kind=f"quotient({label})",
        elements=tuple(reps),
        characters=tuple(chars),
        bits=bits,
        char_bits={},
        table={(c, a): _prod_value(groups, chars[c], reps[a]) for c in chars for a in reps},
    )
    return QuotientGroup(cg, reps, chars)


def _prod_value(groups, chi, x) -> int:
    v = 1
    for g, c, a in zip(groups, chi, x):
        v *= g.value(c, a)
    return v


@dataclass(frozen=True)
class _TableGroup(ComponentGroup):
    table: dict = field(default_factory=dict, hash=False, compare=False)

    def value(self, chi: str, a: str) -> int:
        return self.table[chi, a]

    def mul(self, a: str, b: str) -> str:
        raise NotImplementedError("quotient groups only carry their character table")


def covering_catalog(cov: CoveringData, name: str) -> UnipotentClassCatalog:
    out = []
    fc = cov.factor_catalog
    for parts in itertools.product(*([c.label for c in fc.classes] for _ in cov.nodes)):
        label = ".".join(parts)
        qg = quotient_component_group(cov, label)
        dim = sum(fc[p].dim for p in parts)
        out.append(
            UnipotentClass(label, dim, qg.group, list(qg.reps), factors=parts, factor_reps=dict(qg.reps))
        )
    return UnipotentClassCatalog(name, out)


# ---------------------------------------------------------------------------
# Springer blocks
# ---------------------------------------------------------------------------


@dataclass
class SpringerBlock:
    name: str
    levi_nodes: tuple[int, ...]
    cuspidal: tuple[str, str]
    cuspidal_dim: int
    central: str
    relative: RelativeWeylGroup
    chars: dict[Pair, tuple[int, ...]]
    d: int

    @property
    def group(self) -> CoxeterGroup:
        return self.relative.group

    @property
    def pairs(self) -> list[Pair]:
        return list(self.chars)

    def column_words(self) -> list[Word]:
        return [c.word for c in self.group.classes]


@dataclass
class GroupSetup:
    """Everything the Lusztig-Shoji step needs for one group (or Levi form)."""

    name: str
    datum: GroupDatum | Levi
    catalog: UnipotentClassCatalog
    blocks: list[SpringerBlock]

    @property
    def order(self) -> RationalPoly:
        return self.datum.order

    @property
    def twist(self) -> Matrix:
        return self.datum.twist

    @property
    def springer_dim(self) -> int:
        """Dimension of the unipotent variety, dim G - rank (twice the flag variety's dimension)."""
        return self.datum.dimension - self.datum.rank


def _blocks_from_json(data: dict, weyl: CoxeterGroup, rank: int, catalog: UnipotentClassCatalog) -> list[SpringerBlock]:
    blocks = []
    for b in data["blocks"]:
        nodes = tuple(sorted(b["levi"]))
        rel = relative_weyl(weyl, nodes)
        words = [tuple(w) for w in b["classes"]]
        if words != [c.word for c in rel.group.classes]:
            raise DataError(f"block {b['name']}: class words {words} do not match the relative Weyl group")
        chars = {}
        for entry in b["map"]:
            pair = tuple(entry["pair"])
            if pair[0] not in catalog or pair[1] not in catalog[pair[0]].group.characters:
                raise DataError(f"block {b['name']}: unknown pair {pair}")
            row = rel.group.find_character(dict(zip(words, entry["values"])))
            if pair in chars:
                raise DataError(f"block {b['name']}: pair {pair} listed twice")
            chars[pair] = row
        if sorted(chars.values()) != sorted(rel.group.character_table):
            raise DataError(f"block {b['name']}: map is not a bijection from Irr(W_L)")
        n_l = weyl.length(weyl.longest(nodes)) if nodes else 0
        dim_l = rank + 2 * n_l
        d = int(b["cuspidal"]["dim"]) - dim_l + (rank - len(nodes))
        cusp = (b["cuspidal"]["label"], b["cuspidal"]["character"])
        blocks.append(
            SpringerBlock(b["name"], nodes, cusp, int(b["cuspidal"]["dim"]), b.get("central", ""), rel, chars, d)
        )
    _validate_blocks(blocks, catalog)
    return blocks


def _validate_blocks(blocks: list[SpringerBlock], catalog: UnipotentClassCatalog) -> None:
    seen: dict[Pair, str] = {}
    for b in blocks:
        for p in b.chars:
            if p in seen:
                raise DataError(f"pair {p} appears in blocks {seen[p]} and {b.name}")
            seen[p] = b.name
        triv = next(p for p, row in b.chars.items() if all(x == 1 for x in row))
        top = max(catalog[p[0]].dim for p in b.chars)
        if catalog[triv[0]].dim != top:
            raise DataError(f"block {b.name}: trivial character is not on the top class")
        for p in b.chars:
            cen = catalog[p[0]].central
            if cen and b.central and cen.get(p[1]) != b.central:
                raise DataError(f"block {b.name}: pair {p} has central character {cen.get(p[1])}")
    missing = [p for p in catalog.pairs() if p not in seen]
    if missing:
        raise DataError(f"Springer data is not surjective; uncovered pairs: {missing}")


def catalog(group: str, directory: str | None = None) -> UnipotentClassCatalog:
    """Unipotent class catalog for 'spin8', 'sl2' or 'levi124'."""
    if group == "spin8":
        return _catalog_from_json(load_json("spin8_classes.json", directory))
    if group == "sl2":
        return _catalog_from_json(load_json("sl2_springer.json", directory))
    if group in ("levi124", "levi"):
        return covering_catalog(covering_data(directory), "levi124")
    raise DataError(f"unsupported group {group!r}")


def covering_data(directory: str | None = None) -> CoveringData:
    data = load_json("levi124_springer.json", directory)
    cov = data["covering"]
    if cov["factor"] != "sl2":
        raise DataError("only SL2 factors are supported")
    return CoveringData(catalog("sl2", directory), tuple(cov["nodes"]), [tuple(k) for k in cov["kernel"]])


def springer_blocks(group: str, directory: str | None = None) -> list[SpringerBlock]:
    return setup(group, directory=directory).blocks


def setup(group: str, twist: int | str = 0, directory: str | None = None) -> GroupSetup:
    """Group datum, catalog and validated Springer blocks for one supported group."""
    if group == "spin8":
        datum = spin8_datum(directory)
        cat = catalog("spin8", directory)
        blocks = _blocks_from_json(load_json("spin8_springer.json", directory), datum.weyl, datum.rank, cat)
        return GroupSetup("spin8", datum, cat, blocks)
    if group == "sl2":
        datum = sl2_datum(directory)
        cat = catalog("sl2", directory)
        blocks = _blocks_from_json(load_json("sl2_springer.json", directory), datum.weyl, datum.rank, cat)
        return GroupSetup("sl2", datum, cat, blocks)
    if group in ("levi124", "levi"):
        data = load_json("levi124_springer.json", directory)
        m = levi(spin8_datum(directory), data["levi"], twist)
        cat = catalog("levi124", directory)
        blocks = _blocks_from_json(data, m.weyl, m.rank, cat)
        return GroupSetup(f"levi124-{m.twist_label}", m, cat, blocks)
    raise DataError(f"unsupported group {group!r}")


def class_dimension(cat: UnipotentClassCatalog, label: str) -> int:
    return cat[label].dim
