"""Two-parameter Green functions g_M^G(c, c') of a Levi subgroup M.

They are the coefficients in the character formula for twisted induction
on unipotent elements:

    (R_M^G f)(c) = sum_{c'} g(c, c') f(c').

Applying it to the Green functions of M, which induce to Green functions
of G, gives a square system that the orthogonality of M's table inverts.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Sequence

from .coxeter import fuse, mat_mul
from .greenfn import GreenTable
from .groupdata import GroupSetup
from .symring import (
    ONE,
    RESIDUES,
    RationalFunction,
    RationalPoly,
    SignAssignment,
    SignExpr,
    SymExpr,
    check_integral,
    check_nonneg,
    cyclotomic_display,
    from_json,
    to_json,
)

TWOPARAM_SCHEMA = "greenfn.twoparam/1"

LARGE_Q_CAVEAT = (
    "Induced generalized Green functions on the A1+A1 blocks are identified with the "
    "group's generalized Green functions; this identification is only known for large q. "
    "The table is computed for all odd q."
)


class TwoParamError(ValueError):
    """Identification, solving or sign resolution failed."""


# ---------------------------------------------------------------------------
# inversion
# ---------------------------------------------------------------------------


def invert(table: GreenTable) -> list[list[SymExpr]]:
    """inverse[j][r] = |c_r| Q_j(c_r) / (|G| n_j); exact left inverse of the value matrix."""
    out = []
    for j, col in enumerate(table.cols):
        if not col.norm:
            raise TwoParamError(f"zero norm for column {col.label}")
        scale = RationalFunction(col.norm.den, col.norm.num * table.order)
        row = []
        for r, size in enumerate(table.sizes):
            v = table.values[r][j]
            row.append(v.map(lambda b, s=size: b.map(lambda c: RationalFunction(c) * scale * s)))
        out.append(row)
    return out


def check_inverse(table: GreenTable, inverse: list[list[SymExpr]]) -> bool:
    n = len(table.cols)
    if len(table.rows) != n:
        raise TwoParamError("only square tables have a two-sided inverse")
    for i in range(n):
        for j in range(n):
            s = SignExpr()
            for r in range(n):
                a, b = inverse[i][r], table.values[r][j]
                if a and b:
                    s = s + a.cases * b.cases.map(RationalFunction)
            target = SignExpr.lift(RationalFunction(int(i == j)))
            if s != target:
                return False
    return True


# ---------------------------------------------------------------------------
# identification of induced Green functions
# ---------------------------------------------------------------------------


@dataclass
class InducedIdentification:
    """Column j of the Levi table induces to column mapping[j] of the group table."""

    levi: str
    twist: str
    mapping: dict[int, int]
    labels: dict[str, str] = field(default_factory=dict)


def identify(levi_setup: GroupSetup, levi_table: GreenTable, group_setup: GroupSetup,
             group_table: GreenTable) -> InducedIdentification:
    """(block of M, class v) -> (same block of G, class of v*t), t the Levi's twist."""
    t = levi_setup.twist
    split = levi_setup.datum.twist_class == 0
    mapping, labels = {}, {}
    for mb in levi_setup.blocks:
        gb = [b for b in group_setup.blocks if b.levi_nodes == mb.levi_nodes]
        if len(gb) != 1:
            raise TwoParamError(f"block {mb.name} of the Levi has no counterpart in {group_setup.name}")
        gb = gb[0]
        if gb.cuspidal_dim != mb.cuspidal_dim:
            raise TwoParamError(f"block {mb.name}: cuspidal data differ")
        fusion = fuse(mb.relative, gb.relative).mapping if split else None
        for c in mb.group.classes:
            target = gb.relative.class_of(mat_mul(c.rep, t))
            if fusion is not None and fusion[c.index] != target:
                raise TwoParamError(f"block {mb.name}: twisted class disagrees with the fusion map")
            j = levi_table.column_index(mb.name, c.word)
            k = group_table.column_index(gb.name, gb.group.classes[target].word)
            mapping[j] = k
            labels[levi_table.cols[j].label] = group_table.cols[k].label
    if sorted(mapping) != list(range(len(levi_table.cols))):
        raise TwoParamError("identification is not total on the Levi's columns")
    return InducedIdentification(levi_setup.name, "split" if split else "twisted", mapping, labels)


def identity_identification(table: GreenTable) -> InducedIdentification:
    return InducedIdentification(table.group, "split", {j: j for j in range(len(table.cols))})


# ---------------------------------------------------------------------------
# solving
# ---------------------------------------------------------------------------


@dataclass
class TwoParamTable:
    levi: str
    twist: str
    rows: list[str]  # finite classes of M
    cols: list[str]  # finite classes of G
    values: list[list[SymExpr]]  # values[m_row][g_class] = g(c, c')
    signs: SignAssignment | None = None
    meta: dict = field(default_factory=dict)

    @property
    def split(self) -> bool:
        return self.twist == "split"

    @property
    def resolved(self) -> bool:
        return not any(v.signs for r in self.values for v in r)

    def cell(self, row: str, col: str) -> SymExpr:
        return self.values[self.rows.index(row)][self.cols.index(col)]

    def display(self) -> list[list[str]]:
        return [[cyclotomic_display(v) for v in r] for r in self.values]

    def map(self, f) -> TwoParamTable:
        return TwoParamTable(self.levi, self.twist, list(self.rows), list(self.cols),
                             [[f(v) for v in r] for r in self.values], self.signs, dict(self.meta))

    def to_json(self) -> dict:
        meta = dict(self.meta)
        meta.update(levi=self.levi, twist=self.twist, resolved=self.resolved)
        if self.signs is not None:
            meta["signs"] = {str(r): self.signs.for_residue(r) for r in RESIDUES}
        return {
            "schema": TWOPARAM_SCHEMA,
            "rows": list(self.rows),
            "cols": list(self.cols),
            "values": [[to_json(v) for v in r] for r in self.values],
            "meta": meta,
        }

    @classmethod
    def from_json(cls, data: dict) -> TwoParamTable:
        if data.get("schema") != TWOPARAM_SCHEMA:
            raise TwoParamError(f"unknown schema {data.get('schema')!r}")
        meta = dict(data["meta"])
        signs = meta.pop("signs", None)
        sa = SignAssignment({int(r): v for r, v in signs.items()}) if signs else None
        return cls(meta.pop("levi"), meta.pop("twist"), list(data["rows"]), list(data["cols"]),
                   [[from_json(v) for v in r] for r in data["values"]], sa,
                   {k: v for k, v in meta.items() if k != "resolved"})

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"))


def _lcm(a: RationalPoly, b: RationalPoly) -> RationalPoly:
    return (a * b).exquo(a.gcd(b)).monic()


def _plain_signs(v: SymExpr) -> SignExpr:
    if v.is_split:
        raise TwoParamError("residue-split Green function values are not supported")
    return v.cases


def solve(group_table: GreenTable, levi_table: GreenTable, ident: InducedIdentification,
          check: bool = True) -> TwoParamTable:
    """g(c, c') = sum_j Q^G_{ident(j)}(c) |c'| Q^M_j(c') / (|M| n_j)."""
    m_cols = range(len(levi_table.cols))
    den = ONE
    for j in m_cols:
        den = _lcm(den, (levi_table.cols[j].norm.num * levi_table.order).monic())
    # numerators N_j(c') over the common denominator
    num = []
    for j in m_cols:
        norm = levi_table.cols[j].norm
        factor = den.exquo(norm.num * levi_table.order) * norm.den
        num.append([_plain_signs(levi_table.values[r][j]) * (size * factor)
                    for r, size in enumerate(levi_table.sizes)])
    values = []
    for r in range(len(levi_table.rows)):
        row = []
        for c in range(len(group_table.rows)):
            s = SignExpr()
            for j in m_cols:
                a = num[j][r]
                if a:
                    b = _plain_signs(group_table.values[c][ident.mapping[j]])
                    if b:
                        s = s + a * b
            row.append(SymExpr(_divide(s, den)))
        values.append(row)
    table = TwoParamTable(ident.levi, ident.twist, list(levi_table.row_labels), list(group_table.row_labels), values)
    table.meta["caveat"] = LARGE_Q_CAVEAT
    if check:
        bad = residual(group_table, levi_table, ident, table)
        if bad:
            raise TwoParamError(f"defining system has nonzero residual at {bad[0]}")
    return table


def _divide(s: SignExpr, den: RationalPoly) -> SignExpr:
    out = {}
    for m, c in s.terms.items():
        quo, rem = divmod(c, den)
        if rem:
            raise TwoParamError(f"value {c}/{den} is not a polynomial in q")
        out[m] = quo
    return SignExpr(out)


def residual(group_table: GreenTable, levi_table: GreenTable, ident: InducedIdentification,
             table: TwoParamTable) -> list[tuple[int, int]]:
    """Pairs (j, c) where Q^G_{ident(j)}(c) != sum_{c'} g(c, c') Q^M_j(c')."""
    bad = []
    for j in range(len(levi_table.cols)):
        for c in range(len(group_table.rows)):
            s = SignExpr()
            for r in range(len(levi_table.rows)):
                g, v = table.values[r][c], levi_table.values[r][j]
                if g and v:
                    s = s + _plain_signs(g) * _plain_signs(v)
            if s != _plain_signs(group_table.values[c][ident.mapping[j]]):
                bad.append((j, c))
    return bad


def self_induction_check(table: GreenTable) -> bool:
    """Solving with M = G must give the identity matrix."""
    g = solve(table, table, identity_identification(table), check=False)
    for i, row in enumerate(g.values):
        for j, v in enumerate(row):
            if v != SymExpr(int(i == j)):
                return False
    return True


# ---------------------------------------------------------------------------
# signs
# ---------------------------------------------------------------------------


def substitute_some(x: SymExpr, values: dict[str, int], residue: int | None = None) -> SymExpr:
    """Replace the listed signs, keep the others symbolic."""

    def sub(b: SignExpr) -> SignExpr:
        out = SignExpr()
        for m, c in b.terms.items():
            s, rest = 1, set()
            for a in m:
                if a in values:
                    s *= values[a]
                else:
                    rest.add(a)
            out = out + SignExpr({frozenset(rest): c * s})
        return out

    if residue is not None:
        return SymExpr(sub(x.branch(residue)))
    return x.map(sub)


def resolve_signs(tables: Sequence[TwoParamTable], q_min: int = 3) -> SignAssignment:
    """The unique assignment per residue of q mod 4 passing positivity and integrality.

    Split-Levi entries must be nonnegative for real q >= q_min in the residue class;
    every entry must be integral at every q of the residue class.
    """
    names = sorted(set().union(*(v.signs for t in tables for r in t.values for v in r)))
    per_residue = {}
    for res in RESIDUES:
        survivors = []
        for vals in itertools.product((1, -1), repeat=len(names)):
            assign = dict(zip(names, vals))
            if all(_passes(t, assign, res, q_min) for t in tables):
                survivors.append(assign)
        if len(survivors) != 1:
            raise TwoParamError(
                f"q = {res} mod 4: {len(survivors)} sign assignments survive ({survivors}); expected exactly one"
            )
        per_residue[res] = survivors[0]
    return SignAssignment(per_residue)


def _passes(t: TwoParamTable, assign: dict[str, int], res: int, q_min: int) -> bool:
    for row in t.values:
        for v in row:
            x = substitute_some(v, assign, res)
            if not check_integral(x, res):
                return False
            if t.split and not check_nonneg(x, q_min, res):
                return False
    return True


def constant_signs(assignment: SignAssignment) -> dict[str, int]:
    """Signs whose value does not depend on the residue of q."""
    a, b = (assignment.for_residue(r) for r in RESIDUES)
    return {k: v for k, v in a.items() if b.get(k) == v}


def apply_signs(table: TwoParamTable, assignment: SignAssignment, mode: str = "symbolic",
                residue: int | None = None) -> TwoParamTable:
    """mode 'symbolic': fix residue-independent signs only; 'resolved': fix all.

    A fully resolved table without a residue carries residue-split values.
    """
    if mode == "symbolic":
        fixed = constant_signs(assignment)
        out = table.map(lambda v: substitute_some(v, fixed))
    elif mode == "resolved":
        if residue is not None:
            vals = assignment.for_residue(residue)
            out = table.map(lambda v: substitute_some(v, vals, residue))
        else:
            out = table.map(lambda v: SymExpr(cases={r: substitute_some(v, assignment.for_residue(r), r).cases
                                                     for r in RESIDUES}))
    else:
        raise TwoParamError(f"unknown mode {mode!r}")
    out.signs = assignment
    out.meta["sign_status"] = mode if residue is None else f"{mode}, q = {residue} mod 4"
    return out


def expected_trivial_entry(group_setup: GroupSetup, levi_setup: GroupSetup) -> RationalPoly:
    """|G| / (|U| |M|) with |U| = q^(N_G - N_M), for a split Levi."""
    n_u = group_setup.datum.n_pos_roots - levi_setup.datum.n_pos_roots
    return group_setup.order.exquo(levi_setup.order * RationalPoly.monomial(n_u))

