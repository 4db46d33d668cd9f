"""Generalized Green functions via the Lusztig-Shoji algorithm.

For each Springer block the pairing matrix Omega (built from the relative
Weyl group's characters and the orders of the twisted centers) is split
as Omega = P^t Lambda P with P block-unitriangular up to the powers
q^{d_C} on the diagonal.  Green functions are then
Q_w = sum_chi chi(w) sum_iota P[iota, chi] Y_iota, and the finite class
sizes come out of Lambda.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .coxeter import Word, centralizer_order
from .groupdata import (
    CoveringData,
    FiniteClass,
    GroupSetup,
    Pair,
    SpringerBlock,
    UnipotentClassCatalog,
)
from .symring import (
    ONE,
    Q,
    ZERO,
    RationalFunction,
    RationalPoly,
    SignExpr,
    SymExpr,
    from_json,
    poly_from_json,
    poly_to_json,
    to_json,
)

TABLE_SCHEMA = "greenfn.greentable/1"


class GreenError(ValueError):
    """The decomposition or a validation step failed."""


# ---------------------------------------------------------------------------
# Y-functions
# ---------------------------------------------------------------------------


@dataclass
class YFunction:
    pair: Pair
    values: dict[FiniteClass, SymExpr]
    sign: str | None = None

    def __call__(self, fc: FiniteClass) -> SymExpr:
        return self.values.get(fc, SymExpr(0))


def y_function(catalog: UnipotentClassCatalog, pair: Pair) -> YFunction:
    label, chi = pair
    cls = catalog[label]
    if chi not in cls.group.characters:
        raise GreenError(f"{chi!r} is not a character of A(u) for class {label}")
    sign = cls.sign[0] if cls.sign and cls.sign[1] == chi else None
    c = SymExpr.sign(sign) if sign else SymExpr(1)
    values = {(label, a): c * cls.char_value(chi, a) for a in cls.finite}
    return YFunction(pair, values, sign)


def y_functions(catalog: UnipotentClassCatalog, block: SpringerBlock) -> list[YFunction]:
    return [y_function(catalog, p) for p in block.pairs]


# ---------------------------------------------------------------------------
# small exact linear algebra over a field of RationalFunction
# ---------------------------------------------------------------------------

Mat = list[list[RationalFunction]]


def _zeros(n: int, m: int) -> Mat:
    return [[RationalFunction(0) for _ in range(m)] for _ in range(n)]


def _matmul(a: Mat, b: Mat) -> Mat:
    n, k, m = len(a), len(b), len(b[0]) if b else 0
    out = _zeros(n, m)
    for i in range(n):
        for t in range(k):
            if a[i][t]:
                for j in range(m):
                    if b[t][j]:
                        out[i][j] = out[i][j] + a[i][t] * b[t][j]
    return out


def _transpose(a: Mat) -> Mat:
    return [list(r) for r in zip(*a)] if a else []


def _solve(a: Mat, b: Mat, what: str) -> Mat:
    """a^-1 b by Gauss-Jordan elimination."""
    n = len(a)
    m = len(b[0]) if b else 0
    aug = [list(a[i]) + list(b[i]) for i in range(n)]
    for col in range(n):
        piv = next((r for r in range(col, n) if aug[r][col]), None)
        if piv is None:
            raise GreenError(f"singular pivot at {what}")
        aug[col], aug[piv] = aug[piv], aug[col]
        inv = RationalFunction(1) / aug[col][col]
        aug[col] = [x * inv for x in aug[col]]
        for r in range(n):
            if r != col and aug[r][col]:
                f = aug[r][col]
                aug[r] = [x - f * y for x, y in zip(aug[r], aug[col])]
    return [row[n:n + m] for row in aug]


# ---------------------------------------------------------------------------
# Lusztig-Shoji
# ---------------------------------------------------------------------------


def z0_order(setup: GroupSetup, block: SpringerBlock, x) -> RationalPoly:
    """|Z0(L_x)^F| for x in the block's relative Weyl group, Frobenius twisted by the setup."""
    from .coxeter import mat_mul

    return block.relative.complement_charpoly(mat_mul(x, setup.twist))


def pairing_matrix(setup: GroupSetup, block: SpringerBlock, pairs: Sequence[Pair]) -> Mat:
    """Omega[i][j] = |G| q^d / |W_L| * sum_w chi_i(w) chi_j(w) / |Z0(L_w)^F|.

    This is the only place where the weight convention lives; the sum runs
    over the relative Weyl group and chi_i is the character attached to
    pairs[i] by the Springer map.
    """
    w = block.group
    weights = []
    for c in w.classes:
        z = z0_order(setup, block, c.rep)
        weights.append(RationalFunction(RationalPoly.const(c.size), z))
    scale = RationalFunction(setup.order * _qpow(block.d, num=True), _qpow(block.d, num=False) * w.order)
    rows = [block.chars[p] for p in pairs]
    out = _zeros(len(pairs), len(pairs))
    for i, a in enumerate(rows):
        for j in range(i, len(rows)):
            b = rows[j]
            s = RationalFunction(0)
            for k, wt in enumerate(weights):
                if a[k] * b[k]:
                    s = s + wt * (a[k] * b[k])
            out[i][j] = out[j][i] = s * scale
    return out


def _qpow(d: int, num: bool) -> RationalPoly:
    if num:
        return Q**d if d > 0 else ONE
    return Q ** (-d) if d < 0 else ONE


@dataclass
class BlockDecomposition:
    block: SpringerBlock
    pairs: list[Pair]  # by decreasing class dimension, ties in catalog order
    p: dict[tuple[Pair, Pair], RationalPoly]
    lam: dict[str, Mat]  # per class label, over the block's pairs on that class

    def coefficient(self, iota: Pair, chi: Pair) -> RationalPoly:
        return self.p.get((iota, chi), ZERO)


def _pair_order(setup: GroupSetup, pairs: Iterable[Pair]) -> list[Pair]:
    cat = setup.catalog
    labels = cat.labels

    def key(p):
        c = cat[p[0]]
        return (c.dim, labels.index(p[0]), c.group.characters.index(p[1]))

    return sorted(pairs, key=key)


def diagonal_exponent(setup: GroupSetup, label: str) -> int:
    """d_C = (dim G - rank - dim C) / 2, the dimension of the Springer fibre."""
    twice = setup.springer_dim - setup.catalog[label].dim
    if twice % 2:
        raise GreenError(f"class {label} has odd codimension in the unipotent variety")
    return twice // 2


def lusztig_shoji(setup: GroupSetup, block: SpringerBlock) -> BlockDecomposition:
    pairs = _pair_order(setup, block.pairs)
    omega = pairing_matrix(setup, block, pairs)
    idx = {p: i for i, p in enumerate(pairs)}
    groups: list[list[Pair]] = []
    for p in pairs:
        if groups and groups[-1][0][0] == p[0]:
            groups[-1].append(p)
        else:
            groups.append([p])

    def sub(m: Mat, rows: list[Pair], cols: list[Pair]) -> Mat:
        return [[m[idx[a]][idx[b]] for b in cols] for a in rows]

    p_mat = _zeros(len(pairs), len(pairs))
    lam: dict[str, Mat] = {}
    for j, gj in enumerate(groups):
        cj = gj[0][0]
        dj = diagonal_exponent(setup, cj)
        for i in range(j):
            gi = groups[i]
            ci = gi[0][0]
            rhs = sub(omega, gi, gj)
            for k in range(i):
                gk = groups[k]
                t = _matmul(_matmul(_transpose(sub(p_mat, gk, gi)), lam[gk[0][0]]), sub(p_mat, gk, gj))
                rhs = [[x - y for x, y in zip(r1, r2)] for r1, r2 in zip(rhs, t)]
            sol = _solve(lam[ci], rhs, f"class {ci} (block {block.name})")
            qd = RationalFunction(ONE, Q ** diagonal_exponent(setup, ci))
            for r, a in enumerate(gi):
                for s, b in enumerate(gj):
                    p_mat[idx[a]][idx[b]] = sol[r][s] * qd
        rhs = sub(omega, gj, gj)
        for k in range(j):
            gk = groups[k]
            pk = sub(p_mat, gk, gj)
            t = _matmul(_matmul(_transpose(pk), lam[gk[0][0]]), pk)
            rhs = [[x - y for x, y in zip(r1, r2)] for r1, r2 in zip(rhs, t)]
        q2d = RationalFunction(ONE, Q ** (2 * dj))
        lam[cj] = [[x * q2d for x in r] for r in rhs]
        if not any(x for r in lam[cj] for x in r):
            raise GreenError(f"zero pivot block at class {cj} (block {block.name})")
        for a in gj:
            p_mat[idx[a]][idx[a]] = RationalFunction(Q**dj)

    coeffs: dict[tuple[Pair, Pair], RationalPoly] = {}
    for a in pairs:
        for b in pairs:
            x = p_mat[idx[a]][idx[b]]
            if not x:
                continue
            if not x.is_poly():
                raise GreenError(f"non-polynomial coefficient P[{a}, {b}] in block {block.name}")
            coeffs[a, b] = x.to_poly()
    for c, m in lam.items():
        for r in m:
            for x in r:
                if not x.is_poly():
                    raise GreenError(f"non-polynomial Lambda entry at class {c} in block {block.name}")
    return BlockDecomposition(block, pairs[::-1], coeffs, lam)


# ---------------------------------------------------------------------------
# Green tables
# ---------------------------------------------------------------------------


@dataclass
class Column:
    block: str
    word: Word
    norm: RationalFunction

    @property
    def label(self) -> str:
        return f"{self.block}:({','.join(map(str, self.word))})"


@dataclass
class GreenTable:
    group: str
    order: RationalPoly
    rows: list[FiniteClass]
    row_labels: list[str]
    sizes: list[RationalPoly]
    cols: list[Column]
    values: list[list[SymExpr]]  # values[row][col]
    meta: dict = field(default_factory=dict)

    def column(self, j: int) -> list[SymExpr]:
        return [r[j] for r in self.values]

    def column_index(self, block: str, word: Word) -> int:
        for j, c in enumerate(self.cols):
            if c.block == block and tuple(c.word) == tuple(word):
                return j
        raise GreenError(f"no column ({block}, {word}) in {self.group}")

    def row_index(self, label: str) -> int:
        try:
            return self.row_labels.index(label)
        except ValueError:
            raise GreenError(f"no row {label!r} in {self.group}") from None

    def select_columns(self, keep: Sequence[int], group: str | None = None) -> GreenTable:
        return GreenTable(
            group or self.group, self.order, list(self.rows), list(self.row_labels), list(self.sizes),
            [self.cols[j] for j in keep], [[r[j] for j in keep] for r in self.values], dict(self.meta),
        )

    def to_json(self) -> dict:
        return {
            "schema": TABLE_SCHEMA,
            "group": self.group,
            "order": poly_to_json(self.order),
            "rows": [
                {"label": lab, "class": fc[0], "rep": fc[1], "size": poly_to_json(s)}
                for lab, fc, s in zip(self.row_labels, self.rows, self.sizes)
            ],
            "cols": [
                {"block": c.block, "w": list(c.word), "norm_num": poly_to_json(c.norm.num),
                 "norm_den": poly_to_json(c.norm.den)}
                for c in self.cols
            ],
            "values": [[to_json(v) for v in r] for r in self.values],
            "meta": self.meta,
        }

    @classmethod
    def from_json(cls, data: dict) -> GreenTable:
        if data.get("schema") != TABLE_SCHEMA:
            raise GreenError(f"unknown table schema {data.get('schema')!r}")
        rows = data["rows"]
        cols = [
            Column(c["block"], tuple(c["w"]), RationalFunction(poly_from_json(c["norm_num"]), poly_from_json(c["norm_den"])))
            for c in data["cols"]
        ]
        values = [[from_json(v) for v in r] for r in data["values"]]
        if len(values) != len(rows) or any(len(r) != len(cols) for r in values):
            raise GreenError("table shape does not match its row/column lists")
        return cls(
            data["group"], poly_from_json(data["order"]), [(r["class"], r["rep"]) for r in rows],
            [r["label"] for r in rows], [poly_from_json(r["size"]) for r in rows], cols, values,
            dict(data.get("meta", {})),
        )

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def loads(cls, text: str) -> GreenTable:
        return cls.from_json(json.loads(text))


def class_sizes(setup: GroupSetup, decomps: Sequence[BlockDecomposition]) -> dict[FiniteClass, RationalPoly]:
    """Sizes |C_a| from Lambda: D = X^-t Lambda X^-1 with X[a][chi] = chi(a)."""
    cat = setup.catalog
    lam_entries: dict[tuple[Pair, Pair], RationalFunction] = {}
    for d in decomps:
        for label, m in d.lam.items():
            ps = [p for p in _pair_order(setup, d.block.pairs) if p[0] == label]
            for i, a in enumerate(ps):
                for j, b in enumerate(ps):
                    lam_entries[a, b] = m[i][j]
    sizes: dict[FiniteClass, RationalPoly] = {}
    for cls in cat.classes:
        chars = list(cls.group.characters)
        pairs = [(cls.label, c) for c in chars]
        lam = [[lam_entries.get((a, b), RationalFunction(0)) for b in pairs] for a in pairs]
        x = [[RationalFunction(cls.char_value(c, a)) for c in chars] for a in cls.finite]
        xt = _transpose(x)
        # D = X^-t Lambda X^-1  <=>  X^t D X = Lambda
        y = _solve(xt, lam, f"class {cls.label}")
        d = _transpose(_solve(xt, _transpose(y), f"class {cls.label}"))
        for i, a in enumerate(cls.finite):
            for j in range(len(cls.finite)):
                if i != j and d[i][j]:
                    raise GreenError(f"class {cls.label}: size matrix is not diagonal")
            if not d[i][i].is_poly():
                raise GreenError(f"class {cls.label},{a}: size is not a polynomial")
            sizes[cls.label, a] = d[i][i].to_poly()
    return sizes


def column_norm(setup: GroupSetup, block: SpringerBlock, c: int) -> RationalFunction:
    """n_w = |C_{W_L}(w)| q^d / |Z0(L_w)^F|."""
    cent = centralizer_order(block.group, c)
    z = z0_order(setup, block, block.group.classes[c].rep)
    return RationalFunction(_qpow(block.d, True) * cent, _qpow(block.d, False) * z)


def assemble(setup: GroupSetup, decomps: Sequence[BlockDecomposition]) -> GreenTable:
    cat = setup.catalog
    blocks = [d.block for d in decomps]
    if {b.name for b in blocks} != {b.name for b in setup.blocks}:
        raise GreenError("decompositions do not match the group's blocks")
    rows = cat.finite_classes()
    sizes = class_sizes(setup, decomps)
    total = sum((sizes[fc] for fc in rows), ZERO)
    if total != setup.datum.unipotent_count:
        raise GreenError(f"class sizes add up to {total}, not {setup.datum.unipotent_count}")
    ys = {p: y_function(cat, p) for b in blocks for p in b.pairs}
    cols: list[Column] = []
    columns: list[list[SymExpr]] = []
    for d in decomps:
        b = d.block
        # p_chi = sum_iota P[iota, chi] Y_iota, evaluated class by class
        pfun = {}
        for chi in b.pairs:
            vals = []
            for fc in rows:
                s = SignExpr()
                for iota in b.pairs:
                    if iota[0] != fc[0]:
                        continue
                    coef = d.coefficient(iota, chi)
                    if coef:
                        s = s + ys[iota](fc).cases * coef
                vals.append(s)
            pfun[chi] = vals
        for c in b.group.classes:
            vals = []
            for r in range(len(rows)):
                s = SignExpr()
                for chi in b.pairs:
                    v = b.chars[chi][c.index]
                    if v:
                        s = s + pfun[chi][r] * v
                vals.append(SymExpr(s))
            cols.append(Column(b.name, c.word, column_norm(setup, b, c.index)))
            columns.append(vals)
    values = [[col[r] for col in columns] for r in range(len(rows))]
    table = GreenTable(setup.name, setup.order, rows, [cat.finite_label(fc) for fc in rows],
                       [sizes[fc] for fc in rows], cols, values)
    return table


def green_table(setup: GroupSetup, check: bool = True) -> GreenTable:
    decomps = [lusztig_shoji(setup, b) for b in setup.blocks]
    table = assemble(setup, decomps)
    if check:
        bad = verify_orthogonality(table)
        if bad:
            raise GreenError(f"orthogonality fails for {len(bad)} pairs, first {bad[0]}")
    return table


# ---------------------------------------------------------------------------
# transfer through the covering SL2^k -> [L, L]
# ---------------------------------------------------------------------------


def transfer_via_covering(factor_table: GreenTable, cov: CoveringData, setup: GroupSetup) -> GreenTable:
    """Green table of a Levi from the Green table of its simply connected factors.

    Every factor is split here: the Levi's twist must act trivially on the
    derived group, so it only changes |L(q)| and the column norms.
    """
    levi = setup.datum
    _ = levi.order  # raises if the twist permutes the Levi's nodes
    cat = setup.catalog
    fcat = cov.factor_catalog
    fsize = {fc: s for fc, s in zip(factor_table.rows, factor_table.sizes)}
    rows = cat.finite_classes()
    sizes = []
    reps = []
    for label, a in rows:
        cls = cat[label]
        parts = cls.factors
        x = cls.factor_reps[a]
        kbar = cov.kernel_image(label)
        coset = _coset(fcat, parts, x, kbar)
        sizes.append(sum((_prod(fsize[(p, y)] for p, y in zip(parts, t)) for t in coset), ZERO))
        reps.append(coset)
    total = sum(sizes, ZERO)
    if total != levi.unipotent_count:
        raise GreenError(f"transferred class sizes add up to {total}")

    cusp_col = {}
    for j, c in enumerate(factor_table.cols):
        cusp_col[c.block, tuple(c.word)] = j
    cols, columns = [], []
    for b in setup.blocks:
        for c in b.group.classes:
            factor_cols = []
            for n in cov.nodes:
                if n in b.levi_nodes:
                    key = _cuspidal_key(factor_table)
                else:
                    key = ("T", (1,) if n in c.word else ())
                if key not in cusp_col:
                    raise GreenError(f"factor table has no column {key}")
                factor_cols.append(cusp_col[key])
            vals = []
            for (label, a), coset in zip(rows, reps):
                parts = cat[label].factors
                vs = {
                    _prod_sym(factor_table.values[factor_table.rows.index((p, y))][j]
                              for p, y, j in zip(parts, t, factor_cols))
                    for t in coset
                }
                if len(vs) != 1:
                    raise GreenError(f"product function is not constant on the coset of {label},{a}")
                vals.append(vs.pop())
            cols.append(Column(b.name, c.word, column_norm(setup, b, c.index)))
            columns.append(vals)
    values = [[col[r] for col in columns] for r in range(len(rows))]
    return GreenTable(setup.name, setup.order, rows, [cat.finite_label(fc) for fc in rows], sizes, cols, values)


def _cuspidal_key(table: GreenTable) -> tuple[str, Word]:
    keys = [(c.block, tuple(c.word)) for c in table.cols if c.block != "T"]
    if len(keys) != 1:
        raise GreenError("factor table must have exactly one cuspidal column")
    return keys[0]


def _coset(fcat: UnipotentClassCatalog, parts, x, kbar) -> list[tuple[str, ...]]:
    groups = [fcat[p].group for p in parts]
    out = {tuple(x)}
    while True:
        new = out | {tuple(g.mul(a, b) for g, a, b in zip(groups, y, k)) for y in out for k in kbar}
        if new == out:
            return sorted(out)
        out = new


def _prod(xs) -> RationalPoly:
    out = ONE
    for x in xs:
        out = out * x
    return out


def _prod_sym(xs) -> SymExpr:
    out = SymExpr(1)
    for x in xs:
        out = out * x
    return out


# ---------------------------------------------------------------------------
# orthogonality
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Violation:
    i: int
    j: int
    residual: object

    def __str__(self) -> str:
        return f"({self.i}, {self.j}): residual {self.residual!r}"


def scalar_product_times_order(table: GreenTable, i: int, j: int) -> SignExpr:
    """sum_c |c| Q_i(c) Q_j(c), a polynomial in q and the signs."""
    s = SignExpr()
    for r, size in enumerate(table.sizes):
        a, b = table.values[r][i], table.values[r][j]
        if a and b:
            if a.is_split or b.is_split:
                raise GreenError("residue-split Green function values are not supported")
            s = s + a.cases * b.cases * size
    return s


def verify_orthogonality(table: GreenTable) -> list[Violation]:
    """(1/|G|) sum_c |c| Q_i(c) Q_j(c) = delta_ij n_i, identically in q and the signs."""
    out = []
    n = len(table.cols)
    for i in range(n):
        for j in range(i, n):
            s = scalar_product_times_order(table, i, j)
            expected = SignExpr()
            if i == j:
                e = table.cols[i].norm * RationalFunction(table.order)
                if not e.is_poly():
                    out.append(Violation(i, j, e))
                    continue
                expected = SignExpr.lift(e.to_poly())
            diff = s - expected
            if diff:
                out.append(Violation(i, j, diff))
    return out


def norm_ratio(table: GreenTable, i: int) -> RationalFunction:
    """(Q_i, Q_i) computed from the table, for reporting."""
    s = scalar_product_times_order(table, i, i).plain()
    return RationalFunction(s, table.order)

