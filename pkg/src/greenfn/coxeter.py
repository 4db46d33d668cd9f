"""Small finite Coxeter groups: elements, classes, character tables, parabolics.

Elements are integer matrices acting on the simple-root coordinates of the
root lattice.  Conjugacy classes are labeled by their shortlex-minimal word
in the (labeled) generators, which makes data files independent of the
matrix realization.  Character tables are computed exactly by splitting
simultaneous eigenspaces of the class-multiplication matrices (Burnside's
method); every group needed here has a rational character table.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from math import isqrt
from typing import Mapping, Sequence

from .symring import ONE, Q, RationalPoly

Matrix = tuple[tuple[int, ...], ...]
Word = tuple[int, ...]

MAX_ORDER = 20000


class CoxeterError(ValueError):
    pass


# ---------------------------------------------------------------------------
# exact small linear algebra
# ---------------------------------------------------------------------------


def mat_mul(a: Matrix, b: Matrix) -> Matrix:
    cols = list(zip(*b))
    return tuple(tuple(sum(x * y for x, y in zip(row, col)) for col in cols) for row in a)


def identity(n: int) -> Matrix:
    return tuple(tuple(int(i == j) for j in range(n)) for i in range(n))


def _rref(rows: list[list[Fraction]]) -> tuple[list[list[Fraction]], list[int]]:
    m = [list(r) for r in rows]
    pivots = []
    r = 0
    ncols = len(m[0]) if m else 0
    for c in range(ncols):
        p = next((i for i in range(r, len(m)) if m[i][c]), None)
        if p is None:
            continue
        m[r], m[p] = m[p], m[r]
        inv = 1 / m[r][c]
        m[r] = [x * inv for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c]:
                f = m[i][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m[:r], pivots


def nullspace(rows: list[list[Fraction]], ncols: int) -> list[list[Fraction]]:
    """Basis of {x : rows . x = 0}."""
    if not rows:
        return [[Fraction(int(i == j)) for i in range(ncols)] for j in range(ncols)]
    red, piv = _rref(rows)
    free = [c for c in range(ncols) if c not in piv]
    basis = []
    for f in free:
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for row, p in zip(red, piv):
            v[p] = -row[f]
        basis.append(v)
    return basis


def charpoly(m: Matrix) -> RationalPoly:
    """det(q*I - m) by the Faddeev-LeVerrier recursion."""
    n = len(m)
    a = [[Fraction(x) for x in row] for row in m]
    coeffs = [Fraction(1)]
    mk = [[Fraction(0)] * n for _ in range(n)]
    for k in range(1, n + 1):
        # M_k = A M_{k-1} + c_{k-1} I
        prev = [row[:] for row in mk]
        for i in range(n):
            prev[i][i] += coeffs[-1]
        mk = [[sum(a[i][t] * prev[t][j] for t in range(n)) for j in range(n)] for i in range(n)]
        c = -sum(mk[i][i] for i in range(n)) / k
        coeffs.append(c)
    # coeffs[k] multiplies q**(n-k)
    return RationalPoly(reversed(coeffs))


# ---------------------------------------------------------------------------
# groups
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConjugacyClass:
    index: int
    word: Word
    rep: Matrix
    size: int


class CoxeterGroup:
    """Finite group generated by labeled involutions, realized by integer matrices."""

    def __init__(self, generators: Mapping[int, Matrix], name: str = "", frobenius: Matrix | None = None):
        if not generators:
            raise CoxeterError("empty generating set; use trivial_group()")
        self.name = name
        self.labels: tuple[int, ...] = tuple(sorted(generators))
        self.gens: dict[int, Matrix] = {s: tuple(map(tuple, generators[s])) for s in self.labels}
        self.dim = len(next(iter(self.gens.values())))
        # F acts trivially in every shipped instance; kept for the general signature
        self.frobenius = frobenius
        self._enumerate()
        self._classify()

    def _enumerate(self) -> None:
        e = identity(self.dim)
        self.elements: list[Matrix] = [e]
        self.index: dict[Matrix, int] = {e: 0}
        self.words: list[Word] = [()]
        dq = deque([0])
        while dq:
            i = dq.popleft()
            x = self.elements[i]
            for s in self.labels:
                y = mat_mul(x, self.gens[s])
                if y not in self.index:
                    if len(self.elements) >= MAX_ORDER:
                        raise CoxeterError("group is not finite (or too large)")
                    self.index[y] = len(self.elements)
                    self.elements.append(y)
                    self.words.append(self.words[i] + (s,))
                    dq.append(self.index[y])

    def _classify(self) -> None:
        seen = [-1] * len(self.elements)
        raw = []
        for i in range(len(self.elements)):
            if seen[i] >= 0:
                continue
            orbit = [i]
            seen[i] = len(raw)
            k = 0
            while k < len(orbit):
                x = self.elements[orbit[k]]
                for g in self.gens.values():
                    j = self.index[mat_mul(mat_mul(g, x), g)]
                    if seen[j] < 0:
                        seen[j] = len(raw)
                        orbit.append(j)
                k += 1
            raw.append(orbit)
        order = sorted(
            range(len(raw)),
            key=lambda c: min((len(self.words[i]), self.words[i]) for i in raw[c]),
        )
        self.classes: list[ConjugacyClass] = []
        self.class_of: list[int] = [0] * len(self.elements)
        for new, old in enumerate(order):
            members = raw[old]
            best = min(members, key=lambda i: (len(self.words[i]), self.words[i]))
            self.classes.append(ConjugacyClass(new, self.words[best], self.elements[best], len(members)))
            for i in members:
                self.class_of[i] = new
        self._members = [[] for _ in self.classes]
        for i, c in enumerate(self.class_of):
            self._members[c].append(i)

    # -- basic queries --------------------------------------------------------

    @property
    def order(self) -> int:
        return len(self.elements)

    def element(self, word: Sequence[int]) -> Matrix:
        x = identity(self.dim)
        for s in word:
            x = mat_mul(x, self.gens[s])
        return x

    def inverse(self, x: Matrix) -> Matrix:
        return self.element(reversed(self.words[self.index[x]]))

    def length(self, x: Matrix) -> int:
        return len(self.words[self.index[x]])

    def class_index(self, x: Matrix) -> int:
        if x not in self.index:
            raise CoxeterError("element not in group")
        return self.class_of[self.index[x]]

    def class_by_word(self, word: Sequence[int]) -> int:
        return self.class_index(self.element(word))

    def class_members(self, c: int) -> list[Matrix]:
        return [self.elements[i] for i in self._members[c]]

    @cached_property
    def coxeter_matrix(self) -> dict[tuple[int, int], int]:
        out = {}
        for a in self.labels:
            for b in self.labels:
                x = mat_mul(self.gens[a], self.gens[b])
                k, y = 1, x
                e = identity(self.dim)
                while y != e:
                    y = mat_mul(y, x)
                    k += 1
                out[a, b] = k
        return out

    # -- character table ------------------------------------------------------

    @cached_property
    def character_table(self) -> list[tuple[int, ...]]:
        """Irreducible characters as value tuples over ``self.classes``.

        Rows are sorted by degree, then by values in decreasing lexicographic
        order (so the trivial character comes first).
        """
        r = len(self.classes)
        sizes = [c.size for c in self.classes]
        inv_idx = [self.index[self.inverse(x)] for x in self.elements]
        # a[j][i][k] = #{x in C_j : x^-1 z_k in C_i}
        a = [[[0] * r for _ in range(r)] for _ in range(r)]
        for k, ck in enumerate(self.classes):
            z = ck.rep
            for xi, x in enumerate(self.elements):
                y = mat_mul(self.elements[inv_idx[xi]], z)
                a[self.class_of[xi]][self.class_of[self.index[y]]][k] += 1
        spaces = [[[Fraction(int(i == j)) for i in range(r)] for j in range(r)]]
        for j in range(r):
            if all(len(s) == 1 for s in spaces):
                break
            mj = a[j]
            refined = []
            for basis in spaces:
                if len(basis) == 1:
                    refined.append(basis)
                    continue
                refined.extend(self._split(mj, basis, sizes[j]))
            spaces = refined
        if not all(len(s) == 1 for s in spaces):
            raise CoxeterError("character table: eigenspaces did not split")
        table = []
        for (v,) in spaces:
            omega = [x / v[0] for x in v]
            norm = sum(w * w / s for w, s in zip(omega, sizes))
            deg2 = Fraction(self.order) / norm
            deg = isqrt(deg2.numerator)
            if deg2.denominator != 1 or deg * deg != deg2:
                raise CoxeterError("non-integral character degree")
            row = [deg * w / s for w, s in zip(omega, sizes)]
            if any(x.denominator != 1 for x in row):
                raise CoxeterError("irrational character values are not supported")
            table.append(tuple(int(x) for x in row))
        table.sort(key=lambda row: (row[0], tuple(-x for x in row)))
        return table

    @staticmethod
    def _split(m: list[list[int]], basis: list[list[Fraction]], bound: int) -> list[list[list[Fraction]]]:
        # restrict m (acting on column vectors) to span(basis), split by integer eigenvalues
        r = len(m)
        d = len(basis)
        mb = [[sum(m[i][k] * b[k] for k in range(r)) for i in range(r)] for b in basis]
        out = []
        found = 0
        for lam in range(-bound, bound + 1):
            # coefficients c with sum_t c_t (m b_t - lam b_t) = 0
            rows = [[mb[t][i] - lam * basis[t][i] for t in range(d)] for i in range(r)]
            ns = nullspace(rows, d)
            if ns:
                out.append([[sum(c[t] * basis[t][i] for t in range(d)) for i in range(r)] for c in ns])
                found += len(ns)
                if found == d:
                    break
        if found != d:
            raise CoxeterError("non-integral eigenvalue in class algebra")
        return out

    def check_orthogonality(self) -> bool:
        sizes = [c.size for c in self.classes]
        t = self.character_table
        for i, a in enumerate(t):
            for j, b in enumerate(t):
                s = sum(n * x * y for n, x, y in zip(sizes, a, b))
                if s != (self.order if i == j else 0):
                    return False
        for k in range(len(sizes)):
            for l in range(len(sizes)):
                s = sum(row[k] * row[l] for row in t)
                if s != (self.order // sizes[k] if k == l else 0):
                    return False
        return True

    def find_character(self, values_by_word: Mapping[Word, int]) -> tuple[int, ...]:
        """Look up an irreducible character from its values on class words."""
        idx = {c.word: c.index for c in self.classes}
        missing = set(idx) - set(values_by_word)
        if missing:
            raise CoxeterError(f"character descriptor misses classes {sorted(missing)}")
        row = tuple(values_by_word[c.word] for c in self.classes)
        if row not in self.character_table:
            raise CoxeterError(f"{row} is not an irreducible character of {self.name or 'group'}")
        return row

    # -- parabolic structure --------------------------------------------------

    def parabolic(self, nodes: Sequence[int]) -> CoxeterGroup:
        nodes = sorted(nodes)
        if not nodes:
            return trivial_group(self.dim)
        sub = CoxeterGroup({s: self.gens[s] for s in nodes}, name=f"{self.name}_{''.join(map(str, nodes))}")
        # roots and coordinates stay those of the ambient group
        if hasattr(self, "node_index"):
            sub.node_index = self.node_index
            sub.cartan = self.cartan
        return sub

    def longest(self, nodes: Sequence[int]) -> Matrix:
        if not nodes:
            return identity(self.dim)
        sub = self.parabolic(nodes)
        return max(sub.elements, key=sub.length)

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "generators": list(self.labels),
            "coxeter_matrix": [[self.coxeter_matrix[a, b] for b in self.labels] for a in self.labels],
            "classes": [{"word": list(c.word), "size": c.size} for c in self.classes],
            "characters": [list(r) for r in self.character_table],
        }


class _TrivialGroup(CoxeterGroup):
    def __init__(self, dim: int):
        self.name = "1"
        self.labels = ()
        self.gens = {}
        self.dim = dim
        self.frobenius = None
        e = identity(dim)
        self.elements = [e]
        self.index = {e: 0}
        self.words = [()]
        self.classes = [ConjugacyClass(0, (), e, 1)]
        self.class_of = [0]
        self._members = [[0]]


def trivial_group(dim: int = 1) -> CoxeterGroup:
    return _TrivialGroup(dim)


def cartan_from_coxeter(cm: Sequence[Sequence[int]]) -> list[list[int]]:
    n = len(cm)
    a = [[2 if i == j else 0 for j in range(n)] for i in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            m = cm[i][j]
            if cm[j][i] != m:
                raise CoxeterError("Coxeter matrix is not symmetric")
            if m == 2:
                continue
            if m == 3:
                a[i][j] = a[j][i] = -1
            elif m == 4:
                a[i][j], a[j][i] = -1, -2
            elif m == 6:
                a[i][j], a[j][i] = -1, -3
            else:
                raise CoxeterError(f"m={m} is not supported (crystallographic finite types only)")
    return a


def build(coxeter_matrix: Sequence[Sequence[int]], labels: Sequence[int] | None = None, name: str = "") -> CoxeterGroup:
    """Reflection representation on simple-root coordinates of a finite Coxeter group."""
    n = len(coxeter_matrix)
    if n == 0:
        return trivial_group(1)
    if n > 4:
        raise CoxeterError("rank above 4 is out of scope")
    labels = list(labels) if labels is not None else list(range(1, n + 1))
    a = cartan_from_coxeter(coxeter_matrix)
    gens = {}
    for i in range(n):
        # s_i(alpha_j) = alpha_j - A_ij alpha_i; matrix columns are images
        m = [[int(r == c) for c in range(n)] for r in range(n)]
        for j in range(n):
            m[i][j] -= a[i][j]
        gens[labels[i]] = tuple(map(tuple, m))
    w = CoxeterGroup(gens, name=name)
    w.cartan = a
    w.node_index = {s: i for i, s in enumerate(labels)}
    return w


def coxeter_matrix_of(kind: str, labels: Sequence[int] = ()) -> list[list[int]]:
    """Coxeter matrices of the named types used here."""
    if kind == "A1":
        return [[1]]
    if kind == "A1xA1xA1":
        return [[1, 2, 2], [2, 1, 2], [2, 2, 1]]
    if kind == "B2":
        return [[1, 4], [4, 1]]
    if kind == "D4":
        # nodes 1, 2, 4 attached to the central node 3
        return [[1, 2, 3, 2], [2, 1, 3, 2], [3, 3, 1, 3], [2, 2, 3, 1]]
    raise CoxeterError(f"unknown type {kind}")


def simple_root(w: CoxeterGroup, s: int) -> tuple[int, ...]:
    i = w.node_index[s]
    return tuple(int(k == i) for k in range(w.dim))


def apply(m: Matrix, v: Sequence[int]) -> tuple[int, ...]:
    return tuple(sum(x * y for x, y in zip(row, v)) for row in m)


# ---------------------------------------------------------------------------
# relative Weyl groups
# ---------------------------------------------------------------------------


@dataclass
class RelativeWeylGroup:
    """N_W(W_I)/W_I, realized by the complement N_I = {w : w(Delta_I) = Delta_I}."""

    ambient: CoxeterGroup
    nodes: tuple[int, ...]
    group: CoxeterGroup
    node_map: dict[int, int] = field(default_factory=dict)

    def reduce(self, x: Matrix) -> Matrix:
        """The representative in N_I of the coset W_I x (x must normalize W_I)."""
        roots = {simple_root(self.ambient, s) for s in self.nodes}
        for u in self.ambient.parabolic(self.nodes).elements:
            y = mat_mul(u, x)
            if {apply(y, r) for r in roots} == roots:
                return y
        raise CoxeterError("element does not normalize the parabolic subgroup")

    def class_of(self, x: Matrix) -> int:
        return self.group.class_index(self.reduce(x))

    def complement_charpoly(self, x: Matrix) -> RationalPoly:
        """det(q - x) on the orthogonal complement of span(Delta_I)."""
        x = self.reduce(x)
        full = charpoly(x)
        if not self.nodes:
            return full
        idx = [self.ambient.node_index[s] for s in self.nodes]
        perm = {}
        for k, i in enumerate(idx):
            image = apply(x, simple_root(self.ambient, self.nodes[k]))
            perm[i] = image.index(1)
        part = ONE
        seen = set()
        for i in idx:
            if i in seen:
                continue
            n, j = 0, i
            while j not in seen:
                seen.add(j)
                j = perm[j]
                n += 1
            part = part * (Q**n - 1)
        return full.exquo(part)


def relative_weyl(w: CoxeterGroup, nodes: Sequence[int]) -> RelativeWeylGroup:
    """Relative Weyl group with generators w0(I+{j}) w0(I) labeled by j outside I."""
    nodes = tuple(sorted(nodes))
    if not set(nodes) <= set(w.labels):
        raise CoxeterError(f"nodes {nodes} not in {w.labels}")
    roots = {simple_root(w, s) for s in nodes}
    normalizer = [x for x in w.elements if {apply(x, r) for r in roots} == roots]
    w0 = w.longest(nodes)
    gens = {}
    for j in w.labels:
        if j in nodes:
            continue
        v = mat_mul(w.longest(nodes + (j,)), w0)
        if {apply(v, r) for r in roots} != roots:
            continue
        if v != identity(w.dim):
            gens[j] = v
    if not gens:
        group = trivial_group(w.dim)
    else:
        group = CoxeterGroup(gens, name=f"W({''.join(map(str, nodes))})")
    if group.order != len(normalizer):
        raise CoxeterError("relative Weyl group is not generated by the longest-element construction")
    return RelativeWeylGroup(w, nodes, group, {j: j for j in gens})


@dataclass(frozen=True)
class FClassFusion:
    source: RelativeWeylGroup
    target: RelativeWeylGroup
    mapping: dict[int, int]


def fuse(sub: RelativeWeylGroup, over: RelativeWeylGroup) -> FClassFusion:
    """Class fusion from the relative Weyl group inside a Levi to the one inside W."""
    if sub.nodes != over.nodes:
        raise CoxeterError("fusion needs relative groups over the same parabolic")
    mapping = {}
    for c in sub.group.classes:
        targets = {over.class_of(x) for x in sub.group.class_members(c.index)}
        if len(targets) != 1:
            raise CoxeterError("fusion is not constant on a class")
        mapping[c.index] = targets.pop()
    return FClassFusion(sub, over, mapping)


def centralizer_order(w: CoxeterGroup, c: int) -> int:
    return w.order // w.classes[c].size


def poincare_quotient(w: CoxeterGroup, nodes: Sequence[int]) -> RationalPoly:
    """Sum of q**length over minimal-length representatives of W / W_I."""
    coeffs: dict[int, int] = {}
    for i, x in enumerate(w.elements):
        n = len(w.words[i])
        if all(w.length(mat_mul(x, w.gens[s])) > n for s in nodes):
            coeffs[n] = coeffs.get(n, 0) + 1
    return RationalPoly.from_dict(coeffs)
