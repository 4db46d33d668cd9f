"""Exact coefficient ring for Green-function values.

Values live in Q[q] extended by involutive sign indeterminates (a**2 == 1)
and, when needed, split by the residue of q modulo 4.  Everything here is
immutable and exact; there is no floating point anywhere.
"""

from __future__ import annotations

import re
from fractions import Fraction
from functools import reduce
from math import gcd, lcm
from typing import Iterable, Mapping, Union

Rational = Union[int, Fraction]

RESIDUES = (1, 3)
CYCLOTOMIC_INDICES = (1, 2, 3, 4, 6)


class SymringError(ValueError):
    """Raised on invalid ring operations (division by zero, missing signs...)."""


# ---------------------------------------------------------------------------
# RationalPoly
# ---------------------------------------------------------------------------


class RationalPoly:
    """Polynomial in q with exact rational coefficients.

    Stored densely as a tuple indexed by degree, without trailing zeros, so
    the zero polynomial is the empty tuple.
    """

    __slots__ = ("_c", "_hash")

    def __init__(self, coeffs: Iterable[Rational] = ()):
        c = [Fraction(x) for x in coeffs]
        while c and not c[-1]:
            c.pop()
        self._c: tuple[Fraction, ...] = tuple(c)
        self._hash: int | None = None

    @classmethod
    def _raw(cls, c: tuple[Fraction, ...]) -> RationalPoly:
        p = cls.__new__(cls)
        p._c = c
        p._hash = None
        return p

    @classmethod
    def from_dict(cls, coeffs: Mapping[int, Rational]) -> RationalPoly:
        if not coeffs:
            return cls()
        top = max(coeffs)
        if min(coeffs) < 0:
            raise SymringError("negative degree")
        return cls(coeffs.get(i, 0) for i in range(top + 1))

    @classmethod
    def const(cls, c: Rational) -> RationalPoly:
        return cls((c,))

    @classmethod
    def monomial(cls, deg: int, c: Rational = 1) -> RationalPoly:
        return cls([0] * deg + [c])

    @property
    def coefficients(self) -> dict[int, Fraction]:
        return {i: c for i, c in enumerate(self._c) if c}

    @property
    def degree(self) -> int:
        return len(self._c) - 1

    @property
    def lc(self) -> Fraction:
        return self._c[-1] if self._c else Fraction(0)

    def is_zero(self) -> bool:
        return not self._c

    def is_constant(self) -> bool:
        return len(self._c) <= 1

    def constant_value(self) -> Fraction:
        if len(self._c) > 1:
            raise SymringError(f"not a constant: {self}")
        return self._c[0] if self._c else Fraction(0)

    def __bool__(self) -> bool:
        return bool(self._c)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, RationalPoly):
            return self._c == other._c
        if isinstance(other, (int, Fraction)):
            return self._c == RationalPoly.const(other)._c
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(self._c)
        return self._hash

    def __repr__(self) -> str:
        return f"RationalPoly({_poly_str(self) or '0'})"

    @staticmethod
    def _coerce(x) -> RationalPoly:
        if isinstance(x, RationalPoly):
            return x
        if isinstance(x, (int, Fraction)):
            return RationalPoly.const(x)
        return NotImplemented

    def __add__(self, other) -> RationalPoly:
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        a, b = self._c, other._c
        if len(a) < len(b):
            a, b = b, a
        c = list(a)
        for i, x in enumerate(b):
            c[i] += x
        while c and not c[-1]:
            c.pop()
        return RationalPoly._raw(tuple(c))

    __radd__ = __add__

    def __neg__(self) -> RationalPoly:
        return RationalPoly._raw(tuple(-x for x in self._c))

    def __sub__(self, other) -> RationalPoly:
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other) -> RationalPoly:
        return (-self) + other

    def __mul__(self, other) -> RationalPoly:
        if isinstance(other, (int, Fraction)):
            if not other:
                return RationalPoly()
            return RationalPoly._raw(tuple(x * other for x in self._c))
        if not isinstance(other, RationalPoly):
            return NotImplemented
        a, b = self._c, other._c
        if not a or not b:
            return RationalPoly()
        c = [Fraction(0)] * (len(a) + len(b) - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    c[i + j] += x * y
        return RationalPoly._raw(tuple(c))

    __rmul__ = __mul__

    def __pow__(self, n: int) -> RationalPoly:
        if n < 0:
            raise SymringError("negative power of a polynomial")
        out, base = RationalPoly.const(1), self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def scale(self, c: Rational) -> RationalPoly:
        return self * Fraction(c)

    def __truediv__(self, c) -> RationalPoly:
        if isinstance(c, (int, Fraction)):
            if not c:
                raise SymringError("division by zero")
            return self * (1 / Fraction(c))
        return NotImplemented

    def __divmod__(self, other: RationalPoly) -> tuple[RationalPoly, RationalPoly]:
        if not other:
            raise SymringError("polynomial division by zero")
        r = list(self._c)
        d = other._c
        if len(r) < len(d):
            return RationalPoly(), self
        quo = [Fraction(0)] * (len(r) - len(d) + 1)
        inv = 1 / d[-1]
        for k in range(len(quo) - 1, -1, -1):
            c = r[k + len(d) - 1] * inv
            quo[k] = c
            if c:
                for j, y in enumerate(d):
                    r[k + j] -= c * y
        return RationalPoly(quo), RationalPoly(r[: len(d) - 1])

    def __floordiv__(self, other: RationalPoly) -> RationalPoly:
        return divmod(self, other)[0]

    def __mod__(self, other: RationalPoly) -> RationalPoly:
        return divmod(self, other)[1]

    def exquo(self, other: RationalPoly) -> RationalPoly:
        """Exact division; raises when ``other`` does not divide ``self``."""
        quo, rem = divmod(self, other)
        if rem:
            raise SymringError(f"{other} does not divide {self}")
        return quo

    def monic(self) -> RationalPoly:
        return self / self.lc if self else self

    def gcd(self, other: RationalPoly) -> RationalPoly:
        a, b = self, other
        while b:
            a, b = b, a % b
        return a.monic()

    def derivative(self) -> RationalPoly:
        return RationalPoly(i * c for i, c in enumerate(self._c) if i)

    def __call__(self, x: Rational) -> Fraction:
        acc = Fraction(0)
        for c in reversed(self._c):
            acc = acc * x + c
        return acc

    def compose_linear(self, a: Rational, b: Rational) -> RationalPoly:
        """Return p(a*t + b) as a polynomial in t."""
        lin = RationalPoly((b, a))
        out = RationalPoly()
        for c in reversed(self._c):
            out = out * lin + c
        return out

    def valuation(self) -> int:
        """Largest k with q**k dividing self (0 for the zero polynomial)."""
        for i, c in enumerate(self._c):
            if c:
                return i
        return 0

    def content(self) -> Fraction:
        """Signed rational content: self / content is primitive with positive lc."""
        if not self._c:
            return Fraction(0)
        nz = [c for c in self._c if c]
        num = abs(reduce(gcd, (c.numerator for c in nz)))
        den = reduce(lcm, (c.denominator for c in nz))
        sign = 1 if self.lc > 0 else -1
        return Fraction(sign * num, den)


Q = RationalPoly((0, 1))
ONE = RationalPoly.const(1)
ZERO = RationalPoly()


def cyclotomic(n: int) -> RationalPoly:
    """The n-th cyclotomic polynomial, for n in 1, 2, 3, 4, 6."""
    table = {1: (-1, 1), 2: (1, 1), 3: (1, 1, 1), 4: (1, 0, 1), 6: (1, -1, 1)}
    if n not in table:
        raise SymringError(f"cyclotomic index {n} not supported")
    return RationalPoly(table[n])


# ---------------------------------------------------------------------------
# RationalFunction: quotients of polynomials, used by the linear algebra
# ---------------------------------------------------------------------------


class RationalFunction:
    """Reduced quotient num/den with monic denominator."""

    __slots__ = ("num", "den")

    def __init__(self, num: RationalPoly | Rational, den: RationalPoly | Rational = 1):
        num = RationalPoly._coerce(num)
        den = RationalPoly._coerce(den)
        if not den:
            raise SymringError("rational function with zero denominator")
        if not num:
            self.num, self.den = ZERO, ONE
            return
        if den.is_constant():
            self.num, self.den = num / den.lc, ONE
            return
        g = num.gcd(den)
        if not g.is_constant():
            num, den = num.exquo(g), den.exquo(g)
        lc = den.lc
        self.num, self.den = num / lc, den / lc

    @staticmethod
    def _coerce(x) -> RationalFunction:
        if isinstance(x, RationalFunction):
            return x
        if isinstance(x, (RationalPoly, int, Fraction)):
            return RationalFunction(x)
        return NotImplemented

    def is_poly(self) -> bool:
        return self.den.is_constant()

    def to_poly(self) -> RationalPoly:
        if not self.is_poly():
            raise SymringError(f"not a polynomial: ({self.num})/({self.den})")
        return self.num

    def __bool__(self) -> bool:
        return bool(self.num)

    def is_zero(self) -> bool:
        return not self.num

    def __eq__(self, other: object) -> bool:
        other = RationalFunction._coerce(other)
        if other is NotImplemented:
            return other
        return self.num == other.num and self.den == other.den

    def __hash__(self) -> int:
        return hash((self.num, self.den))

    def __repr__(self) -> str:
        return f"RationalFunction(({_poly_str(self.num) or '0'})/({_poly_str(self.den)}))"

    def __add__(self, other) -> RationalFunction:
        other = RationalFunction._coerce(other)
        if other is NotImplemented:
            return other
        if self.den == other.den:
            return RationalFunction(self.num + other.num, self.den)
        return RationalFunction(self.num * other.den + other.num * self.den, self.den * other.den)

    __radd__ = __add__

    def __neg__(self) -> RationalFunction:
        out = RationalFunction.__new__(RationalFunction)
        out.num, out.den = -self.num, self.den
        return out

    def __sub__(self, other) -> RationalFunction:
        other = RationalFunction._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other) -> RationalFunction:
        return (-self) + other

    def __mul__(self, other) -> RationalFunction:
        other = RationalFunction._coerce(other)
        if other is NotImplemented:
            return other
        return RationalFunction(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def __truediv__(self, other) -> RationalFunction:
        other = RationalFunction._coerce(other)
        if other is NotImplemented:
            return other
        if not other:
            raise SymringError("division by zero rational function")
        return RationalFunction(self.num * other.den, self.den * other.num)

    def __rtruediv__(self, other) -> RationalFunction:
        return RationalFunction._coerce(other) / self


# ---------------------------------------------------------------------------
# Sign expressions
# ---------------------------------------------------------------------------

Monomial = frozenset  # of sign names; a**2 == 1 keeps exponents in {0, 1}
EMPTY: frozenset[str] = frozenset()


def _mono_key(m: frozenset[str]) -> tuple:
    return (len(m), tuple(sorted(m)))


class SignExpr:
    """Finite sum of sign monomials with polynomial (or rational-function) coefficients."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[frozenset[str], object] | None = None):
        clean = {}
        for m, c in (terms or {}).items():
            if not isinstance(c, (RationalPoly, RationalFunction)):
                c = RationalPoly._coerce(c)
            if c:
                clean[frozenset(m)] = c
        self.terms: dict[frozenset[str], RationalPoly | RationalFunction] = clean

    @classmethod
    def sign(cls, name: str) -> SignExpr:
        return cls({frozenset([name]): ONE})

    @classmethod
    def lift(cls, x) -> SignExpr:
        if isinstance(x, SignExpr):
            return x
        return cls({EMPTY: x})

    @property
    def signs(self) -> frozenset[str]:
        return frozenset().union(*self.terms) if self.terms else frozenset()

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self) -> bool:
        return bool(self.terms)

    def plain(self):
        """Coefficient ring element when free of signs, else error."""
        if any(self.terms.keys() - {EMPTY}):
            raise SymringError(f"sign indeterminates remain: {sorted(self.signs)}")
        return self.terms.get(EMPTY, ZERO)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SignExpr):
            other = SignExpr.lift(other)
        return self.terms.keys() == other.terms.keys() and all(
            _ring_eq(c, other.terms[m]) for m, c in self.terms.items()
        )

    def __hash__(self) -> int:
        return hash(frozenset(self.terms.items()))

    def __repr__(self) -> str:
        return f"SignExpr({cyclotomic_display(SymExpr(self)) if self._polys() else self.terms})"

    def _polys(self) -> bool:
        return all(isinstance(c, RationalPoly) for c in self.terms.values())

    def __add__(self, other) -> SignExpr:
        other = SignExpr.lift(other)
        t = dict(self.terms)
        for m, c in other.terms.items():
            t[m] = t[m] + c if m in t else c
        return SignExpr(t)

    __radd__ = __add__

    def __neg__(self) -> SignExpr:
        return SignExpr({m: -c for m, c in self.terms.items()})

    def __sub__(self, other) -> SignExpr:
        return self + (-SignExpr.lift(other))

    def __rsub__(self, other) -> SignExpr:
        return SignExpr.lift(other) - self

    def __mul__(self, other) -> SignExpr:
        if not isinstance(other, SignExpr):
            return SignExpr({m: c * other for m, c in self.terms.items()})
        t: dict = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = m1 ^ m2
                c = c1 * c2
                t[m] = t[m] + c if m in t else c
        return SignExpr(t)

    __rmul__ = __mul__

    def map(self, f) -> SignExpr:
        return SignExpr({m: f(c) for m, c in self.terms.items()})

    def substitute(self, values: Mapping[str, int]) -> SignExpr:
        out: dict = {}
        for m, c in self.terms.items():
            missing = [a for a in m if a not in values]
            if missing:
                raise SymringError(f"unassigned sign indeterminate {sorted(missing)[0]}")
            rest = frozenset(a for a in m if values[a] not in (1, -1))
            if rest:
                raise SymringError(f"sign values must be +1 or -1, got {values}")
            s = 1
            for a in m:
                s *= values[a]
            out[EMPTY] = out[EMPTY] + c * s if EMPTY in out else c * s
        return SignExpr(out)


def _ring_eq(a, b) -> bool:
    if type(a) is type(b):
        return a == b
    return RationalFunction._coerce(a) == RationalFunction._coerce(b)


# ---------------------------------------------------------------------------
# SymExpr: SignExpr, possibly split by q mod 4
# ---------------------------------------------------------------------------


class SymExpr:
    """Universal table value: a SignExpr, or a pair indexed by q mod 4 in {1, 3}."""

    __slots__ = ("cases",)

    def __init__(self, value=None, *, cases: Mapping[int, object] | None = None):
        if cases is not None:
            if set(cases) != set(RESIDUES):
                raise SymringError(f"residue split must cover exactly {RESIDUES}, got {sorted(cases)}")
            b1, b3 = (SignExpr.lift(cases[r]) for r in RESIDUES)
            self.cases: dict[int, SignExpr] | SignExpr = b1 if b1 == b3 else {1: b1, 3: b3}
        else:
            self.cases = SignExpr.lift(ZERO if value is None else value)

    @classmethod
    def lift(cls, x) -> SymExpr:
        return x if isinstance(x, SymExpr) else cls(x)

    @classmethod
    def q(cls) -> SymExpr:
        return cls(Q)

    @classmethod
    def sign(cls, name: str) -> SymExpr:
        return cls(SignExpr.sign(name))

    @property
    def is_split(self) -> bool:
        return isinstance(self.cases, dict)

    def branches(self) -> dict[int, SignExpr]:
        return dict(self.cases) if self.is_split else {r: self.cases for r in RESIDUES}

    def branch(self, r: int) -> SignExpr:
        return self.cases[r] if self.is_split else self.cases

    @property
    def signs(self) -> frozenset[str]:
        return frozenset().union(*(b.signs for b in self.branches().values()))

    def is_zero(self) -> bool:
        return all(b.is_zero() for b in self.branches().values())

    def __bool__(self) -> bool:
        return not self.is_zero()

    def __eq__(self, other: object) -> bool:
        other = SymExpr.lift(other)
        if self.is_split != other.is_split:
            return False
        return self.cases == other.cases

    def __hash__(self) -> int:
        if self.is_split:
            return hash((self.cases[1], self.cases[3]))
        return hash(self.cases)

    def __repr__(self) -> str:
        return f"SymExpr({cyclotomic_display(self)})"

    def _zip(self, other, op) -> SymExpr:
        other = SymExpr.lift(other)
        if not self.is_split and not other.is_split:
            return SymExpr(op(self.cases, other.cases))
        return SymExpr(cases={r: op(self.branch(r), other.branch(r)) for r in RESIDUES})

    def __add__(self, other) -> SymExpr:
        return self._zip(other, lambda a, b: a + b)

    __radd__ = __add__

    def __sub__(self, other) -> SymExpr:
        return self._zip(other, lambda a, b: a - b)

    def __rsub__(self, other) -> SymExpr:
        return SymExpr.lift(other) - self

    def __mul__(self, other) -> SymExpr:
        return self._zip(other, lambda a, b: a * b)

    __rmul__ = __mul__

    def __neg__(self) -> SymExpr:
        return self._zip(SymExpr(-1), lambda a, b: a * b)

    def map(self, f) -> SymExpr:
        if self.is_split:
            return SymExpr(cases={r: f(b) for r, b in self.cases.items()})
        return SymExpr(f(self.cases))


# ---------------------------------------------------------------------------
# Sign assignments
# ---------------------------------------------------------------------------


class SignAssignment:
    """Values +1/-1 for sign indeterminates, either global or per residue of q mod 4."""

    __slots__ = ("values",)

    def __init__(self, values: Mapping):
        if values and all(isinstance(k, int) for k in values):
            if set(values) != set(RESIDUES):
                raise SymringError(f"per-residue assignment must cover {RESIDUES}")
            self.values = {r: dict(values[r]) for r in RESIDUES}
            flat = [v for d in self.values.values() for v in d.values()]
        else:
            self.values = dict(values)
            flat = list(self.values.values())
        if any(v not in (1, -1) for v in flat):
            raise SymringError(f"sign values must be +1 or -1: {values}")

    @property
    def per_residue(self) -> bool:
        return bool(self.values) and all(isinstance(k, int) for k in self.values)

    def for_residue(self, r: int) -> dict[str, int]:
        return self.values[r] if self.per_residue else self.values

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SignAssignment):
            return NotImplemented
        return all(self.for_residue(r) == other.for_residue(r) for r in RESIDUES)

    def __repr__(self) -> str:
        return f"SignAssignment({self.values})"


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------


def arith(x, y, op: str) -> SymExpr:
    """Exact add/sub/mul of SymExpr values, or division by a nonzero rational."""
    x = SymExpr.lift(x)
    if op == "add":
        return x + y
    if op == "sub":
        return x - y
    if op == "mul":
        return x * y
    if op == "scalar_div":
        d = Fraction(y)
        if not d:
            raise SymringError("division by zero")
        return x * SymExpr(RationalPoly.const(1 / d))
    raise SymringError(f"unknown op {op!r}")


def substitute(x, s: SignAssignment | Mapping) -> SymExpr:
    """Replace every sign indeterminate by its assigned value."""
    x = SymExpr.lift(x)
    if not isinstance(s, SignAssignment):
        s = SignAssignment(s)
    if not s.per_residue and not x.is_split:
        return SymExpr(x.cases.substitute(s.values))
    return SymExpr(cases={r: x.branch(r).substitute(s.for_residue(r)) for r in RESIDUES})


def _branch_poly(b: SignExpr) -> RationalPoly:
    c = b.plain()
    if isinstance(c, RationalFunction):
        c = c.to_poly()
    return c


def eval_at(x, q0: int) -> Fraction:
    """Exact value at the integer q0 (odd q0 required for residue-split values)."""
    x = SymExpr.lift(x)
    if x.is_split:
        if q0 % 2 == 0:
            raise SymringError(f"even q={q0} against a residue-split value")
        b = x.cases[q0 % 4]
    else:
        b = x.cases
    c = b.plain()
    if isinstance(c, RationalFunction):
        return c.num(q0) / c.den(q0)
    return c(q0)


# -- exact sign decisions -----------------------------------------------------


def _squarefree_odd_part(p: RationalPoly) -> RationalPoly:
    """Product of the factors of p of odd multiplicity (Yun's algorithm)."""
    a = p.monic()
    b = a.derivative()
    c = a.gcd(b)
    w = a.exquo(c)
    y = b.exquo(c) if not c.is_constant() else b / c.lc
    out, i = ONE, 1
    while not w.is_constant():
        z = y - w.derivative()
        g = w.gcd(z)
        if i % 2 == 1:
            out = out * g
        w = w.exquo(g)
        y = z.exquo(g)
        i += 1
    return out


def _sign_at_inf(p: RationalPoly) -> int:
    return (p.lc > 0) - (p.lc < 0)


def _sturm_roots_above(p: RationalPoly, a: Fraction) -> int:
    """Number of distinct real roots of squarefree p in the open interval (a, inf)."""
    seq = [p, p.derivative()]
    while seq[-1] and not seq[-1].is_constant():
        seq.append(-(seq[-2] % seq[-1]))
    seq = [s for s in seq if s]

    def changes(signs):
        signs = [s for s in signs if s]
        return sum(1 for u, v in zip(signs, signs[1:]) if u != v)

    at_a = [(v > 0) - (v < 0) for v in (s(a) for s in seq)]
    at_inf = [_sign_at_inf(s) for s in seq]
    # a root exactly at a is not counted: its sign drops out of at_a
    return changes(at_a) - changes(at_inf)


def _nonneg_poly(p: RationalPoly, q_min: Fraction) -> bool:
    if not p:
        return True
    shifted = p.compose_linear(1, q_min)
    if all(c >= 0 for c in shifted.coefficients.values()):
        return True
    if p.lc < 0 or p(q_min) < 0:
        return False
    odd = _squarefree_odd_part(p)
    if odd.is_constant():
        return True
    return _sturm_roots_above(odd, Fraction(q_min)) == 0


def _first_in_residue(q_min: int, r: int) -> int:
    q0 = q_min
    while q0 % 4 != r:
        q0 += 1
    return q0


def check_nonneg(x, q_min: int, residue: int | None = None) -> bool:
    """True iff every branch is >= 0 for every real q >= q_min.

    A residue-split branch r starts at the smallest integer >= q_min that is
    congruent to r mod 4, since it only describes such q.  With ``residue``
    only that branch is checked, on the same range.
    """
    x = SymExpr.lift(x)
    if residue is not None:
        return _nonneg_poly(_branch_poly(x.branch(residue)), Fraction(_first_in_residue(q_min, residue)))
    if not x.is_split:
        return _nonneg_poly(_branch_poly(x.cases), Fraction(q_min))
    return all(
        _nonneg_poly(_branch_poly(b), Fraction(_first_in_residue(q_min, r)))
        for r, b in x.cases.items()
    )


def _integer_valued(p: RationalPoly) -> bool:
    # integer-valued on Z iff all forward differences at 0 are integers
    vals = [p(t) for t in range(p.degree + 1)] if p else []
    while vals:
        if any(v.denominator != 1 for v in vals):
            return False
        vals = [b - a for a, b in zip(vals, vals[1:])]
    return True


def check_integral(x, residue: int | None = None) -> bool:
    """True iff each branch is an integer at every q in its residue class mod 4.

    Uses q = 4t + r and tests integer-valuedness in t exactly (binomial basis).
    """
    x = SymExpr.lift(x)
    branches = x.branches()
    if residue is not None:
        branches = {residue: branches[residue]}
    return all(_integer_valued(_branch_poly(b).compose_linear(4, r)) for r, b in branches.items())


# ---------------------------------------------------------------------------
# Display
# ---------------------------------------------------------------------------


def _frac_str(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def _term_str(coef: Fraction, mono: frozenset[str], deg: int) -> str:
    parts = sorted(mono)
    if deg:
        parts.append("q" if deg == 1 else f"q^{deg}")
    a = abs(coef)
    if not parts:
        body = _frac_str(a)
    elif a == 1:
        body = "*".join(parts)
    else:
        body = "*".join([_frac_str(a)] + parts)
    return ("-" if coef < 0 else "+") + body


def _expanded(terms: Mapping[frozenset[str], RationalPoly]) -> str:
    """Expanded sum, by q-degree descending, sign monomials before plain terms."""
    items = []
    for m, p in terms.items():
        for d, c in p.coefficients.items():
            items.append((-d, 0 if m else 1, _mono_key(m), c, m, d))
    items.sort(key=lambda t: t[:3])
    s = "".join(_term_str(c, m, d) for *_, c, m, d in items)
    return s[1:] if s.startswith("+") else s


def _poly_str(p: RationalPoly) -> str:
    return _expanded({EMPTY: p}) if p else ""


def _factor_cyclotomic(p: RationalPoly) -> tuple[int, dict[int, int], RationalPoly]:
    """Split a primitive polynomial into q**k, cyclotomic powers and a residual."""
    k = p.valuation()
    r = RationalPoly._raw(p._c[k:])
    exps: dict[int, int] = {}
    for n in CYCLOTOMIC_INDICES:
        phi = cyclotomic(n)
        while r.degree >= phi.degree:
            quo, rem = divmod(r, phi)
            if rem:
                break
            r = quo
            exps[n] = exps.get(n, 0) + 1
    return k, exps, r


def _factors_str(k: int, exps: Mapping[int, int]) -> str:
    s = "" if not k else ("q" if k == 1 else f"q^{k}")
    for n in sorted(exps):
        s += f"P{n}" + (f"^{exps[n]}" if exps[n] > 1 else "")
    return s


def _product_str(coef: Fraction, poly: RationalPoly, signs: str = "", tail: str = "") -> str:
    """coef * signs * poly * tail, with poly primitive and shown factored."""
    k, exps, res = _factor_cyclotomic(poly)
    resid = "" if res == ONE else _poly_str(res)
    chunks = [c for c in (signs, _factors_str(k, exps)) if c]
    if resid:
        chunks.append(resid if not chunks and not tail and coef == 1 else f"({resid})")
    if tail:
        chunks.append(tail)
    if not chunks:
        return _frac_str(coef)
    body = "*".join(chunks)
    if coef == 1:
        return body
    if coef == -1:
        return "-" + body
    return f"{_frac_str(coef)}*{body}"


def _sign_display(b: SignExpr) -> str:
    terms = {m: _branch_poly(SignExpr.lift(c)) for m, c in b.terms.items()}
    if not terms:
        return "."
    if set(terms) == {EMPTY}:
        p = terms[EMPTY]
        c = p.content()
        return _product_str(c, p / c)
    g = reduce(lambda a, p: a.gcd(p), terms.values(), ZERO)
    g = g / g.content()
    inner = {m: p.exquo(g) for m, p in terms.items()}
    nz = [c for p in inner.values() for c in p.coefficients.values()]
    cont = Fraction(abs(reduce(gcd, (c.numerator for c in nz))), reduce(lcm, (c.denominator for c in nz)))
    inner = {m: p / cont for m, p in inner.items()}
    if len(inner) == 1 and len(next(iter(inner.values())).coefficients) == 1:
        # a single signed monomial: keep it outside any parentheses
        (m, p), = inner.items()
        (d, c), = p.coefficients.items()
        return _product_str(cont * c, g * RationalPoly.monomial(d), signs="*".join(sorted(m)))
    return _product_str(cont, g, tail=f"({_expanded(inner)})")


def cyclotomic_display(x) -> str:
    """Compact factored form: q-power, P1..P6 powers, residual expanded; '.' for zero."""
    x = SymExpr.lift(x)
    if not x.is_split:
        return _sign_display(x.cases)
    return "{" + ";".join(f"{r}:{_sign_display(b)}" for r, b in x.cases.items()) + "}"


# ---------------------------------------------------------------------------
# Parsing the display format back
# ---------------------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(\d+)|(q)|P(\d)|(a\d+)|(\^)|(\*)|(/)|(\+)|(-)|(\()|(\)))")


def parse_display(s: str) -> SymExpr:
    """Inverse of :func:`cyclotomic_display` (also accepts any product/sum of its atoms)."""
    s = s.strip()
    if s == ".":
        return SymExpr()
    if s.startswith("{"):
        cases = {}
        for part in s[1:-1].split(";"):
            r, body = part.split(":", 1)
            cases[int(r)] = parse_display(body).cases
        return SymExpr(cases=cases)
    toks = []
    pos = 0
    while pos < len(s):
        m = _TOKEN.match(s, pos)
        if not m or m.end() == pos:
            raise SymringError(f"cannot parse {s!r} at {pos}")
        pos = m.end()
        kind = m.lastindex
        toks.append((kind, m.group(kind)))
    val, i = _parse_sum(toks, 0)
    if i != len(toks):
        raise SymringError(f"trailing input in {s!r}")
    return SymExpr(val)


def _parse_sum(toks, i):
    acc = SignExpr()
    sign = 1
    if i < len(toks) and toks[i][0] in (8, 9):
        sign = -1 if toks[i][0] == 9 else 1
        i += 1
    while True:
        term, i = _parse_product(toks, i)
        acc = acc + term * sign
        if i < len(toks) and toks[i][0] in (8, 9):
            sign = -1 if toks[i][0] == 9 else 1
            i += 1
        else:
            return acc, i


def _parse_product(toks, i):
    acc = SignExpr.lift(ONE)
    first = True
    while i < len(toks):
        kind = toks[i][0]
        if kind == 6:
            i += 1
            continue
        if kind == 7:
            den, i = _parse_atom(toks, i + 1)
            acc = acc * SignExpr.lift(RationalPoly.const(1 / den.plain().constant_value()))
            continue
        if kind not in (1, 2, 3, 4, 10):
            break
        atom, i = _parse_atom(toks, i)
        acc = atom if first else acc * atom
        first = False
    return acc, i


def _parse_atom(toks, i):
    kind, text = toks[i]
    if kind == 1:
        val = SignExpr.lift(RationalPoly.const(int(text)))
        i += 1
    elif kind == 2:
        val = SignExpr.lift(Q)
        i += 1
    elif kind == 3:
        val = SignExpr.lift(cyclotomic(int(text)))
        i += 1
    elif kind == 4:
        val = SignExpr.sign(text)
        i += 1
    elif kind == 10:
        val, i = _parse_sum(toks, i + 1)
        if i >= len(toks) or toks[i][0] != 11:
            raise SymringError("unbalanced parentheses")
        i += 1
    else:
        raise SymringError(f"unexpected token {text!r}")
    if i < len(toks) and toks[i][0] == 5:
        e = int(toks[i + 1][1])
        out = SignExpr.lift(ONE)
        for _ in range(e):
            out = out * val
        val = out
        i += 2
    return val, i


# ---------------------------------------------------------------------------
# JSON
# ---------------------------------------------------------------------------


def poly_to_json(p: RationalPoly) -> list:
    return [[d, f"{c.numerator}/{c.denominator}"] for d, c in p.coefficients.items()]


def poly_from_json(data: list) -> RationalPoly:
    return RationalPoly.from_dict({int(d): Fraction(c) for d, c in data})


def _sign_to_json(b: SignExpr) -> list:
    items = sorted(b.terms.items(), key=lambda kv: _mono_key(kv[0]))
    return [[sorted(m), poly_to_json(_branch_poly(SignExpr.lift(c)))] for m, c in items]


def _sign_from_json(data: list) -> SignExpr:
    return SignExpr({frozenset(m): poly_from_json(p) for m, p in data})


def to_json(x) -> list | dict:
    x = SymExpr.lift(x)
    if x.is_split:
        return {"cases": {str(r): _sign_to_json(b) for r, b in x.cases.items()}}
    return _sign_to_json(x.cases)


def from_json(data) -> SymExpr:
    if isinstance(data, dict):
        return SymExpr(cases={int(r): _sign_from_json(v) for r, v in data["cases"].items()})
    return SymExpr(_sign_from_json(data))
