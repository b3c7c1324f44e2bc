"""Exact arithmetic in F_q = F_p[a]/(h) and in the polynomial ring F_q[t].

Field elements are encoded as integers in ``[0, q)``: the element with
coordinates ``(c_0, ..., c_{m-1})`` with respect to the basis
``1, a, ..., a^{m-1}`` has code ``c_0 + c_1 p + ... + c_{m-1} p^{m-1}``.
Codes of the prime subfield F_p are ``0, ..., p-1``.

Polynomials in F_q[t] are tuples of field codes, little-endian (index ``i``
holds the coefficient of ``t^i``), with no trailing zero.  The zero
polynomial is ``()`` and its degree is ``NEG_INF``.
"""
from __future__ import annotations

import itertools
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Iterable, Sequence

import numpy as np

Poly = tuple  # tuple[int, ...]

NEG_INF = float("-inf")
ZERO: Poly = ()
ONE: Poly = (1,)
T: Poly = (0, 1)


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


class FieldConfig:
    """The finite field F_q with q = p^m, built from a monic irreducible h.

    When ``h`` is omitted the first monic irreducible of degree ``m`` in the
    canonical enumeration order is used, so reports are reproducible.
    ``h`` is a little-endian coefficient list over F_p including the leading 1.
    """

    MAX_ORDER = 1024

    def __init__(self, p: int, m: int = 1, h: Sequence[int] | None = None):
        if not is_prime(p):
            raise ValueError(f"characteristic {p} is not prime")
        if m < 1:
            raise ValueError("extension degree m must be >= 1")
        if p**m > self.MAX_ORDER:
            raise ValueError(f"field order {p}^{m} exceeds desk-scale limit {self.MAX_ORDER}")
        self.p = p
        self.m = m
        self.q = p**m
        if m == 1:
            # every monic linear h gives F_p itself with basis {1}
            h = (0, 1) if h is None else tuple(int(c) % p for c in h)
            if len(h) != 2 or h[-1] != 1:
                raise ValueError("h must be monic of degree m")
            self.h = h
        else:
            base = PolyRing(FieldConfig(p))
            if h is None:
                h = next(g for g in base.enumerate_monic(m) if base.is_irreducible(g))
            else:
                h = base.normalize(int(c) % p for c in h)
                if len(h) != m + 1 or h[-1] != 1:
                    raise ValueError("h must be monic of degree m")
                if not base.is_irreducible(h):
                    raise ValueError(f"h = {list(h)} is reducible over F_{p}")
            self.h = tuple(h)
        self._build_tables()

    def __repr__(self) -> str:
        return f"FieldConfig(p={self.p}, m={self.m}, h={list(self.h)})"

    def __eq__(self, other) -> bool:
        return isinstance(other, FieldConfig) and (self.p, self.m, self.h) == (other.p, other.m, other.h)

    def __hash__(self) -> int:
        return hash((self.p, self.m, self.h))

    # -- element coordinates -------------------------------------------------

    def coords(self, a: int) -> tuple[int, ...]:
        out = []
        for _ in range(self.m):
            a, c = divmod(a, self.p)
            out.append(c)
        return tuple(out)

    def from_coords(self, coords: Sequence[int]) -> int:
        if len(coords) != self.m:
            raise ValueError(f"expected {self.m} coordinates, got {len(coords)}")
        code = 0
        for c in reversed(coords):
            if not 0 <= c < self.p:
                raise ValueError(f"coordinate {c} not reduced mod {self.p}")
            code = code * self.p + c
        return code

    def _code(self, x) -> int:
        if isinstance(x, (int, np.integer)):
            if not 0 <= x < self.q:
                raise ValueError(f"element code {x} outside [0, {self.q})")
            return int(x)
        return self.from_coords(tuple(x))

    # -- tables --------------------------------------------------------------

    def _mul_coords(self, a: tuple[int, ...], b: tuple[int, ...]) -> tuple[int, ...]:
        p, m, h = self.p, self.m, self.h
        prod = [0] * (2 * m - 1)
        for i, ai in enumerate(a):
            if ai:
                for j, bj in enumerate(b):
                    prod[i + j] = (prod[i + j] + ai * bj) % p
        for k in range(2 * m - 2, m - 1, -1):
            c = prod[k]
            if c:
                # h monic: a^m = -(h_0 + ... + h_{m-1} a^{m-1})
                for j in range(m):
                    prod[k - m + j] = (prod[k - m + j] - c * h[j]) % p
                prod[k] = 0
        return tuple(prod[:m])

    def _build_tables(self) -> None:
        q, p = self.q, self.p
        coords = [self.coords(a) for a in range(q)]
        add = np.empty((q, q), dtype=np.int64)
        mul = np.empty((q, q), dtype=np.int64)
        for a in range(q):
            ca = coords[a]
            for b in range(q):
                cb = coords[b]
                add[a, b] = self.from_coords(tuple((x + y) % p for x, y in zip(ca, cb)))
                mul[a, b] = self.from_coords(self._mul_coords(ca, cb)) if b >= a else mul[b, a]
        neg = np.array([self.from_coords(tuple((-c) % p for c in coords[a])) for a in range(q)])
        inv = np.zeros(q, dtype=np.int64)
        for a in range(1, q):
            inv[a] = int(np.nonzero(mul[a] == 1)[0][0])
        self.add_table, self.mul_table, self.neg_table, self.inv_table = add, mul, neg, inv
        # plain lists are faster than numpy scalars in the polynomial loops
        self._add = add.tolist()
        self._mul = mul.tolist()
        self._neg = neg.tolist()
        self._inv = inv.tolist()
        tr = []
        for a in range(q):
            s, x = 0, a
            for _ in range(self.m):
                s = self._add[s][x]
                x = self._pow(x, p)
            tr.append(s)
        if any(t >= p for t in tr):
            raise ArithmeticError("trace left the prime subfield; modulus is not irreducible")
        self.trace_table = np.array(tr, dtype=np.int64)
        self._trace = tr
        # trace of the product; drives every character evaluation
        self.trmul_table = self.trace_table[self.mul_table]

    def _pow(self, x: int, e: int) -> int:
        r = 1
        while e:
            if e & 1:
                r = self._mul[r][x]
            x = self._mul[x][x]
            e >>= 1
        return r

    # -- element arithmetic --------------------------------------------------

    def add(self, a: int, b: int) -> int:
        return self._add[a][b]

    def sub(self, a: int, b: int) -> int:
        return self._add[a][self._neg[b]]

    def neg(self, a: int) -> int:
        return self._neg[a]

    def mul(self, a: int, b: int) -> int:
        return self._mul[a][b]

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("inverse of zero in F_q")
        return self._inv[a]

    def pow(self, a: int, e: int) -> int:
        return self._pow(a, e)

    def trace(self, x) -> int:
        return self._trace[self._code(x)]

    def format_element(self, a: int) -> str:
        if self.m == 1:
            return str(a)
        terms = []
        for i, c in reversed(list(enumerate(self.coords(a)))):
            if c == 0:
                continue
            mono = "" if i == 0 else ("a" if i == 1 else f"a^{i}")
            coef = str(c) if (c != 1 or i == 0) else ""
            terms.append(coef + mono)
        return "+".join(terms) if terms else "0"

    @cached_property
    def ring(self) -> "PolyRing":
        return PolyRing(self)


def trace(x, cfg: FieldConfig) -> int:
    """Absolute trace F_q -> F_p, returned as an integer in [0, p).

    ``x`` is a field code or a length-m coordinate vector.
    """
    return cfg.trace(x)


class PolyRing:
    """Arithmetic on little-endian coefficient tuples over a fixed F_q."""

    def __init__(self, field: FieldConfig):
        self.F = field
        self.q = field.q

    def normalize(self, coeffs: Iterable[int]) -> Poly:
        c = list(coeffs)
        while c and c[-1] == 0:
            c.pop()
        return tuple(c)

    @staticmethod
    def deg(a: Poly):
        return len(a) - 1 if a else NEG_INF

    def abs(self, a: Poly) -> int:
        """|a|_inf = q^deg a, and 0 for the zero polynomial."""
        return self.q ** (len(a) - 1) if a else 0

    def is_monic(self, a: Poly) -> bool:
        return bool(a) and a[-1] == 1

    def monic(self, a: Poly) -> Poly:
        if not a:
            return a
        return self.scale(a, self.F.inv(a[-1]))

    def scale(self, a: Poly, c: int) -> Poly:
        if c == 0:
            return ZERO
        mul = self.F._mul[c]
        return tuple(mul[x] for x in a)

    def add(self, a: Poly, b: Poly) -> Poly:
        if len(a) < len(b):
            a, b = b, a
        add = self.F._add
        out = list(a)
        for i, y in enumerate(b):
            out[i] = add[out[i]][y]
        return self.normalize(out)

    def neg(self, a: Poly) -> Poly:
        neg = self.F._neg
        return tuple(neg[x] for x in a)

    def sub(self, a: Poly, b: Poly) -> Poly:
        return self.add(a, self.neg(b))

    def mul(self, a: Poly, b: Poly) -> Poly:
        if not a or not b:
            return ZERO
        add, mul = self.F._add, self.F._mul
        out = [0] * (len(a) + len(b) - 1)
        for i, x in enumerate(a):
            if x:
                row = mul[x]
                for j, y in enumerate(b):
                    out[i + j] = add[out[i + j]][row[y]]
        return self.normalize(out)

    def shift(self, a: Poly, k: int) -> Poly:
        """Multiply by t^k (k >= 0)."""
        return (0,) * k + a if a else ZERO

    def pow(self, a: Poly, e: int) -> Poly:
        r = ONE
        while e:
            if e & 1:
                r = self.mul(r, a)
            a = self.mul(a, a)
            e >>= 1
        return r

    def divmod(self, a: Poly, b: Poly) -> tuple[Poly, Poly]:
        if not b:
            raise ZeroDivisionError("polynomial division by zero")
        F = self.F
        add, mul, neg = F._add, F._mul, F._neg
        db = len(b) - 1
        if len(a) <= db:
            return ZERO, a
        rem = list(a)
        quot = [0] * (len(a) - db)
        lead_inv = F._inv[b[-1]]
        for k in range(len(a) - 1, db - 1, -1):
            c = rem[k]
            if c == 0:
                continue
            c = mul[c][lead_inv]
            quot[k - db] = c
            nc = neg[c]
            row = mul[nc]
            for j in range(db + 1):
                rem[k - db + j] = add[rem[k - db + j]][row[b[j]]]
        return self.normalize(quot), self.normalize(rem[:db])

    def mod(self, a: Poly, b: Poly) -> Poly:
        return self.divmod(a, b)[1]

    def gcd(self, a: Poly, b: Poly) -> Poly:
        """Monic generator of the ideal (a, b); gcd(0, 0) = 0."""
        while b:
            a, b = b, self.mod(a, b)
        return self.monic(a)

    def lcm(self, a: Poly, b: Poly) -> Poly:
        if not a or not b:
            raise ValueError("lcm with the zero polynomial is undefined")
        g = self.gcd(a, b)
        return self.monic(self.mul(self.divmod(a, g)[0], b))

    def lcm_many(self, polys: Iterable[Poly]) -> Poly:
        out = ONE
        for f in polys:
            out = self.lcm(out, f)
        return out

    # -- enumeration ---------------------------------------------------------

    def enumerate_monic(self, d: int) -> list[Poly]:
        """All q^d monic polynomials of degree d, coefficient vectors counted
        little-endian (the constant coefficient varies fastest)."""
        if d < 0:
            raise ValueError("degree must be non-negative")
        return [tuple(reversed(digits)) + (1,) for digits in itertools.product(range(self.q), repeat=d)]

    def enumerate_monic_upto(self, d: int) -> list[Poly]:
        return [f for e in range(d + 1) for f in self.enumerate_monic(e)]

    def enumerate_below(self, d: int) -> list[Poly]:
        """All polynomials of degree < d (including zero), ordered by code."""
        return [self.from_code(c) for c in range(self.q**d)]

    def to_code(self, a: Poly) -> int:
        code = 0
        for c in reversed(a):
            code = code * self.q + c
        return code

    def from_code(self, code: int) -> Poly:
        out = []
        while code:
            code, c = divmod(code, self.q)
            out.append(c)
        return tuple(out)

    # -- factorization -------------------------------------------------------

    def is_irreducible(self, f: Poly) -> bool:
        d = self.deg(f)
        if d < 1:
            return False
        for e in range(1, d // 2 + 1):
            for g in self.enumerate_monic(e):
                if not self.mod(f, g):
                    return False
        return True

    def distinct_irreducible_factors(self, f: Poly) -> list[Poly]:
        """Monic irreducible divisors of f, by trial division in degree order."""
        if not f:
            raise ValueError("zero polynomial has no factorization")
        f = self.monic(f)
        out = []
        e = 1
        while self.deg(f) >= 2 * e:
            for g in self.enumerate_monic(e):
                quo, rem = self.divmod(f, g)
                if rem:
                    continue
                out.append(g)
                f = quo
                while True:
                    quo, rem = self.divmod(f, g)
                    if rem:
                        break
                    f = quo
            e += 1
        if self.deg(f) >= 1:
            out.append(f)
        return sorted(out, key=lambda g: (len(g), tuple(reversed(g))))

    def euler_phi(self, f: Poly) -> int:
        """Number of residues r with deg r < deg f and gcd(r, f) = 1."""
        if not f:
            raise ValueError("euler_phi of the zero polynomial")
        if not self.is_monic(f):
            raise ValueError("euler_phi expects a monic polynomial")
        val = Fraction(self.q ** (len(f) - 1))
        for P in self.distinct_irreducible_factors(f):
            val *= 1 - Fraction(1, self.q ** (len(P) - 1))
        assert val.denominator == 1
        return int(val)

    def units(self, f: Poly) -> list[Poly]:
        """Residues coprime to f of degree < deg f, in code order."""
        return _units(self, f)

    # -- display -------------------------------------------------------------

    def format(self, a: Poly, var: str = "t") -> str:
        if not a:
            return "0"
        terms = []
        for i in range(len(a) - 1, -1, -1):
            c = a[i]
            if c == 0:
                continue
            cs = self.F.format_element(c)
            if self.F.m > 1 and "+" in cs:
                cs = f"({cs})"
            mono = "" if i == 0 else (var if i == 1 else f"{var}^{i}")
            if i > 0 and cs == "1":
                cs = ""
            terms.append(cs + mono)
        return "+".join(terms)


@lru_cache(maxsize=None)
def _units(ring: PolyRing, f: Poly) -> list[Poly]:
    d = len(f) - 1
    return [r for r in ring.enumerate_below(d) if ring.gcd(r, f) == ONE]


def enumerate_monic(d: int, cfg: FieldConfig) -> list[Poly]:
    return cfg.ring.enumerate_monic(d)


def euler_phi(f: Poly, cfg: FieldConfig) -> int:
    return cfg.ring.euler_phi(f)
