"""Slow, independent reference implementations used only by the tests.

Nothing here imports the package's arithmetic: field elements are
coordinate lists reduced by hand, polynomials are plain lists.
"""
from __future__ import annotations

import cmath
import itertools
from fractions import Fraction


class NaiveField:
    def __init__(self, p, h):
        self.p, self.h = p, list(h)
        self.m = len(h) - 1
        self.q = p**self.m

    def elems(self):
        return list(range(self.q))

    def vec(self, a):
        out = []
        for _ in range(self.m):
            a, c = divmod(a, self.p)
            out.append(c)
        return out

    def code(self, v):
        return sum(c * self.p**i for i, c in enumerate(v))

    def add(self, a, b):
        return self.code([(x + y) % self.p for x, y in zip(self.vec(a), self.vec(b))])

    def neg(self, a):
        return self.code([(-x) % self.p for x in self.vec(a)])

    def mul(self, a, b):
        va, vb, p, m = self.vec(a), self.vec(b), self.p, self.m
        prod = [0] * (2 * m)
        for i in range(m):
            for j in range(m):
                prod[i + j] += va[i] * vb[j]
        # reduce x^k for k >= m using x^m = -(h_0 + ... + h_{m-1} x^{m-1})
        for k in range(2 * m - 1, m - 1, -1):
            c = prod[k] % p
            prod[k] = 0
            for j in range(m):
                prod[k - m + j] -= c * self.h[j]
        return self.code([c % p for c in prod[:m]])

    def pow(self, a, e):
        r = 1
        for _ in range(e):
            r = self.mul(r, a)
        return r

    def trace(self, a):
        s, x = 0, a
        for _ in range(self.m):
            s = self.add(s, x)
            x = self.pow(x, self.p)
        assert s < self.p
        return s


class NaivePoly:
    """Polynomials as little-endian lists over a NaiveField."""

    def __init__(self, F: NaiveField):
        self.F = F

    def norm(self, a):
        a = list(a)
        while a and a[-1] == 0:
            a.pop()
        return a

    def add(self, a, b):
        n = max(len(a), len(b))
        a, b = list(a) + [0] * (n - len(a)), list(b) + [0] * (n - len(b))
        return self.norm([self.F.add(x, y) for x, y in zip(a, b)])

    def neg(self, a):
        return [self.F.neg(x) for x in a]

    def sub(self, a, b):
        return self.add(a, self.neg(b))

    def mul(self, a, b):
        if not a or not b:
            return []
        out = [0] * (len(a) + len(b) - 1)
        for i, x in enumerate(a):
            for j, y in enumerate(b):
                out[i + j] = self.F.add(out[i + j], self.F.mul(x, y))
        return self.norm(out)

    def divmod(self, a, b):
        """b monic."""
        a = self.norm(a)
        quot = [0] * max(0, len(a) - len(b) + 1)
        while len(a) >= len(b):
            c, shift = a[-1], len(a) - len(b)
            quot[shift] = c
            a = self.sub(a, [0] * shift + [self.F.mul(c, x) for x in b])
        return self.norm(quot), a

    def all_below(self, d):
        return [self.norm(c) for c in itertools.product(range(self.F.q), repeat=d)]

    def monic_of_degree(self, d):
        return [list(c) + [1] for c in itertools.product(range(self.F.q), repeat=d)]

    def is_unit_mod(self, r, f):
        # r is a unit mod f iff r * s = 1 mod f for some s
        d = len(f) - 1
        if d == 0:
            return True
        return any(self.divmod(self.mul(r, s), f)[1] == [1] for s in self.all_below(d))


def brute_c1(Pr: NaivePoly, r, f):
    """Coefficient of t^-1 in r/f for monic f: coefficient of t^{deg f - 1} in r mod f."""
    s = Pr.divmod(r, f)[1]
    d = len(f) - 1
    return s[d - 1] if len(s) == d and d >= 1 else 0


def brute_char_sum(Pr: NaivePoly, x, N):
    """sum_{g in ball} e(g . x), x a list of (r, f) pairs; returns (exponent counts, complex)."""
    F = Pr.F
    counts = [0] * F.p
    polys = Pr.all_below(N + 1)
    for g in itertools.product(polys, repeat=len(x)):
        e = 0
        for gi, (r, f) in zip(g, x):
            e += F.trace(brute_c1(Pr, Pr.mul(gi, r), f))
        counts[e % F.p] += 1
    z = sum(c * cmath.exp(2j * cmath.pi * k / F.p) for k, c in enumerate(counts))
    return counts, z


def brute_norm(Pr: NaivePoly, r, f):
    s = Pr.divmod(r, f)[1]
    if not s:
        return Fraction(0)
    return Fraction(1, Pr.F.q ** (len(f) - len(s)))
