"""Restricted Farey sets S_Q over F_q[t]^n and the closeness count M(Q, N)."""
from __future__ import annotations

import csv
import io
import itertools
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .gfpoly import ONE, FieldConfig, Poly
from .laurent import expansion_key

FULL, KPOWER, EXPLICIT = "full", "kpower", "explicit"


@dataclass(frozen=True)
class ModuliFamily:
    """Which denominator tuples are allowed.

    ``full``: every monic n-tuple.  ``kpower``: coordinatewise k-th powers of
    monic n-tuples, with Q bounding the degree of the lcm of the *base* tuple.
    ``explicit``: a fixed list of monic tuples, Q bounding the lcm of the moduli.
    """

    kind: str = FULL
    n: int = 1
    k: int = 1
    moduli: tuple = field(default=(), compare=True)

    def __post_init__(self):
        if self.kind not in (FULL, KPOWER, EXPLICIT):
            raise ValueError(f"unknown family kind {self.kind!r}")
        if self.n < 1:
            raise ValueError("dimension n must be >= 1")
        if self.k < 1:
            raise ValueError("power k must be >= 1")
        if self.kind == KPOWER and self.k == 1:
            object.__setattr__(self, "kind", FULL)
        if self.kind == EXPLICIT:
            mods = tuple(tuple(tuple(f) for f in tup) for tup in self.moduli)
            for tup in mods:
                if len(tup) != self.n:
                    raise ValueError(f"explicit modulus {tup} does not have {self.n} coordinates")
                if any(not f or f[-1] != 1 for f in tup):
                    raise ValueError(f"explicit modulus {tup} is not monic")
            object.__setattr__(self, "moduli", mods)

    @classmethod
    def full(cls, n: int = 1) -> "ModuliFamily":
        return cls(FULL, n)

    @classmethod
    def kth_power(cls, k: int, n: int = 1) -> "ModuliFamily":
        return cls(KPOWER, n, k)

    @classmethod
    def explicit(cls, moduli: Iterable[Sequence[Poly]]) -> "ModuliFamily":
        mods = tuple(tuple(tuple(f) for f in tup) for tup in moduli)
        if not mods:
            raise ValueError("explicit family needs at least one modulus tuple")
        return cls(EXPLICIT, len(mods[0]), 1, mods)

    @property
    def power(self) -> int:
        return self.k if self.kind == KPOWER else 1

    def label(self) -> str:
        return {FULL: "full", KPOWER: f"kpower({self.k})", EXPLICIT: "explicit"}[self.kind]


@dataclass(frozen=True)
class Modulus:
    f: tuple  # the moduli f_i (k-th powers for kpower families)
    base: tuple  # base tuple; equal to f unless the family is kpower
    lcm_degree: int  # deg lcm(f_1, ..., f_n), the order of the characters


@dataclass(frozen=True)
class FareyPoint:
    r: tuple
    f: tuple
    base: tuple
    lcm_degree: int

    @property
    def n(self) -> int:
        return len(self.f)

    @property
    def pairs(self) -> tuple:
        return tuple(zip(self.r, self.f))

    def is_zero(self) -> bool:
        return all(fi == ONE for fi in self.f)


def enumerate_moduli(family: ModuliFamily, Q: int, cfg: FieldConfig) -> list[Modulus]:
    if Q < 0:
        raise ValueError("Q must be non-negative")
    R = cfg.ring
    if family.kind == EXPLICIT:
        out = []
        for tup in family.moduli:
            d = len(R.lcm_many(tup)) - 1
            if d <= Q:
                out.append(Modulus(tup, tup, d))
        return out
    k = family.power
    monics = R.enumerate_monic_upto(Q)
    out = []
    for base in itertools.product(monics, repeat=family.n):
        d = len(R.lcm_many(base)) - 1
        if d > Q:
            continue
        f = base if k == 1 else tuple(R.pow(b, k) for b in base)
        out.append(Modulus(f, base, k * d))
    return out


def farey_set(family: ModuliFamily, Q: int, cfg: FieldConfig) -> list[FareyPoint]:
    """S_Q: every reduced r/f with f from the family, deg r_i < deg f_i."""
    R = cfg.ring
    points = []
    for mod in enumerate_moduli(family, Q, cfg):
        residues = [R.units(fi) for fi in mod.f]
        for r in itertools.product(*residues):
            points.append(FareyPoint(r, mod.f, mod.base, mod.lcm_degree))
    return points


def close_pair(x: FareyPoint, y: FareyPoint, N: int, cfg: FieldConfig) -> bool:
    """||y - x|| <= q^-N, decided coordinatewise on cross differences."""
    if x.n != y.n:
        raise ValueError("dimension mismatch")
    R = cfg.ring
    for r, f, rt, ft in zip(x.r, x.f, y.r, y.f):
        c = R.sub(R.mul(rt, f), R.mul(r, ft))
        if c and len(c) - 1 > (len(f) - 1) + (len(ft) - 1) - N:
            return False
    return True


def point_keys(points: Sequence[FareyPoint], depth: int, cfg: FieldConfig) -> list[tuple]:
    """Concatenated expansion coefficients c_1..c_depth of every coordinate."""
    if depth <= 0:
        return [()] * len(points)
    cache: dict = {}
    out = []
    for x in points:
        key = ()
        for pair in x.pairs:
            part = cache.get(pair)
            if part is None:
                part = cache[pair] = expansion_key(pair[0], pair[1], depth, cfg)
            key += part
        out.append(key)
    return out


def closeness_counts(points: Sequence[FareyPoint], N: int, cfg: FieldConfig, method: str = "bucket") -> list[int]:
    """#{y in points : close_pair(x, y, N)} for every x.

    ``bucket`` groups points by expansion coefficients c_1..c_{N-1}: for
    proper fractions ||x - y|| <= q^-N exactly when those agree.  ``pairs``
    is the quadratic double loop over ``close_pair``.
    """
    if method == "pairs":
        return [sum(close_pair(x, y, N, cfg) for y in points) for x in points]
    if method != "bucket":
        raise ValueError(f"unknown method {method!r}")
    keys = point_keys(points, N - 1, cfg)
    sizes = Counter(keys)
    return [sizes[k] for k in keys]


def count_m(family_or_points, Q: int | None, N: int, cfg: FieldConfig, method: str = "bucket") -> tuple[int, int]:
    """M(Q, N) and the index of the first point attaining it.

    Accepts either a ModuliFamily (with Q) or an already enumerated S_Q.
    """
    if isinstance(family_or_points, ModuliFamily):
        points = farey_set(family_or_points, Q, cfg)
    else:
        points = family_or_points
    counts = closeness_counts(points, N, cfg, method)
    best = max(counts)
    return best, counts.index(best)


def farey_csv(points: Sequence[FareyPoint], counts: Sequence[int] | None, cfg: FieldConfig) -> str:
    """CSV rows: index, f, r, lcm_degree, count (``;`` separates coordinates)."""
    R = cfg.ring
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["index", "f", "r", "lcm_degree", "count"])
    for i, x in enumerate(points):
        w.writerow([
            i,
            ";".join(R.format(f) for f in x.f),
            ";".join(R.format(r) for r in x.r),
            x.lcm_degree,
            "" if counts is None else counts[i],
        ])
    return buf.getvalue()
