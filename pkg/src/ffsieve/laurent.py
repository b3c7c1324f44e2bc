"""Truncated Laurent expansions at infinity, additive characters, torus norm.

A rational function is always passed as ``(r, f)`` with ``f`` monic.  Its
fractional part is ``sum_{j>=1} c_j t^{-j}``; the additive character is
``e(r/f) = E(c_1)`` with ``E(x) = exp(2 pi i Tr(x) / p)``.  Character values
are kept as exact exponents mod p.
"""
from __future__ import annotations

import cmath
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .gfpoly import FieldConfig, Poly


@dataclass(frozen=True)
class FracExpansion:
    depth: int
    coeffs: tuple[int, ...]  # coeffs[j-1] is c_j, a field code


@dataclass(frozen=True)
class CharValue:
    exponent: int
    p: int

    def __post_init__(self):
        if not 0 <= self.exponent < self.p:
            raise ValueError("exponent must be reduced mod p")

    def __complex__(self) -> complex:
        return cmath.exp(2j * cmath.pi * self.exponent / self.p)

    def __mul__(self, other: "CharValue") -> "CharValue":
        return CharValue((self.exponent + other.exponent) % self.p, self.p)


def _check_denominator(f: Poly, cfg: FieldConfig) -> None:
    if not f:
        raise ZeroDivisionError("denominator is the zero polynomial")
    if f[-1] != 1:
        raise ValueError("denominator must be monic")


def frac_expansion(r: Poly, f: Poly, depth: int, cfg: FieldConfig) -> FracExpansion:
    """Coefficients c_1..c_depth of t^-1..t^-depth in r/f.

    Long division of (r mod f) t^depth by f; the quotient's coefficient of
    t^(depth-j) is c_j.
    """
    _check_denominator(f, cfg)
    if depth < 1:
        raise ValueError("depth must be positive")
    R = cfg.ring
    s = R.mod(r, f)
    quot, _ = R.divmod(R.shift(s, depth), f)
    quot = quot + (0,) * (depth - len(quot))
    return FracExpansion(depth, tuple(quot[depth - j] for j in range(1, depth + 1)))


def expansion_key(r: Poly, f: Poly, depth: int, cfg: FieldConfig) -> tuple[int, ...]:
    """c_1..c_depth as a plain tuple; ``()`` for depth <= 0."""
    if depth <= 0:
        return ()
    return frac_expansion(r, f, depth, cfg).coeffs


def e_char(r: Poly, f: Poly, cfg: FieldConfig) -> CharValue:
    c1 = frac_expansion(r, f, 1, cfg).coeffs[0]
    return CharValue(cfg.trace(c1), cfg.p)


def psi(x, g: Sequence[Poly], cfg: FieldConfig) -> CharValue:
    """Psi_x(g) = prod_i e(g_i r_i / f_i) for x given as pairs (r_i, f_i).

    ``x`` may be a FareyPoint or any sequence of (r, f) pairs.
    """
    pairs = x.pairs if hasattr(x, "pairs") else tuple(x)
    if len(pairs) != len(g):
        raise ValueError(f"dimension mismatch: point has {len(pairs)} coordinates, g has {len(g)}")
    R = cfg.ring
    exp = 0
    for (r, f), gi in zip(pairs, g):
        exp += e_char(R.mul(gi, r), f, cfg).exponent
    return CharValue(exp % cfg.p, cfg.p)


def torus_norm(r: Poly, f: Poly, cfg: FieldConfig) -> Fraction:
    """Distance from r/f to the nearest polynomial, i.e. q^(deg(r mod f) - deg f)."""
    _check_denominator(f, cfg)
    s = cfg.ring.mod(r, f)
    if not s:
        return Fraction(0)
    return Fraction(1, cfg.q ** (len(f) - len(s)))


def norm_exponent(r: Poly, f: Poly, cfg: FieldConfig):
    """The j with torus_norm = q^-j; ``inf`` when r/f is a polynomial."""
    s = cfg.ring.mod(r, f)
    return float("inf") if not s else len(f) - len(s)
