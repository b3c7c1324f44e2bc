"""Bound formulas for the function-field large sieve, evaluated exactly.

Everything with a possibly negative power of q is a ``Fraction``.  Weighted
sums of the form ``sum_{f~} prod_i (delta(f_i, f~_i) + q^{d_i - N})`` are
computed in integers scaled by ``q^{nN}`` and divided once at the end.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np

from .farey import EXPLICIT, KPOWER, ModuliFamily, enumerate_moduli
from .gfpoly import FieldConfig, Poly


def qpow(q: int, e: int) -> Fraction:
    return Fraction(q) ** e


def bound_tineq(n: int, N: int, M: int, q: int) -> int:
    """q^{n(N+1)} M(Q, N+2)."""
    return q ** (n * (N + 1)) * M


def _weighted_max(ids: np.ndarray, degs: np.ndarray, candidates: np.ndarray, q: int, scale_exp: int,
                  k: int = 1) -> tuple[Fraction, int]:
    """max over candidate tuples f of sum_rows prod_i (delta(f_i, id_i) + q^{k deg_i - scale_exp}).

    ``ids``/``degs`` are (E, n); ``candidates`` is (C, n) of ids.  Returns the
    exact maximum and the index of the first candidate attaining it.
    """
    n = ids.shape[1]
    s = q ** scale_exp
    top = int(k * degs.max(initial=0))
    # overflow guard for int64: (s + q^top)^n * E
    use_obj = (s + q ** top) ** n * max(len(ids), 1) >= 2**62
    dtype = object if use_obj else np.int64
    w = np.array([[q ** int(k * d) for d in row] for row in degs], dtype=dtype).reshape(ids.shape)
    best, arg = None, 0
    for c, f in enumerate(candidates):
        prod = np.ones(len(ids), dtype=dtype)
        for i in range(n):
            prod = prod * (w[:, i] + s * (ids[:, i] == f[i]).astype(dtype))
        tot = int(prod.sum())
        if best is None or tot > best:
            best, arg = tot, c
    return Fraction(best, s**n), arg


def _moduli_arrays(moduli, cfg: FieldConfig, use_base: bool) -> tuple[np.ndarray, np.ndarray]:
    R = cfg.ring
    tups = [m.base if use_base else m.f for m in moduli]
    ids = np.array([[R.to_code(f) for f in t] for t in tups], dtype=np.int64)
    degs = np.array([[len(f) - 1 for f in t] for t in tups], dtype=np.int64)
    return ids, degs


def _candidates(family: ModuliFamily, moduli, cfg: FieldConfig, use_base: bool) -> np.ndarray:
    """Tuples f over which the maximum is taken.

    For full and k-th power families every monic tuple is allowed, but a
    coordinate that matches no enumerated f~_i contributes delta = 0; the
    maximum is therefore attained on tuples whose coordinates are drawn from
    the per-coordinate projections, and those are enumerated exhaustively.
    Explicit families use their whole list.
    """
    R = cfg.ring
    if family.kind == EXPLICIT:
        return np.array([[R.to_code(f) for f in t] for t in family.moduli], dtype=np.int64)
    ids, _ = _moduli_arrays(moduli, cfg, use_base)
    cols = [sorted(set(ids[:, i].tolist())) for i in range(ids.shape[1])]
    return np.array(list(itertools.product(*cols)), dtype=np.int64).reshape(-1, ids.shape[1])


def general_weight(family: ModuliFamily, Q: int, N: int, cfg: FieldConfig) -> tuple[Fraction, tuple]:
    """max_f sum_{f~, deg F~ <= Q} prod_i (delta(f_i, f~_i) + q^{deg f~_i - N}).

    Degrees are those of the moduli (k-th powers for power families).
    Returns the value and the maximizing tuple of moduli.
    """
    moduli = enumerate_moduli(family, Q, cfg)
    if not moduli:
        raise ValueError("family has no moduli at this Q")
    ids, degs = _moduli_arrays(moduli, cfg, use_base=False)
    if family.kind == EXPLICIT:
        cands = _candidates(family, moduli, cfg, use_base=False)
    else:
        # compare on base tuples so that k-th powers match exactly
        bids, _ = _moduli_arrays(moduli, cfg, use_base=True)
        cands = _candidates(family, moduli, cfg, use_base=True)
        ids = bids
    val, arg = _weighted_max(ids, degs, cands, cfg.q, N)
    R = cfg.ring
    argmax = tuple(R.from_code(int(c)) for c in cands[arg])
    if family.kind == KPOWER:
        argmax = tuple(R.pow(f, family.k) for f in argmax)
    return val, argmax


def bound_general(family: ModuliFamily, Q: int, N: int, cfg: FieldConfig) -> Fraction:
    """q^{n(N+1)} max_f sum_{f~} prod_i (delta + q^{deg f~_i - (N+2)})."""
    val, _ = general_weight(family, Q, N + 2, cfg)
    return cfg.q ** (family.n * (N + 1)) * val


def bound_dim1(S_count: int, Q: int, N: int, q: int) -> Fraction:
    """q^{N+1} + #S q^{Q-1}; Q is the largest modulus degree."""
    return qpow(q, N + 1) + S_count * qpow(q, Q - 1)


@lru_cache(maxsize=64)
def _monic_tuples(cfg: FieldConfig, n: int, X: int) -> tuple[np.ndarray, np.ndarray]:
    moduli = enumerate_moduli(ModuliFamily.full(n), X, cfg)
    return _moduli_arrays(moduli, cfg, use_base=True)


def _f_codes(f: Sequence[Poly], n: int, cfg: FieldConfig) -> np.ndarray:
    R = cfg.ring
    if len(f) < n:
        raise ValueError(f"f has {len(f)} coordinates, need at least n = {n}")
    for fi in f[:n]:
        if not R.is_monic(fi):
            raise ValueError("f must be monic")
    return np.array([[R.to_code(tuple(fi)) for fi in f[:n]]], dtype=np.int64)


def m_tilde(f: Sequence[Poly], n: int, k: int, X: int, N: int, cfg: FieldConfig) -> Fraction:
    """sum over monic n-tuples f~ with deg lcm(f~) <= X of prod_i (delta(f_i, f~_i) + q^{k deg f~_i - N}).

    ``f`` may have more than n coordinates; only the first n are used.
    """
    if X < 0:
        raise ValueError("X must be non-negative")
    if N <= 0:
        raise ValueError("N must be positive")
    ids, degs = _monic_tuples(cfg, n, X)
    return _weighted_max(ids, degs, _f_codes(f, n, cfg), cfg.q, N, k)[0]


def m_tilde_closed_form_dim1(f: Poly, k: int, X: int, N: int, cfg: FieldConfig) -> Fraction:
    """n = 1: [deg f <= X] + sum_{d=0}^{X} q^d q^{kd - N}."""
    q = cfg.q
    return int(len(f) - 1 <= X) + sum(q**d * qpow(q, k * d - N) for d in range(X + 1))


@dataclass
class RecursionCheck:
    holds: bool
    lhs: Fraction
    rhs: Fraction

    @property
    def slack(self) -> Fraction:
        return self.rhs - self.lhs


def m_tilde_recursion_check(f: Sequence[Poly], n: int, k: int, X: int, N: int, cfg: FieldConfig) -> RecursionCheck:
    """M~_n(X) <= M~_{n-1}(X) + sum_{0<=j<=X} M~_{n-1}(j) (q+1)^{(k+1)X - kj - N}."""
    if n < 2:
        raise ValueError("the recursion needs n >= 2")
    q = cfg.q
    lhs = m_tilde(f, n, k, X, N, cfg)
    rhs = m_tilde(f, n - 1, k, X, N, cfg)
    for j in range(X + 1):
        rhs += m_tilde(f, n - 1, k, j, N, cfg) * qpow(q + 1, (k + 1) * X - k * j - N)
    return RecursionCheck(lhs <= rhs, lhs, rhs)


def lemma_bound(X: int, N: int, n: int, k: int, q: int, C=1):
    """C (1 + (q+1)^{kX + (X-N)} + (q+1)^{kX + n(X-N)})."""
    return C * (1 + qpow(q + 1, k * X + (X - N)) + qpow(q + 1, k * X + n * (X - N)))


def power_bound(q: int, n: int, k: int, Q: int, N: int, C=1):
    """C ((q+1)^{nN} + (q+1)^{(k+1)Q + (n-1)N} + (q+1)^{(k+n)Q}).

    At n = 1 the last two terms are the same expression and are counted once.
    """
    if n == 1:
        return dim1_power_bound(q, k, Q, N, C)
    b = q + 1
    return C * (qpow(b, n * N) + qpow(b, (k + 1) * Q + (n - 1) * N) + qpow(b, (k + n) * Q))


def full_bound(q: int, n: int, Q: int, N: int, C=1):
    """C ((q+1)^{nN} + (q+1)^{2Q + (n-1)N} + (q+1)^{(n+1)Q})."""
    return power_bound(q, n, 1, Q, N, C)


def dim1_power_bound(q: int, k: int, Q: int, N: int, C=1):
    """C ((q+1)^N + (q+1)^{(k+1)Q})."""
    return C * (qpow(q + 1, N) + qpow(q + 1, (k + 1) * Q))


def kth_corollary_bound(family: ModuliFamily, Q: int, N: int, cfg: FieldConfig) -> Fraction:
    """q^{n(N+1)} max over base tuples f of M~_{f,n,k}(Q, N+2).

    Q bounds the degree of the lcm of the base tuple.
    """
    k = family.power
    n = family.n
    ids, degs = _monic_tuples(cfg, n, Q)
    cols = [sorted(set(ids[:, i].tolist())) for i in range(n)]
    cands = np.array(list(itertools.product(*cols)), dtype=np.int64).reshape(-1, n)
    val, _ = _weighted_max(ids, degs, cands, cfg.q, N + 2, k)
    return cfg.q ** (n * (N + 1)) * val


@dataclass
class BoundReport:
    q: int
    p: int
    m: int
    n: int
    N: int
    Q: int
    k: int
    family: str
    s_q: int
    moduli_count: int
    m_value: int  # M(Q, N+2)
    delta_opt: float
    bounds: dict = field(default_factory=dict)  # name -> Fraction (explicit) or Fraction (C = 1)
    explicit: tuple = ("tineq", "general", "dim1", "kth")
    violations: list = field(default_factory=list)

    def ratios(self) -> dict:
        return {name: self.delta_opt / float(v) for name, v in self.bounds.items()}


def bound_report(family: ModuliFamily, Q: int, N: int, cfg: FieldConfig, delta_opt: float, m_value: int,
                 s_q: int, guard: float = 1e-9) -> BoundReport:
    """All bound values at one grid point, with hard-inequality violations listed."""
    n, k, q = family.n, family.power, cfg.q
    moduli = enumerate_moduli(family, Q, cfg)
    rep = BoundReport(q, cfg.p, cfg.m, n, N, Q, k, family.label(), s_q, len(moduli), m_value, delta_opt)
    b = rep.bounds
    b["tineq"] = Fraction(bound_tineq(n, N, m_value, q))
    b["general"] = bound_general(family, Q, N, cfg)
    if n == 1:
        max_deg = max(m.lcm_degree for m in moduli)
        b["dim1"] = bound_dim1(len(moduli), max_deg if family.kind == EXPLICIT else k * Q, N, q)
    if family.kind == KPOWER or (family.kind != EXPLICIT and k == 1):
        b["kth"] = kth_corollary_bound(family, Q, N, cfg)
    if family.kind != EXPLICIT:
        b["power"] = power_bound(q, n, k, Q, N)
        b["full"] = full_bound(q, n, Q, N)
        b["dim1_power"] = dim1_power_bound(q, k, Q, N)
    for name in rep.explicit:
        if name in b and delta_opt > float(b[name]) * (1 + guard):
            rep.violations.append({"bound": name, "delta_opt": delta_opt, "value": float(b[name])})
    return rep
