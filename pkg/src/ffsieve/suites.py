"""Verification suites run per parameter point.

Each suite returns a plain dict record with a ``violations`` list; nothing
raises on a failed check.  ``PointContext`` caches the expensive shared
pieces (S_Q, the sieve form, Delta_opt) so suites at one point reuse them.
"""
from __future__ import annotations

import hashlib
import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

import numpy as np

from .bounds import bound_report, general_weight, lemma_bound, m_tilde
from .farey import ModuliFamily, close_pair, closeness_counts, count_m, enumerate_moduli, farey_set
from .gfpoly import FieldConfig
from .laurent import expansion_key, torus_norm
from .rng import derive_seed
from .sieve import BOUND_GUARD, SieveForm, duality_check, reduced_difference

PAIR_LIMIT = 400  # all-pairs checks run when |S_Q| is at most this
BALL_LIMIT = 4096
SIGNED_TOL = 1e-6


@dataclass
class PointContext:
    cfg: FieldConfig
    family: ModuliFamily
    Q: int
    N: int
    seed: int = 0
    trials: int = 32
    _delta: object = field(default=None, repr=False)

    @property
    def q(self) -> int:
        return self.cfg.q

    @property
    def n(self) -> int:
        return self.family.n

    @cached_property
    def points(self):
        return farey_set(self.family, self.Q, self.cfg)

    @cached_property
    def moduli(self):
        return enumerate_moduli(self.family, self.Q, self.cfg)

    @cached_property
    def form(self) -> SieveForm:
        return SieveForm(self.points, self.N, self.cfg)

    @property
    def ball_size(self) -> int:
        return self.q ** (self.n * (self.N + 1))

    @property
    def feasible(self) -> bool:
        return self.ball_size <= BALL_LIMIT

    def delta(self):
        if self._delta is None:
            self._delta = self.form.delta_opt(seed=derive_seed(self.seed, 11))
        return self._delta

    @cached_property
    def s_q_hash(self) -> str:
        R = self.cfg.ring
        h = hashlib.sha256()
        for x in self.points:
            h.update(repr((tuple(R.to_code(f) for f in x.f), tuple(R.to_code(r) for r in x.r))).encode())
            h.update(b"\n")
        return h.hexdigest()

    def params(self) -> dict:
        return {"p": self.cfg.p, "m": self.cfg.m, "q": self.q, "n": self.n, "N": self.N, "Q": self.Q,
                "k": self.family.power, "family": self.family.label()}


def _indicator(pairs, N: int, cfg: FieldConfig, cache: dict) -> bool:
    """Every coordinate has torus norm <= q^-(N+2)."""
    lim = Fraction(1, cfg.q ** (N + 2))
    for pr in pairs:
        v = cache.get(pr)
        if v is None:
            v = cache[pr] = torus_norm(pr[0], pr[1], cfg) <= lim
        if not v:
            return False
    return True


def _close(value, expected: int, p: int) -> bool:
    if p == 2:
        return int(value) == expected
    return abs(complex(value) - expected) <= SIGNED_TOL


# -- algebra ------------------------------------------------------------------

def algebra_suite(cfg: FieldConfig) -> dict:
    """Exhaustive field checks and small ring round trips."""
    q, p = cfg.q, cfg.p
    tr = cfg.trace_table
    codes = np.arange(q)
    checks = {
        "trace_linear": bool((tr[cfg.add_table] == (tr[:, None] + tr[None, :]) % p).all()),
        "trace_frobenius": all(cfg.trace(cfg.pow(int(x), p)) == cfg.trace(int(x)) for x in codes),
        "trace_surjective": set(tr.tolist()) == set(range(p)),
        "mul_inverse": all(cfg.mul(int(x), cfg.inv(int(x))) == 1 for x in codes[1:]),
    }
    R = cfg.ring
    deg = 3 if q <= 4 else (2 if q <= 16 else 1)
    polys = R.enumerate_monic_upto(deg)
    phi_ok = divmod_ok = True
    for f in polys:
        brute = sum(1 for r in R.enumerate_below(len(f) - 1) if R.gcd(r, f) == (1,)) if len(f) > 1 else 1
        phi_ok &= R.euler_phi(f) == brute
        for a in polys[:: max(1, len(polys) // 8)]:
            qq, rr = R.divmod(a, f)
            divmod_ok &= R.add(R.mul(qq, f), rr) == a and len(rr) < len(f)
    checks["euler_phi_bruteforce"] = phi_ok
    checks["divmod_roundtrip"] = divmod_ok
    return {"suite": "algebra", "checks": checks,
            "violations": [{"check": k} for k, v in checks.items() if not v]}


# -- orthogonality -------------------------------------------------------------

def orthogonality_suite(ctx: PointContext, pair_limit: int = PAIR_LIMIT) -> dict:
    """charBallSum(x, N) = q^{n(N+1)} [all ||x_i|| <= q^-(N+2)].

    Checked for every point of S_Q and for every key of depth N+1 (each key
    is the expansion of one fraction with denominator t^{N+1}); differences
    of points land on keys because truncated expansions are additive, which
    is checked on all pairs when |S_Q| <= ``pair_limit`` (and there also by
    evaluating the reduced differences directly).
    """
    cfg, N, n = ctx.cfg, ctx.N, ctx.n
    top = ctx.ball_size
    form = ctx.form
    R = cfg.ring
    out = {"suite": "orthogonality", "points_checked": 0, "keys_checked": 0, "pairs_checked": 0, "violations": []}
    viol = out["violations"]
    sums = form.char_sums()
    cache: dict = {}
    for i, x in enumerate(ctx.points):
        expected = top if _indicator(x.pairs, N, cfg, cache) else 0
        if not _close(sums[i], expected, cfg.p):
            viol.append({"check": "point", "index": i, "value": complex(sums[i]).real, "expected": expected})
    out["points_checked"] = len(ctx.points)

    table = form.key_space
    tN = R.shift((1,), N + 1)
    width = N + 1
    for idx, digits in enumerate(form.ball.digits):
        pairs = []
        for i in range(n):
            c = digits[i * width:(i + 1) * width]
            num = R.normalize([int(c[N - e]) for e in range(N + 1)])  # c_j t^{N+1-j}
            pairs.append((num, tN))
        expected = top if _indicator(tuple(pairs), N, cfg, cache) else 0
        if not _close(table[idx], expected, cfg.p):
            viol.append({"check": "key", "index": idx, "expected": expected})
    out["keys_checked"] = form.ball.size

    if ctx.form.R <= pair_limit:
        keys = form.key_digits
        neg = cfg.neg_table
        add = cfg.add_table
        pts = ctx.points
        for a, b in itertools.combinations(range(len(pts)), 2):
            diff = reduced_difference(pts[a], pts[b], cfg)
            dkey = [c for r, f in diff for c in expansion_key(r, f, N + 1, cfg)]
            if dkey != add[keys[a], neg[keys[b]]].tolist():
                viol.append({"check": "additivity", "pair": [a, b]})
            expected = top if _indicator(diff, N, cfg, cache) else 0
            kidx = int(sum(int(c) * cfg.q ** l for l, c in enumerate(dkey)))
            if not _close(table[kidx], expected, cfg.p):
                viol.append({"check": "pair", "pair": [a, b], "expected": expected})
        out["pairs_checked"] = len(pts) * (len(pts) - 1) // 2
    return out


# -- duality -------------------------------------------------------------------

def duality_suite(ctx: PointContext) -> dict:
    rep = duality_check(ctx.points, ctx.N, ctx.cfg, trials=ctx.trials, seed=ctx.seed, form=ctx.form)
    # the row-side run is the same computation as Delta_opt; keep it for the bound suite
    if ctx._delta is None:
        ctx._delta = _RowDelta(rep.delta_row, rep.row_iterations)
    return {"suite": "duality", "delta_row": rep.delta_row, "delta_col": rep.delta_col,
            "relative_gap": rep.relative_gap, "trials": rep.trials, "row_iterations": rep.row_iterations,
            "col_iterations": rep.col_iterations, "violations": rep.violations}


@dataclass
class _RowDelta:
    value: float
    iterations: int


# -- counting ------------------------------------------------------------------

def count_suite(ctx: PointContext, pair_limit: int = PAIR_LIMIT) -> dict:
    cfg, R = ctx.cfg, ctx.cfg.ring
    pts = ctx.points
    phi_sum = sum(int(np.prod([R.euler_phi(f) for f in mod.f])) for mod in ctx.moduli)
    viol = []
    if phi_sum != len(pts):
        viol.append({"check": "phi_sum", "s_q": len(pts), "phi_sum": phi_sum})
    depths = list(range(0, ctx.N + 3))
    table = {}
    argmax = {}
    for d in depths:
        table[d], argmax[d] = count_m(pts, None, d, cfg)
    if table[0] != len(pts):
        viol.append({"check": "m_at_zero", "value": table[0]})
    if any(table[a] < table[a + 1] for a in depths[:-1]):
        viol.append({"check": "m_monotone", "table": [table[d] for d in depths]})
    pairs_checked = 0
    if len(pts) <= pair_limit:
        for d in depths:
            if closeness_counts(pts, d, cfg, "pairs") != closeness_counts(pts, d, cfg, "bucket"):
                viol.append({"check": "bucket_vs_pairs", "N": d})
        lim = {d: Fraction(1, cfg.q ** d) for d in depths}
        for x, y in itertools.product(pts, repeat=2):
            norms = [torus_norm(r, f, cfg) for r, f in reduced_difference(x, y, cfg)]
            worst = max(norms)
            for d in depths:
                if close_pair(x, y, d, cfg) != (worst <= lim[d]):
                    viol.append({"check": "close_pair_vs_norm", "N": d})
            pairs_checked += 1
    x = pts[argmax[ctx.N + 2]]
    return {"suite": "count", "s_q": len(pts), "phi_sum": phi_sum, "moduli": len(ctx.moduli),
            "m_table": [table[d] for d in depths],
            "argmax": {"f": [R.format(f) for f in x.f], "r": [R.format(r) for r in x.r]},
            "pairs_checked": pairs_checked, "violations": viol}


# -- bounds --------------------------------------------------------------------

def bound_suite(ctx: PointContext, guard: float = BOUND_GUARD) -> tuple[dict, dict]:
    """Bound values at this point; returns (suite record, bound record)."""
    cfg, fam, Q, N = ctx.cfg, ctx.family, ctx.Q, ctx.N
    M, _ = count_m(ctx.points, None, N + 2, cfg)
    delta = ctx.delta()
    rep = bound_report(fam, Q, N, cfg, float(delta.value), M, len(ctx.points), guard=guard)
    weight, argmax = general_weight(fam, Q, N + 2, cfg)
    R = cfg.ring
    viol = list(rep.violations)
    if Fraction(M) > weight:
        viol.append({"bound": "count_vs_weight", "m_value": M, "weight": float(weight)})
    base = argmax
    if fam.kind == "kpower":
        roots = {R.pow(b, fam.k): b for b in R.enumerate_monic_upto(Q)}
        base = tuple(roots[f] for f in argmax)
    mt = [m_tilde(base, fam.n, fam.power, X, N + 2, cfg) for X in range(Q + 1)] if fam.kind != "explicit" else []
    lemma = [lemma_bound(X, N + 2, fam.n, fam.power, cfg.q) for X in range(Q + 1)] if mt else []
    record = {
        "params": ctx.params(),
        "s_q": len(ctx.points),
        "moduli": rep.moduli_count,
        "m_value": M,
        "delta_opt": float(delta.value),
        "delta_iterations": int(delta.iterations),
        "bounds": {k: float(v) for k, v in rep.bounds.items()},
        "bounds_exact": {k: str(v) for k, v in rep.bounds.items()},
        "ratios": rep.ratios(),
        "general_argmax": [R.format(f) for f in argmax],
        "m_tilde": [str(v) for v in mt],
        "m_tilde_over_lemma": [float(a / b) for a, b in zip(mt, lemma)],
        "violations": viol,
    }
    suite = {"suite": "bound", "delta_opt": float(delta.value), "m_value": M, "violations": viol}
    return suite, record
