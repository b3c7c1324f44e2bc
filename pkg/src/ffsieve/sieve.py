"""The sieve bilinear form over the ball B(0, N) of F_q[t]^n.

For g in the ball and a point x = (r_i / f_i), ``e(g . x)`` only sees the
expansion coefficients c_1..c_{N+1} of each coordinate: the t^-1 coefficient
of g_i r_i / f_i is sum_j g_{i,j} c_{i,j+1}.  Every character sum below is
accumulated as integer counts per exponent class mod p and realized as a
complex number in one final pass.

Layout: a ball element and an expansion key are both rows of ``L = n(N+1)``
field codes; column ``i*(N+1) + j`` holds the t^j coefficient of g_i, resp.
c_{i,j+1}.  A row's integer index is ``sum_l digit_l * q^l``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Sequence

import numpy as np

from .farey import FareyPoint, point_keys
from .gfpoly import FieldConfig, Poly
from .laurent import expansion_key
from .rng import complex_uniform, derive_seed

_CHUNK = 1 << 22  # max elements in a temporary exponent block
_CACHE_LIMIT = 1 << 24  # realized character blocks up to this size are kept

POWER_TOL = 1e-12
POWER_MAX_ITER = 100_000
HERMITIAN_TOL = 1e-9
_ROUNDING = 1e-15  # Rayleigh changes below this are floating-point noise


def _digits(indices: np.ndarray, base: int, width: int) -> np.ndarray:
    out = np.empty((len(indices), width), dtype=np.int64)
    x = np.asarray(indices, dtype=np.int64).copy()
    for l in range(width):
        x, out[:, l] = np.divmod(x, base)
    return out


def _index(digits: np.ndarray, base: int) -> np.ndarray:
    weights = base ** np.arange(digits.shape[1], dtype=np.int64)
    return digits @ weights


def roots_of_unity(p: int) -> np.ndarray:
    if p == 2:
        return np.array([1.0, -1.0])
    return np.exp(2j * np.pi * np.arange(p) / p)


def realize(counts: np.ndarray, p: int):
    """Collapse per-class counts (last axis) into the character sum.

    For p = 2 the result stays an exact integer array.
    """
    counts = np.asarray(counts)
    if p == 2:
        return counts[..., 0] - counts[..., 1]
    return counts @ roots_of_unity(p)


@dataclass(frozen=True)
class BallIndex:
    """All g in F_q[t]^n with deg g_i <= N, in index order."""

    N: int
    n: int
    cfg: FieldConfig = field(repr=False)

    def __post_init__(self):
        if self.N < 0 or self.n < 1:
            raise ValueError("ball needs N >= 0 and n >= 1")

    @property
    def width(self) -> int:
        return self.n * (self.N + 1)

    @property
    def size(self) -> int:
        return self.cfg.q ** self.width

    @cached_property
    def digits(self) -> np.ndarray:
        return _digits(np.arange(self.size), self.cfg.q, self.width)

    def point(self, index: int) -> tuple:
        d = _digits(np.array([index]), self.cfg.q, self.width)[0]
        R, w = self.cfg.ring, self.N + 1
        return tuple(R.normalize(d[i * w:(i + 1) * w].tolist()) for i in range(self.n))

    def points(self) -> list[tuple]:
        return [self.point(i) for i in range(self.size)]

    def index_of(self, g: Sequence[Poly]) -> int:
        if len(g) != self.n:
            raise ValueError("dimension mismatch")
        w, q = self.N + 1, self.cfg.q
        idx = 0
        for i, gi in enumerate(g):
            if len(gi) > w:
                raise ValueError(f"{gi} has degree above {self.N}")
            for j, c in enumerate(gi):
                idx += c * q ** (i * w + j)
        return idx

    @cached_property
    def difference_index(self) -> Callable[[np.ndarray, np.ndarray], np.ndarray]:
        sub = self.cfg.add_table[:, self.cfg.neg_table]
        weights = self.cfg.q ** np.arange(self.width, dtype=np.int64)
        dig = self.digits

        def diff(rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
            # index of g_rows[i] - g_cols[j]
            return sub[dig[rows][:, None, :], dig[cols][None, :, :]] @ weights

        return diff


def exponent_matrix(key_digits: np.ndarray, ball_digits: np.ndarray, cfg: FieldConfig) -> np.ndarray:
    """E[b, g] = exponent of e(g . y_b) mod p, as int8 (p <= 127) or int16."""
    trmul = cfg.trmul_table
    K, G = len(key_digits), len(ball_digits)
    dtype = np.int8 if cfg.p < 128 else np.int16
    out = np.empty((K, G), dtype=dtype)
    step = max(1, _CHUNK // max(G, 1))
    for s in range(0, K, step):
        kd = key_digits[s:s + step]
        acc = np.zeros((len(kd), G), dtype=np.int64)
        for l in range(key_digits.shape[1]):
            acc += trmul[kd[:, l][:, None], ball_digits[:, l][None, :]]
        out[s:s + step] = acc % cfg.p
    return out


def class_counts(E: np.ndarray, p: int, weights: np.ndarray | None = None, axis: int = 1) -> np.ndarray:
    """Per-class counts of an exponent matrix along ``axis``; shape (..., p).

    With ``weights`` the counts are weighted sums over the other axis instead.
    """
    if weights is None:
        return np.stack([(E == k).sum(axis=axis) for k in range(p)], axis=-1)
    w = np.asarray(weights)
    if axis == 0:
        return np.stack([w @ (E == k) for k in range(p)], axis=-1)
    return np.stack([(E == k) @ w for k in range(p)], axis=-1)


def _pairs_of(x) -> tuple:
    pairs = x.pairs if isinstance(x, FareyPoint) else tuple(tuple(pr) for pr in x)
    for r, f in pairs:
        if not f or f[-1] != 1:
            raise ValueError(f"malformed fraction {r}/{f}: denominator must be monic and nonzero")
    return pairs


def fraction_key(x, depth: int, cfg: FieldConfig) -> np.ndarray:
    pairs = _pairs_of(x)
    return np.array([c for r, f in pairs for c in expansion_key(r, f, depth, cfg)], dtype=np.int64)


def char_ball_counts(x, N: int, cfg: FieldConfig) -> np.ndarray:
    """Counts of g in B(0, N) by exponent class of e(g . x); length p."""
    pairs = _pairs_of(x)
    ball = BallIndex(N, len(pairs), cfg)
    key = fraction_key(pairs, N + 1, cfg)
    E = exponent_matrix(key[None, :], ball.digits, cfg)
    return class_counts(E, cfg.p)[0]


def char_ball_sum(x, N: int, cfg: FieldConfig) -> complex:
    """sum over g in B(0, N) of e(g . x), for x a tuple of (r_i, f_i)."""
    return complex(realize(char_ball_counts(x, N, cfg), cfg.p))


def key_space_counts(N: int, n: int, cfg: FieldConfig) -> np.ndarray:
    """Class counts of the ball sum for every expansion key c_1..c_{N+1}.

    Row k is the key with index k; each key is the expansion of the
    fraction sum_j c_j t^{N+1-j} / t^{N+1}.
    """
    ball = BallIndex(N, n, cfg)
    E = exponent_matrix(ball.digits, ball.digits, cfg)
    return class_counts(E, cfg.p)


@dataclass
class PowerResult:
    value: float
    vector: np.ndarray
    iterations: int
    converged: bool
    restarts: int = 0


class HermitianOperator:
    """Matrix-free Hermitian operator for ``operator_norm``."""

    def __init__(self, dim: int, matvec: Callable[[np.ndarray], np.ndarray]):
        self.shape = (dim, dim)
        self.matvec = matvec

    def __matmul__(self, v):
        return self.matvec(v)


def check_hermitian(G: np.ndarray, tol: float = HERMITIAN_TOL) -> None:
    G = np.asarray(G)
    if G.ndim != 2 or G.shape[0] != G.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {G.shape}")
    scale = max(1.0, float(np.abs(G).max(initial=0.0)))
    if float(np.abs(G - G.conj().T).max(initial=0.0)) > tol * scale:
        raise ValueError("matrix is not Hermitian")


def _dense_matvec(G: np.ndarray) -> Callable[[np.ndarray], np.ndarray]:
    if np.iscomplexobj(G):
        return G.__matmul__
    # avoid promoting a real matrix to complex on every product
    return lambda v: G @ v.real + 1j * (G @ v.imag)


def _power_iteration(matvec, dim: int, seed: int, tol: float, max_iter: int) -> PowerResult:
    v = complex_uniform(seed, dim)
    v /= np.linalg.norm(v)
    lam_prev = None
    steps = []
    lam = 0.0
    for it in range(1, max_iter + 1):
        w = matvec(v)
        lam = float(np.vdot(v, w).real)
        nw = float(np.linalg.norm(w))
        if nw == 0.0:
            return PowerResult(0.0, v, it, False)
        if lam_prev is not None:
            step = abs(lam - lam_prev)
            steps.append(step)
            if step <= _ROUNDING * abs(lam):
                return PowerResult(lam, v, it, True)
            if step <= tol * abs(lam) and _tail_estimate(steps) <= tol * abs(lam):
                return PowerResult(lam, v, it, True)
        lam_prev = lam
        v = w / nw
    return PowerResult(lam, v, max_iter, False)


def _tail_estimate(steps: list) -> float:
    """Remaining Rayleigh error, extrapolated from the geometric decay of the steps.

    The per-step ratio rho is measured over the later half of the history;
    two neighbouring steps are too noisy once rho is close to 1.  Steps that
    stopped shrinking are rounding noise, so nothing is left to extrapolate.
    """
    k = len(steps)
    if k < 4:
        return np.inf
    span = k // 2
    first, last = steps[k - 1 - span], steps[-1]
    if last >= first:
        return 0.0
    rho = (last / first) ** (1 / span)
    return last * rho / (1 - rho)


def operator_norm(G, seed: int = 0, tol: float = POWER_TOL, max_iter: int = POWER_MAX_ITER) -> PowerResult:
    """Largest eigenvalue of a Hermitian PSD matrix by power iteration.

    Starts from a SplitMix64 complex vector; stops when the Rayleigh
    quotient's relative change, and its geometric extrapolation, drop
    below ``tol``.  If the start lies in the
    null space or the iteration cap is hit, restarts once from a derived seed
    and keeps the larger quotient.
    """
    if isinstance(G, HermitianOperator):
        matvec, dim = G.matvec, G.shape[0]
    else:
        G = np.asarray(G)
        check_hermitian(G)
        matvec, dim = _dense_matvec(G), G.shape[0]
    if dim == 0:
        raise ValueError("empty matrix")
    res = _power_iteration(matvec, dim, seed, tol, max_iter)
    if not res.converged:
        again = _power_iteration(matvec, dim, derive_seed(seed, 0x5EED), tol, max_iter)
        again.restarts = 1
        if again.value > res.value or (again.converged and again.value == res.value):
            res = again
        else:
            res.restarts = 1
    return res


class SieveForm:
    """The character matrix A[i, g] = e(g . x_i) for a point list and a ball.

    Points sharing the expansion coefficients c_1..c_{N+1} give identical
    rows of A; the form is stored once per distinct key (``U`` rows) with
    multiplicities.  Both Gram operators are exact under this compression.
    """

    def __init__(self, points: Sequence[FareyPoint], N: int, cfg: FieldConfig):
        if not points:
            raise ValueError("empty point list")
        self.points = list(points)
        self.N = N
        self.cfg = cfg
        self.n = points[0].n
        if any(x.n != self.n for x in self.points):
            raise ValueError("points of mixed dimension")
        self.ball = BallIndex(N, self.n, cfg)
        keys = point_keys(self.points, N + 1, cfg)
        self.key_digits = np.array(keys, dtype=np.int64).reshape(len(keys), self.ball.width)
        self.key_index = _index(self.key_digits, cfg.q)
        uniq, first, inverse, counts = np.unique(
            self.key_index, return_index=True, return_inverse=True, return_counts=True
        )
        self.unique_index = uniq
        self.unique_digits = self.key_digits[first]
        self.bucket = inverse.reshape(-1)
        self.multiplicity = counts

    @property
    def R(self) -> int:
        return len(self.points)

    @property
    def U(self) -> int:
        return len(self.unique_index)

    @cached_property
    def exponents(self) -> np.ndarray:
        """E[b, g] for the distinct keys b."""
        return exponent_matrix(self.unique_digits, self.ball.digits, self.cfg)

    @cached_property
    def unique_counts(self) -> np.ndarray:
        """Class counts of the ball sum of each distinct key, shape (U, p)."""
        return class_counts(self.exponents, self.cfg.p)

    def point_counts(self) -> np.ndarray:
        """Class counts of charBallSum for every point, shape (R, p)."""
        return self.unique_counts[self.bucket]

    def char_sums(self) -> np.ndarray:
        return realize(self.point_counts(), self.cfg.p)

    @cached_property
    def realized(self) -> np.ndarray:
        """A_u[b, g] = e(g . y_b); real for p = 2."""
        return roots_of_unity(self.cfg.p)[self.exponents]

    def _realized(self, rows: slice | None = None) -> np.ndarray:
        if self.U * self.ball.size <= _CACHE_LIMIT:
            return self.realized if rows is None else self.realized[rows]
        E = self.exponents if rows is None else self.exponents[rows]
        return roots_of_unity(self.cfg.p)[E]

    def _row_blocks(self):
        if self.U * self.ball.size <= _CACHE_LIMIT:
            yield slice(0, self.U)
            return
        step = max(1, _CHUNK // self.ball.size)
        for s in range(0, self.U, step):
            yield slice(s, s + step)

    def apply(self, a: np.ndarray) -> np.ndarray:
        """(A_u a): inner sums for every distinct key; a may be (|B|,) or (|B|, k)."""
        out = np.empty((self.U,) + a.shape[1:], dtype=complex)
        for sl in self._row_blocks():
            out[sl] = self._realized(sl) @ a
        return out

    def apply_adjoint_transpose(self, s: np.ndarray) -> np.ndarray:
        """(A_u^T s): sum_b s_b e(g . y_b) for every g."""
        out = np.zeros((self.ball.size,) + s.shape[1:], dtype=complex)
        for sl in self._row_blocks():
            out += self._realized(sl).T @ s[sl]
        return out

    def aggregate(self, b: np.ndarray) -> np.ndarray:
        """P^T b: sum of b over each bucket of equal keys."""
        b = np.asarray(b, dtype=complex)
        if b.ndim == 1:
            return (np.bincount(self.bucket, b.real, minlength=self.U)
                    + 1j * np.bincount(self.bucket, b.imag, minlength=self.U))
        return np.stack([self.aggregate(b[:, j]) for j in range(b.shape[1])], axis=1)

    # -- quadratic forms ----------------------------------------------------

    def T(self, a: np.ndarray):
        """Sum over points of |sum_g a_g e(g . x)|^2; columns of a 2-D ``a`` are separate sequences."""
        a = np.asarray(a, dtype=complex)
        if a.shape[0] != self.ball.size:
            raise ValueError(f"coefficient sequence has length {a.shape[0]}, ball has {self.ball.size}")
        out = self.multiplicity @ (np.abs(self.apply(a)) ** 2)
        return float(out) if a.ndim == 1 else out

    def T_dual(self, b: np.ndarray):
        """Sum over the ball of |sum_x b_x e(g . x)|^2; columns of a 2-D ``b`` are separate sequences."""
        b = np.asarray(b, dtype=complex)
        if b.shape[0] != self.R:
            raise ValueError(f"weights have length {b.shape[0]}, point list has {self.R}")
        out = (np.abs(self.apply_adjoint_transpose(self.aggregate(b))) ** 2).sum(axis=0)
        return float(out) if b.ndim == 1 else out

    # -- Gram operators -----------------------------------------------------

    @cached_property
    def ball_kernel(self) -> np.ndarray:
        """K(h) = sum_i e(h . x_i) for every h in the ball."""
        return realize(class_counts(self.exponents, self.cfg.p, self.multiplicity, axis=0), self.cfg.p)

    def row_gram(self) -> np.ndarray:
        """A^H A, indexed by the ball: entry (g, g') = K(g' - g)."""
        size = self.ball.size
        K = self.ball_kernel
        out = np.empty((size, size), dtype=K.dtype if self.cfg.p == 2 else complex)
        diff = self.ball.difference_index
        cols = np.arange(size)
        step = max(1, _CHUNK // (size * self.ball.width))
        for s in range(0, size, step):
            rows = np.arange(s, min(size, s + step))
            out[rows] = K[diff(cols, rows).T]
        return out.astype(float) if self.cfg.p == 2 else out

    @cached_property
    def key_space(self) -> np.ndarray:
        """Realized ball sums for every key index (the whole key space)."""
        return realize(key_space_counts(self.N, self.n, self.cfg), self.cfg.p)

    def key_difference_index(self, da: np.ndarray, db: np.ndarray) -> np.ndarray:
        sub = self.cfg.add_table[:, self.cfg.neg_table]
        weights = self.cfg.q ** np.arange(self.ball.width, dtype=np.int64)
        return sub[da[:, None, :], db[None, :, :]] @ weights

    def unique_gram(self) -> np.ndarray:
        """A_u A_u^H over distinct keys: entry (b, b') = charBallSum(y_b - y_b')."""
        U = self.U
        table = self.key_space
        out = np.empty((U, U), dtype=float if self.cfg.p == 2 else complex)
        step = max(1, _CHUNK // (U * self.ball.width))
        for s in range(0, U, step):
            out[s:s + step] = table[self.key_difference_index(self.unique_digits[s:s + step], self.unique_digits)]
        return out

    def column_operator(self) -> HermitianOperator:
        """A A^H over all R points, applied through the bucket structure."""
        apply_gu = _dense_matvec(self.unique_gram())
        bucket = self.bucket

        def matvec(v):
            return apply_gu(self.aggregate(v))[bucket]

        return HermitianOperator(self.R, matvec)

    def column_gram(self) -> np.ndarray:
        """A A^H restricted to the span of the bucket indicators.

        With P the point-to-key indicator, A A^H = P G_u P^T and its nonzero
        spectrum is that of D^(1/2) G_u D^(1/2), D the multiplicities.
        Power iteration on either one produces the same Rayleigh quotients
        once the start is projected onto range(P).
        """
        w = np.sqrt(self.multiplicity.astype(float))
        return w[:, None] * self.unique_gram() * w[None, :]

    def spectrum(self) -> np.ndarray:
        """All eigenvalues of A^H A, indexed by key.

        A^H A[g, g'] = K(g' - g) is a convolution on the additive group of
        the ball, so the characters g -> e(g . y) diagonalize it:
        lambda_y = sum_h K(h) e(-h . y).  Integer exact for p = 2.
        """
        E = exponent_matrix(self.ball.digits, self.ball.digits, self.cfg)
        p = self.cfg.p
        K = self.ball_kernel
        if p == 2:
            return K @ (1 - 2 * E.T.astype(np.int64))
        conj_roots = np.conj(roots_of_unity(p))
        return (conj_roots[E] @ K).real

    def delta_opt(self, seed: int = 0) -> PowerResult:
        """Optimal sieve constant: top eigenvalue of A^H A by power iteration.

        The returned vector is the extremal coefficient sequence a_g.
        """
        return operator_norm(self.row_gram(), seed=seed)


def ball_index(N: int, n: int, cfg: FieldConfig) -> BallIndex:
    return BallIndex(N, n, cfg)


def sieve_sum_T(points: Sequence[FareyPoint], N: int, a, cfg: FieldConfig) -> float:
    return SieveForm(points, N, cfg).T(a)


def dual_sum_T(points: Sequence[FareyPoint], N: int, b, cfg: FieldConfig) -> float:
    return SieveForm(points, N, cfg).T_dual(b)


def character_matrix(points: Sequence[FareyPoint], N: int, cfg: FieldConfig) -> np.ndarray:
    """Dense A[i, g] = e(g . x_i); small grids only."""
    form = SieveForm(points, N, cfg)
    return form._realized()[form.bucket]


def reduced_difference(x: FareyPoint, y: FareyPoint, cfg: FieldConfig) -> tuple:
    """x - y coordinatewise as (s mod F, F) with F = lcm(f_i, f~_i)."""
    R = cfg.ring
    out = []
    for r, f, rt, ft in zip(x.r, x.f, y.r, y.f):
        F = R.lcm(f, ft)
        num = R.sub(R.mul(r, R.divmod(F, f)[0]), R.mul(rt, R.divmod(F, ft)[0]))
        out.append((R.mod(num, F), F))
    return tuple(out)


def gram_matrix(points: Sequence[FareyPoint], N: int, cfg: FieldConfig, method: str = "keys") -> np.ndarray:
    """R x R matrix of charBallSum(x_i - x_j).

    ``reduce`` forms each difference over lcm(f_i, f~_i) and evaluates it
    through its own expansion (quadratic in R, small grids).  ``keys`` reads
    the same values off the key-space table using the additivity of
    truncated expansions.
    """
    points = list(points)
    R_ = len(points)
    p = cfg.p
    if method == "keys":
        form = SieveForm(points, N, cfg)
        G = np.empty((R_, R_), dtype=float if p == 2 else complex)
        table = form.key_space
        step = max(1, _CHUNK // (R_ * form.ball.width))
        for s in range(0, R_, step):
            G[s:s + step] = table[form.key_difference_index(form.key_digits[s:s + step], form.key_digits)]
        return G
    if method != "reduce":
        raise ValueError(f"unknown method {method!r}")
    G = np.empty((R_, R_), dtype=float if p == 2 else complex)
    memo: dict = {}
    for i in range(R_):
        G[i, i] = cfg.q ** (points[i].n * (N + 1))
        for j in range(i + 1, R_):
            diff = reduced_difference(points[i], points[j], cfg)
            key = tuple(fraction_key(diff, N + 1, cfg).tolist())
            val = memo.get(key)
            if val is None:
                val = memo[key] = realize(char_ball_counts(diff, N, cfg), p)
            G[i, j] = val
            G[j, i] = np.conj(val)
    return G


@dataclass
class DualityReport:
    delta_row: float
    delta_col: float
    relative_gap: float
    trials: int
    violations: list = field(default_factory=list)
    row_iterations: int = 0
    col_iterations: int = 0

    @property
    def delta(self) -> float:
        return max(self.delta_row, self.delta_col)

    @property
    def ok(self) -> bool:
        return not self.violations


DUALITY_TOL = 1e-8
BOUND_GUARD = 1e-9


def duality_check(points: Sequence[FareyPoint], N: int, cfg: FieldConfig, trials: int = 32, seed: int = 0,
                  form: SieveForm | None = None) -> DualityReport:
    """Compare the top eigenvalues of A^H A and A A^H and test random sequences.

    Failures are recorded as violation records; nothing is raised.
    """
    if trials < 0:
        raise ValueError("trials must be non-negative")
    form = form or SieveForm(points, N, cfg)
    row = form.delta_opt(seed=derive_seed(seed, 11))
    col = operator_norm(form.column_gram(), seed=derive_seed(seed, 12))
    gap = abs(row.value - col.value) / max(abs(row.value), abs(col.value), 1e-300)
    rep = DualityReport(row.value, col.value, gap, trials, row_iterations=row.iterations,
                        col_iterations=col.iterations)
    if gap > DUALITY_TOL:
        rep.violations.append({"check": "delta_row_vs_col", "delta_row": row.value, "delta_col": col.value,
                               "relative_gap": gap})
    delta = rep.delta * (1 + BOUND_GUARD)
    if trials == 0:
        return rep
    a = np.stack([complex_uniform(derive_seed(seed, 1, t), form.ball.size) for t in range(trials)], axis=1)
    b = np.stack([complex_uniform(derive_seed(seed, 2, t), form.R) for t in range(trials)], axis=1)
    T, Td = form.T(a), form.T_dual(b)
    na, nb = (np.abs(a) ** 2).sum(axis=0), (np.abs(b) ** 2).sum(axis=0)
    for t in range(trials):
        if T[t] > delta * na[t]:
            rep.violations.append({"check": "T", "trial": t, "T": float(T[t]), "bound": float(delta * na[t])})
        if Td[t] > delta * nb[t]:
            rep.violations.append({"check": "T_dual", "trial": t, "T_dual": float(Td[t]),
                                   "bound": float(delta * nb[t])})
    return rep
