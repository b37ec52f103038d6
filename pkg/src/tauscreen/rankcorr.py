"""Kendall's tau statistics and derived correlation estimators.

This module provides the pairwise concordance (Kendall's tau) statistic, the
sine-mapped correlation matrix built from it, a plain Pearson baseline, and a
leave-one-out (jackknife) estimator of the asymptotic variance of the tau
statistic.

Conventions
-----------
* tau is the literal pairwise average ``2/(n(n-1)) * sum_{i<i'} sign(dx*dy)``:
  tied pairs contribute 0 through ``sign(0) == 0`` and the denominator is
  always ``n(n-1)/2`` (no tie correction).
* All pairwise statistics have exact integer numerators, so the fast and the
  quadratic code paths agree bit-for-bit, independent of evaluation order.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateColumnError, InvalidInputError

CORR_KINDS = ("kendall-raw", "kendall-sine", "pearson")

# The fastest matrix path materializes one n x n sign table per column; cap
# its footprint (float32 bytes) before switching to the leaner paths.
DEFAULT_CUBE_BUDGET_BYTES = 1 << 30
# Above this n, n^2 partial sums would no longer be exact in float32.
_CUBE_MAX_N = 4096


@dataclass(frozen=True, eq=False)
class DataMatrix:
    """An n x p observation matrix with optional column labels."""

    values: np.ndarray
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 2:
            raise InvalidInputError(f"data must be 2-D, got shape {v.shape}")
        n, p = v.shape
        if n < 2:
            raise InvalidInputError(f"need at least 2 observations, got {n}")
        if p < 1:
            raise InvalidInputError("need at least 1 variable")
        if not np.all(np.isfinite(v)):
            raise InvalidInputError("data contains non-finite values")
        if self.labels is not None and len(self.labels) != p:
            raise InvalidInputError(
                f"{len(self.labels)} labels for {p} columns"
            )
        object.__setattr__(self, "values", v)
        if self.labels is not None:
            object.__setattr__(self, "labels", tuple(str(s) for s in self.labels))

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def p(self) -> int:
        return self.values.shape[1]

    def column_name(self, j: int) -> str:
        return self.labels[j] if self.labels is not None else str(j)


@dataclass(frozen=True, eq=False)
class CorrMatrix:
    """A p x p symmetric correlation estimate.

    ``kind`` records which estimator produced it: "kendall-raw" for plain tau,
    "kendall-sine" for the sine-mapped latent-correlation estimate, "pearson"
    for the linear baseline.
    """

    entries: np.ndarray
    kind: str

    def __post_init__(self):
        if self.kind not in CORR_KINDS:
            raise InvalidInputError(f"unknown correlation kind {self.kind!r}")
        e = np.asarray(self.entries, dtype=np.float64)
        if e.ndim != 2 or e.shape[0] != e.shape[1]:
            raise InvalidInputError("correlation matrix must be square")
        if not np.array_equal(e, e.T):
            raise InvalidInputError("correlation matrix must be symmetric")
        off = e[~np.eye(e.shape[0], dtype=bool)]
        if off.size and (np.min(off) < -1.0 or np.max(off) > 1.0):
            raise InvalidInputError("off-diagonal correlations must lie in [-1, 1]")
        if not np.all(np.diag(e) == 1.0):
            raise InvalidInputError("diagonal entries must equal 1")
        object.__setattr__(self, "entries", e)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True, eq=False)
class JackknifeVarMatrix:
    """Pairwise leave-one-out variance estimates; diagonal fixed at 0."""

    entries: np.ndarray

    def __post_init__(self):
        e = np.asarray(self.entries, dtype=np.float64)
        if e.ndim != 2 or e.shape[0] != e.shape[1]:
            raise InvalidInputError("variance matrix must be square")
        if not np.array_equal(e, e.T):
            raise InvalidInputError("variance matrix must be symmetric")
        if np.any(e < 0):
            raise InvalidInputError("variance estimates must be nonnegative")
        object.__setattr__(self, "entries", e)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]


def as_data_matrix(data) -> DataMatrix:
    """Accept either a DataMatrix or a raw 2-D array."""
    if isinstance(data, DataMatrix):
        return data
    return DataMatrix(np.asarray(data, dtype=np.float64))


def _check_pair(x, y) -> tuple[np.ndarray, np.ndarray]:
    xv = np.asarray(x, dtype=np.float64).ravel()
    yv = np.asarray(y, dtype=np.float64).ravel()
    if xv.shape != yv.shape:
        raise InvalidInputError("x and y must have equal length")
    if xv.size < 2:
        raise InvalidInputError("need at least 2 observations")
    if not (np.all(np.isfinite(xv)) and np.all(np.isfinite(yv))):
        raise InvalidInputError("inputs contain non-finite values")
    return xv, yv


def kendall_tau_naive(x, y) -> float:
    """Kendall's tau by direct evaluation of all observation pairs.

    Serves as the quadratic-time reference implementation; tied pairs
    contribute zero and the denominator is n(n-1)/2.
    """
    xv, yv = _check_pair(x, y)
    n = xv.size
    sx = np.sign(xv[:, None] - xv[None, :])
    sy = np.sign(yv[:, None] - yv[None, :])
    total = float(np.sum(sx * sy))  # = 2 * sum over unordered pairs, exact
    return total / (n * (n - 1))


def _count_tied_pairs(sorted_vals: np.ndarray) -> int:
    """Number of unordered tied pairs in an already-sorted 1-D array."""
    if sorted_vals.size < 2:
        return 0
    change = np.flatnonzero(sorted_vals[1:] != sorted_vals[:-1])
    starts = np.concatenate(([0], change + 1))
    ends = np.concatenate((change + 1, [sorted_vals.size]))
    runs = ends - starts
    return int(np.sum(runs * (runs - 1)) // 2)


def _inversions(ranks: np.ndarray) -> int:
    """Strict inversions (i < j with ranks[i] > ranks[j]) via a Fenwick tree."""
    size = int(ranks.max()) + 2 if ranks.size else 1
    tree = [0] * size
    inv = 0
    seen = 0
    for r in ranks:
        # count previously inserted values <= r
        i = int(r) + 1
        le = 0
        while i > 0:
            le += tree[i - 1]
            i -= i & (-i)
        inv += seen - le
        # insert r
        i = int(r) + 1
        while i <= size - 1:
            tree[i - 1] += 1
            i += i & (-i)
        seen += 1
    return inv


def kendall_tau_fast(x, y) -> float:
    """Kendall's tau in O(n log n) by sorting and inversion counting.

    Agrees with :func:`kendall_tau_naive` exactly: both reduce to the same
    integer numerator over the fixed denominator n(n-1)/2.
    """
    xv, yv = _check_pair(x, y)
    n = xv.size
    order = np.lexsort((yv, xv))
    xs = xv[order]
    ys = yv[order]

    n0 = n * (n - 1) // 2
    ties_x = _count_tied_pairs(xs)
    ties_y = _count_tied_pairs(np.sort(yv))
    # joint ties: runs of identical (x, y); ys is sorted within each x-run
    pair_change = np.flatnonzero((xs[1:] != xs[:-1]) | (ys[1:] != ys[:-1]))
    starts = np.concatenate(([0], pair_change + 1))
    ends = np.concatenate((pair_change + 1, [n]))
    runs = ends - starts
    ties_xy = int(np.sum(runs * (runs - 1)) // 2)

    # Discordant pairs are exactly the strict inversions of y in x-order:
    # within x-ties y is ascending (lexsort), so those pairs never count.
    uniq = np.unique(ys)
    ranks = np.searchsorted(uniq, ys)
    discordant = _inversions(ranks)

    numerator = n0 - ties_x - ties_y + ties_xy - 2 * discordant
    return (2 * numerator) / (n * (n - 1))


def _sign_flat(values: np.ndarray) -> np.ndarray:
    """float32 matrix F[j] = ravel of the n x n sign table of column j.

    Signs are taken in float64 before the narrowing cast; the cast is exact
    because entries are -1, 0, or 1.
    """
    n, p = values.shape
    flat = np.empty((p, n * n), dtype=np.float32)
    for j in range(p):
        col = values[:, j]
        flat[j] = np.sign(col[:, None] - col[None, :]).ravel()
    return flat


def _pair_chunks(p: int, chunk: int = 512):
    pairs = [(j, k) for j in range(p) for k in range(j + 1, p)]
    for start in range(0, len(pairs), chunk):
        yield pairs[start : start + chunk]


def _sign_gram(values: np.ndarray, rows) -> np.ndarray:
    """Sum of A_i @ A_i.T over rows i, where A_i = sign(cols - col_i).

    Entry (j, k) accumulates the full double sum of sign products for the
    column pair; every partial sum is an exact integer.
    """
    p = values.shape[1]
    cols = np.ascontiguousarray(values.T)
    total = np.zeros((p, p))
    for i in rows:
        a = np.sign(cols - cols[:, i][:, None]).astype(np.float32)
        total += (a @ a.T).astype(np.float64)
    return total


def kendall_matrix(data, threads: int = 1, cube_budget_bytes: int = DEFAULT_CUBE_BUDGET_BYTES) -> CorrMatrix:
    """Pairwise Kendall's tau matrix (kind "kendall-raw", unit diagonal).

    Three code paths, all bit-identical because every pairwise numerator is
    an exact integer: a single matrix product over flattened per-column sign
    tables (fastest; needs ~4 p n^2 bytes within ``cube_budget_bytes``), an
    accumulation of one small sign matrix per observation (O(p n) memory),
    and a per-pair O(n log n) fallback for very long samples.
    """
    dm = as_data_matrix(data)
    n, p = dm.n, dm.p
    out = np.eye(p)
    if p == 1:
        return CorrMatrix(out, "kendall-raw")

    if n <= _CUBE_MAX_N and 4 * p * n * n <= cube_budget_bytes:
        flat = _sign_flat(dm.values)
        total = (flat @ flat.T).astype(np.float64)  # exact integer sums
    elif n <= 65536:
        if threads > 1 and n >= 2 * threads:
            bounds = np.linspace(0, n, threads + 1, dtype=int)
            jobs = [range(bounds[t], bounds[t + 1]) for t in range(threads)]
            with ThreadPoolExecutor(max_workers=threads) as pool:
                parts = list(pool.map(lambda rows: _sign_gram(dm.values, rows), jobs))
            total = sum(parts)
        else:
            total = _sign_gram(dm.values, range(n))
    else:
        cols = dm.values.T

        def fill(chunk):
            for j, k in chunk:
                out[j, k] = out[k, j] = kendall_tau_fast(cols[j], cols[k])

        chunks = list(_pair_chunks(p))
        if threads > 1 and len(chunks) > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                list(pool.map(fill, chunks))
        else:
            for chunk in chunks:
                fill(chunk)
        return CorrMatrix(out, "kendall-raw")

    tau = total / (n * (n - 1))
    np.fill_diagonal(tau, 1.0)
    return CorrMatrix(tau, "kendall-raw")


def sine_transform(tau: CorrMatrix) -> CorrMatrix:
    """Map a raw tau matrix to the latent-correlation scale sin(pi/2 * tau)."""
    if not isinstance(tau, CorrMatrix) or tau.kind != "kendall-raw":
        raise InvalidInputError("sine_transform expects a kendall-raw CorrMatrix")
    out = np.sin((np.pi / 2.0) * tau.entries)
    np.fill_diagonal(out, 1.0)
    return CorrMatrix(out, "kendall-sine")


def pearson_matrix(data) -> CorrMatrix:
    """Sample Pearson correlation matrix.

    Columns are centered and scaled to unit variance (divisor n) first, so the
    result is a correlation matrix even for unstandardized input.
    """
    dm = as_data_matrix(data)
    v = dm.values
    n = dm.n
    centered = v - v.mean(axis=0)
    sd = np.sqrt(np.mean(centered**2, axis=0))
    zero = np.flatnonzero(sd == 0.0)
    if zero.size:
        j = int(zero[0])
        raise DegenerateColumnError(dm.column_name(j))
    z = centered / sd
    corr = (z.T @ z) / n
    corr = (corr + corr.T) / 2.0
    corr = np.clip(corr, -1.0, 1.0)
    np.fill_diagonal(corr, 1.0)
    return CorrMatrix(corr, "pearson")


def jackknife_variance(data, j: int, jp: int) -> float:
    """Leave-one-out variance estimate for the tau statistic of columns j, jp.

    Direct evaluation: for each held-out observation i', average the sign
    products against all others, then take the scaled squared spread of those
    leave-one-out means around tau.
    """
    dm = as_data_matrix(data)
    n = dm.n
    if n < 3:
        raise InvalidInputError("jackknife variance needs n >= 3")
    if j == jp:
        raise InvalidInputError("column indices must differ")
    x = dm.values[:, j]
    y = dm.values[:, jp]
    g = np.sign(x[:, None] - x[None, :]) * np.sign(y[:, None] - y[None, :])
    colsums = g.sum(axis=0)  # sum over i != i' (diagonal is 0)
    tau = float(g.sum()) / (n * (n - 1))
    loo = colsums / (n - 1)
    return 4.0 * (n - 1) / (n - 2) ** 2 * float(np.sum((loo - tau) ** 2))


def _jackknife_accumulate(values: np.ndarray, rows) -> tuple[np.ndarray, np.ndarray]:
    """Exact-integer accumulation of leave-one-out column sums and squares."""
    p = values.shape[1]
    cols = np.ascontiguousarray(values.T, dtype=np.float64)
    s1 = np.zeros((p, p))
    s2 = np.zeros((p, p))
    for i in rows:
        a = np.sign(cols - cols[:, i][:, None]).astype(np.float32)
        r = (a @ a.T).astype(np.float64)  # exact integers for n < 2^24
        s1 += r
        s2 += r * r
    return s1, s2


def jackknife_matrix(data, threads: int = 1) -> JackknifeVarMatrix:
    """Leave-one-out tau variance estimates for every column pair.

    Cost is O(p^2 n^2) overall, organized as n rank-1 style matrix products so
    the heavy work runs in BLAS. All intermediate sums are exact integers,
    which makes the result independent of thread count and scheduling.
    """
    dm = as_data_matrix(data)
    n, p = dm.n, dm.p
    if n < 3:
        raise InvalidInputError("jackknife variance needs n >= 3")

    if threads > 1 and n >= 2 * threads:
        bounds = np.linspace(0, n, threads + 1, dtype=int)
        jobs = [range(bounds[t], bounds[t + 1]) for t in range(threads)]
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda rows: _jackknife_accumulate(dm.values, rows), jobs))
        s1 = sum(part[0] for part in parts)
        s2 = sum(part[1] for part in parts)
    else:
        s1, s2 = _jackknife_accumulate(dm.values, range(n))

    tau = s1 / (n * (n - 1))
    spread = s2 / (n - 1) ** 2 - 2.0 * tau * s1 / (n - 1) + n * tau * tau
    omega2 = 4.0 * (n - 1) / (n - 2) ** 2 * spread
    omega2 = np.maximum(omega2, 0.0)
    np.fill_diagonal(omega2, 0.0)
    return JackknifeVarMatrix(omega2)
