"""Kite codes: p-sequences, pseudo-random parity rows and the accumulator encoder."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .prng import fraction_threshold, splitmix64

N_WINDOWS = 9
# draws generated per chunk while realizing rows
_CHUNK_DRAWS = 1 << 22


@dataclass(frozen=True)
class PSequence:
    """Nine Bernoulli parameters ``(q_9, q_8, ..., q_1)`` keyed by decoding-rate window.

    ``q_l`` applies to parity index ``t`` when ``l/10 <= k/(t+k) < (l+1)/10``;
    rate 1.0 (``t = 0``) belongs to the ``q_9`` window.
    """

    q: tuple

    def __post_init__(self):
        q = tuple(float(x) for x in self.q)
        if len(q) != N_WINDOWS:
            raise ValueError(f"a p-sequence needs {N_WINDOWS} parameters, got {len(q)}")
        if not all(0.0 < x < 1.0 for x in q):
            raise ValueError("every q parameter must lie in (0, 1)")
        object.__setattr__(self, "q", q)

    @classmethod
    def constant(cls, p: float) -> "PSequence":
        return cls((p,) * N_WINDOWS)

    def q_of(self, window: int) -> float:
        """Parameter for window ``window`` in 1..9."""
        if not 1 <= window <= N_WINDOWS:
            raise ValueError(f"window index out of range: {window}")
        return self.q[N_WINDOWS - window]

    def replace(self, window: int, value: float) -> "PSequence":
        q = list(self.q)
        q[N_WINDOWS - window] = value
        return PSequence(tuple(q))


# p-sequence designed for k = 1890
PSEQ_1890 = PSequence((0.0249, 0.0072, 0.0045, 0.0034, 0.0021, 0.0016, 0.0010, 0.0006, 0.0004))
# p-sequence for the k = 51150 inner code of the RS-Kite example
PSEQ_51150 = PSequence((0.00084, 0.00020, 0.00015, 0.00009, 0.00006, 0.00006, 0.00004, 0.00002, 0.00001))


class RateOutOfRange(ValueError):
    """Parity index beyond the rate-0.1 design range."""


def window_of(t: int, k: int) -> int:
    """Window index l in 1..9 with ``l/10 <= k/(t+k) < (l+1)/10`` (t=0 -> 9)."""
    if t < 0:
        raise ValueError("parity index must be nonnegative")
    w = (10 * k) // (t + k)
    if w < 1:
        raise RateOutOfRange(f"rate {k}/{t + k} is below 0.1")
    return min(w, N_WINDOWS)


def max_parity(k: int) -> int:
    """Largest number of parity bits whose rows all stay within rate >= 0.1."""
    # row t valid iff 10k >= t + k, i.e. t <= 9k
    return 9 * k + 1


def rows_per_window(k: int, r: int) -> dict[int, int]:
    """Number of rows among t = 0..r-1 drawn from each window."""
    if r > 0:
        window_of(r - 1, k)
    t = np.arange(r, dtype=np.int64)
    w = np.minimum((10 * k) // (t + k), N_WINDOWS)
    counts = np.bincount(w, minlength=N_WINDOWS + 1)
    return {i: int(counts[i]) for i in range(1, N_WINDOWS + 1)}


def p_at(t: int, k: int, pseq: PSequence) -> float:
    return pseq.q_of(window_of(t, k))


@dataclass(frozen=True)
class KiteCodeSpec:
    """One Kite code instance: dimension, PRNG seed and p-sequence."""

    k: int
    seed: int
    pseq: PSequence

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("dimension k must be positive")
        if not 0 <= self.seed < 1 << 64:
            raise ValueError("seed must be a 64-bit unsigned integer")


def sample_rows(spec: KiteCodeSpec, t0: int, t1: int) -> list[np.ndarray]:
    """Rows ``t0..t1-1`` of H_v; row t consumes draws ``t*k .. t*k+k-1``."""
    k = spec.k
    rows: list[np.ndarray] = []
    per_chunk = max(1, _CHUNK_DRAWS // k)
    t = t0
    while t < t1:
        t_end = min(t1, t + per_chunk)
        nrows = t_end - t
        draws = splitmix64(spec.seed, t * k, nrows * k).reshape(nrows, k) >> np.uint64(11)
        thr = np.array(
            [fraction_threshold(p_at(tt, k, spec.pseq)) for tt in range(t, t_end)], dtype=np.uint64
        )
        hit = draws < thr[:, None]
        r_idx, c_idx = np.nonzero(hit)
        splits = np.searchsorted(r_idx, np.arange(1, nrows))
        rows.extend(np.split(c_idx.astype(np.int64), splits))
        t = t_end
    return rows


def sample_row(t: int, spec: KiteCodeSpec) -> np.ndarray:
    """Sorted information indices of parity check ``t``."""
    return sample_rows(spec, t, t + 1)[0]


@dataclass
class ParityRealization:
    """Sparse H = (H_v, H_w): explicit H_v rows, implicit dual-diagonal H_w.

    Check ``t`` involves information bits ``rows[t]``, parity bit ``t`` and,
    for ``t >= 1``, parity bit ``t-1``. Columns are ordered ``(v, w)``.
    """

    k: int
    rows: list = field(default_factory=list)

    @property
    def r(self) -> int:
        return len(self.rows)

    @property
    def n(self) -> int:
        return self.k + self.r

    def prefix(self, r: int) -> "ParityRealization":
        if r > self.r:
            raise ValueError(f"realization has only {self.r} rows, asked for {r}")
        return ParityRealization(self.k, self.rows[:r])

    def edges(self) -> tuple[np.ndarray, np.ndarray]:
        """(check index, variable index) for every edge, sorted by check."""
        r, k = self.r, self.k
        if r == 0:
            return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64)
        lens = np.fromiter((row.size for row in self.rows), dtype=np.int64, count=r)
        t = np.arange(r, dtype=np.int64)
        chk = np.concatenate([np.repeat(t, lens), t, t[1:]])
        var = np.concatenate([np.concatenate(self.rows).astype(np.int64), k + t, k + t[1:] - 1])
        order = np.argsort(chk, kind="stable")
        return chk[order], var[order]

    def dense(self) -> np.ndarray:
        H = np.zeros((self.r, self.n), dtype=np.uint8)
        for t, row in enumerate(self.rows):
            H[t, row] = 1
            H[t, self.k + t] = 1
            if t > 0:
                H[t, self.k + t - 1] = 1
        return H

    def syndrome(self, c) -> np.ndarray:
        c = np.asarray(c, dtype=np.uint8)
        if c.shape[-1] != self.n:
            raise ValueError(f"word length {c.shape[-1]} != n = {self.n}")
        v, w = c[: self.k], c[self.k :]
        s = np.array([np.bitwise_xor.reduce(v[row]) if row.size else 0 for row in self.rows], dtype=np.uint8)
        s ^= w
        s[1:] ^= w[:-1]
        return s

    def column_weights(self) -> np.ndarray:
        wts = np.zeros(self.k, dtype=np.int64)
        for row in self.rows:
            wts[row] += 1
        return wts


class KiteCode:
    """Lazily realized infinite Kite code; rows are cached as they are needed."""

    def __init__(self, spec: KiteCodeSpec):
        self.spec = spec
        self._rows: list[np.ndarray] = []

    @property
    def k(self) -> int:
        return self.spec.k

    def ensure(self, r: int) -> None:
        if r > len(self._rows):
            window_of(r - 1, self.k)
            self._rows.extend(sample_rows(self.spec, len(self._rows), r))

    def realization(self, n: int) -> ParityRealization:
        if n < self.k:
            raise ValueError(f"prefix length n={n} is smaller than k={self.k}")
        r = n - self.k
        self.ensure(r)
        return ParityRealization(self.k, self._rows[:r])


def build_parity_check(spec: KiteCodeSpec, n: int) -> ParityRealization:
    return KiteCode(spec).realization(n)


def parity_sums(v: np.ndarray, rows) -> np.ndarray:
    """s_t = XOR of v over row t."""
    v = np.asarray(v, dtype=np.uint8)
    return np.array([np.bitwise_xor.reduce(v[row]) if row.size else 0 for row in rows], dtype=np.uint8)


class KiteEncoder:
    """Recursive accumulator encoder; ``extend`` continues the parity stream."""

    def __init__(self, code: KiteCode | KiteCodeSpec, v):
        if isinstance(code, KiteCodeSpec):
            code = KiteCode(code)
        v = np.asarray(v, dtype=np.uint8)
        if v.shape != (code.k,):
            raise ValueError(f"information word must have {code.k} bits, got shape {v.shape}")
        if np.any(v > 1):
            raise ValueError("information bits must be 0/1")
        self.code = code
        self.v = v
        self.t = 0
        self.w_prev = 0

    def extend(self, count: int) -> np.ndarray:
        if count < 0:
            raise ValueError("parity count must be nonnegative")
        self.code.ensure(self.t + count)
        s = parity_sums(self.v, self.code._rows[self.t : self.t + count])
        w = np.bitwise_xor.accumulate(np.concatenate([[self.w_prev], s]).astype(np.uint8))[1:]
        if count:
            self.w_prev = int(w[-1])
        self.t += count
        return w


def kite_encode(v, spec: KiteCodeSpec | KiteCode, T: int) -> np.ndarray:
    """Parity bits w[0..T) of information word v."""
    return KiteEncoder(spec, v).extend(T)


def write_alist(H: ParityRealization, path) -> None:
    """Export H = (H_v, H_w) in the alist convention (1-based, zero-padded)."""
    n, m = H.n, H.r
    check_cols = []
    var_checks: list[list[int]] = [[] for _ in range(n)]
    chk, var = H.edges()
    for c, v in zip(chk.tolist(), var.tolist()):
        var_checks[v].append(c + 1)
    for t in range(m):
        check_cols.append((var[chk == t] + 1).tolist())
    col_w = [len(x) for x in var_checks]
    row_w = [len(x) for x in check_cols]
    max_c = max(col_w, default=0)
    max_r = max(row_w, default=0)
    lines = [f"{n} {m}", f"{max_c} {max_r}", " ".join(map(str, col_w)), " ".join(map(str, row_w))]
    for x in var_checks:
        lines.append(" ".join(map(str, x + [0] * (max_c - len(x)))))
    for x in check_cols:
        lines.append(" ".join(map(str, sorted(x) + [0] * (max_r - len(x)))))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_alist(path) -> np.ndarray:
    """Dense 0/1 matrix from an alist file (zeros in index lists are padding)."""
    with open(path) as fh:
        tokens = fh.read().split()
    it = iter(int(x) for x in tokens)
    n, m = next(it), next(it)
    max_c, _ = next(it), next(it)
    col_w = [next(it) for _ in range(n)]
    [next(it) for _ in range(m)]
    H = np.zeros((m, n), dtype=np.uint8)
    for j in range(n):
        idx = [next(it) for _ in range(max_c)]
        for i in idx[: col_w[j]]:
            H[i - 1, j] = 1
    return H
