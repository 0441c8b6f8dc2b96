"""Ensemble input-redundancy weight enumerators of Kite prefix codes.

All coefficients are stored as natural logarithms (``-inf`` for zero).
The parity sequence for an input of weight ``l`` is a two-state Markov chain
whose flip probability at time t is the probability that ``l`` Bernoulli(p_t)
draws have odd parity; its weight enumerator follows from a forward trellis
recursion over polynomials in Z truncated at degree D.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, logsumexp

from .kite import PSequence, p_at


def parity_profile(k: int, r: int, pseq: PSequence | float) -> np.ndarray:
    """p_t for t = 0..r-1 (a float means a constant p-sequence)."""
    if isinstance(pseq, PSequence):
        return np.array([p_at(t, k, pseq) for t in range(r)], dtype=np.float64)
    return np.full(r, float(pseq))


def succ_prob_profile(ell: int, pseq, k: int, r: int) -> np.ndarray:
    """Pr{S_t = 1} for input weight ``ell``, by the one-step-per-bit recursion."""
    if not 0 <= ell <= k:
        raise ValueError(f"input weight must be in [0, {k}]")
    p = parity_profile(k, r, pseq)
    out = np.zeros(r)
    for _ in range(ell):
        out = out * (1.0 - p) + (1.0 - out) * p
    return out


def succ_prob_closed(ell, p) -> np.ndarray:
    """Closed form (1 - (1 - 2p)^ell) / 2."""
    return 0.5 * (1.0 - np.power(1.0 - 2.0 * np.asarray(p, dtype=np.float64), ell))


def _log_flip_probs(ells: np.ndarray, p: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """log Pr{S=1} and log Pr{S=0} for every (ell, t), numerically stable."""
    base = 1.0 - 2.0 * p[None, :]
    e = ells[:, None].astype(np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        # (1-2p)^l may be negative when p > 1/2
        powv = np.sign(base) ** ells[:, None] * np.exp(e * np.log(np.abs(base)))
        powv = np.where(ells[:, None] == 0, 1.0, powv)
        log_one = np.log(0.5 * (1.0 - powv))
        log_zero = np.log(0.5 * (1.0 + powv))
    return log_one, log_zero


def cond_wef_batch(ells, pseq, k: int, r: int, D: int | None = None) -> np.ndarray:
    """log A^(l)_j for each l in ``ells`` and j = 0..D (rows follow ``ells``)."""
    if D is None:
        D = r
    if D > r:
        D = r
    ells = np.asarray(ells, dtype=np.int64)
    p = parity_profile(k, r, pseq)
    log_one, log_zero = _log_flip_probs(ells, p)
    L = ells.size
    a0 = np.full((L, D + 1), -np.inf)
    a1 = np.full((L, D + 1), -np.inf)
    a0[:, 0] = 0.0
    for t in range(r):
        l1 = log_one[:, t : t + 1]
        l0 = log_zero[:, t : t + 1]
        n0 = np.logaddexp(l0 + a0, l1 + a1)
        n1 = np.full_like(a1, -np.inf)
        # multiplication by Z shifts the degree up by one
        n1[:, 1:] = np.logaddexp(l1 + a0[:, :-1], l0 + a1[:, :-1])
        a0, a1 = n0, n1
    return np.logaddexp(a0, a1)


@dataclass
class CondWef:
    ell: int
    coeffs: np.ndarray  # log A^(ell)_j, j = 0..D


def cond_wef(ell: int, pseq, k: int, r: int, D: int | None = None) -> CondWef:
    return CondWef(ell, cond_wef_batch([ell], pseq, k, r, D)[0])


def log_binom(n, k):
    n = np.asarray(n, dtype=np.float64)
    k = np.asarray(k, dtype=np.float64)
    return gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1)


@dataclass
class WefTable:
    """Ensemble IRWEF of K[k + r, k] truncated at total weight D.

    ``logA[i, j]`` is log A_{i,j}; ``logS`` / ``logSprime`` hold log S_d and
    log S'_d for d = 0..D.
    """

    k: int
    r: int
    D: int
    logA: np.ndarray
    logS: np.ndarray
    logSprime: np.ndarray

    @property
    def n(self) -> int:
        return self.k + self.r

    def log_A(self, i: int, j: int) -> float:
        if i + j > self.D or i > self.k or j > self.r:
            raise IndexError("coefficient outside the computed range")
        return float(self.logA[i, j])

    def to_csv_rows(self):
        ln10 = math.log(10.0)
        for d in range(self.D + 1):
            yield d, self.logS[d] / ln10, self.logSprime[d] / ln10


def ensemble_wef(k: int, pseq, r: int, D: int | None = None, chunk: int = 256) -> WefTable:
    """Aggregate binom(k, l) A^(l)(Z) into A_{l,j}, S_d and S'_d (log domain)."""
    n = k + r
    if D is None:
        D = n
    if D > n:
        raise ValueError(f"truncation weight D={D} exceeds n={n}")
    ell_max = min(k, D)
    jmax = min(r, D)
    logA = np.full((ell_max + 1, jmax + 1), -np.inf)
    for start in range(0, ell_max + 1, chunk):
        ells = np.arange(start, min(ell_max + 1, start + chunk))
        coeffs = cond_wef_batch(ells, pseq, k, r, jmax)
        logA[ells, :] = log_binom(k, ells)[:, None] + coeffs
    i_idx = np.arange(ell_max + 1)[:, None]
    j_idx = np.arange(jmax + 1)[None, :]
    total = i_idx + j_idx
    logS = np.full(D + 1, -np.inf)
    logSp = np.full(D + 1, -np.inf)
    with np.errstate(divide="ignore"):
        frac = np.log(i_idx / k) + np.zeros_like(logA)
    for d in range(D + 1):
        mask = total == d
        if mask.any():
            logS[d] = logsumexp(logA[mask])
            logSp[d] = logsumexp((logA + frac)[mask])
    return WefTable(k, r, D, logA, logS, logSp)


def random_ensemble_logS(k: int, r: int, D: int | None = None) -> np.ndarray:
    """Closed-form log S_d of the p = 1/2 ensemble:
    [d=0] + sum_{i>=1, i+j=d} C(k,i) C(r,j) 2^-r."""
    n = k + r
    if D is None:
        D = n
    out = np.full(D + 1, -np.inf)
    out[0] = 0.0
    for d in range(1, D + 1):
        i = np.arange(max(1, d - r), min(k, d) + 1)
        if i.size:
            terms = log_binom(k, i) + log_binom(r, d - i) - r * math.log(2.0)
            out[d] = logsumexp(terms)
    return out
