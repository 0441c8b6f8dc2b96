"""Outer RS code performance over a memoryless q-ary symmetric channel.

The inner decoder's residual bit errors (probability P_b) are modeled as
independent, so a symbol is correct with probability P_c = (1 - P_b)^m and
takes each of the q - 1 wrong values with probability P_e.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy.special import logsumexp


@dataclass(frozen=True)
class QscParams:
    P_b: float
    m: int
    P_c: float
    P_e: float
    log_P_c: float
    log_P_e: float  # -inf when P_b = 0
    log_1mPc: float  # log(1 - P_c) = log((q-1) P_e)

    @property
    def q(self) -> int:
        return 1 << self.m


def qsc_params(P_b: float, m: int) -> QscParams:
    if not 0.0 <= P_b <= 1.0:
        raise ValueError("P_b must lie in [0, 1]")
    q = 1 << m
    log_pc = m * math.log1p(-P_b) if P_b < 1.0 else -math.inf
    # 1 - (1-P_b)^m without cancellation
    one_minus = -math.expm1(log_pc) if P_b < 1.0 else 1.0
    log_1m = math.log(one_minus) if one_minus > 0 else -math.inf
    log_pe = log_1m - math.log(q - 1)
    return QscParams(P_b, m, math.exp(log_pc), one_minus / (q - 1), log_pc, log_pe, log_1m)


def _lbinom(n: int, k: int) -> float:
    return math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)


def _log_mul(a: float, b: float) -> float:
    if a == -math.inf or b == -math.inf:
        return -math.inf
    return a + b


def _times(count: int, logx: float) -> float:
    """count * logx with 0 * (-inf) = 0."""
    if count == 0:
        return 0.0
    return count * logx


def log_p_err(N: int, K: int, m: int, P_b: float) -> float:
    """log of the probability that more than t_max symbols are wrong."""
    t_max = (N - K) // 2
    s = qsc_params(P_b, m)
    terms = [
        _log_mul(_times(t, s.log_1mPc), _times(N - t, s.log_P_c)) + _lbinom(N, t)
        for t in range(t_max + 1, N + 1)
    ]
    return float(logsumexp(terms))


def p_err(N: int, K: int, m: int, P_b: float) -> float:
    return math.exp(log_p_err(N, K, m, P_b))


@lru_cache(maxsize=32)
def rs_weight_distribution(N: int, K: int, q: int) -> tuple:
    """Exact weight distribution A_0..A_N of an MDS [N, K] code over GF(q)."""
    d_min = N - K + 1
    A = [0] * (N + 1)
    A[0] = 1
    for d in range(d_min, N + 1):
        # Horner in q over sum_i (-1)^i C(d-1, i) q^(d-d_min-i)
        acc = 0
        c = 1  # C(d-1, i)
        for i in range(d - d_min + 1):
            acc = acc * q + (-c if i % 2 else c)
            c = c * (d - 1 - i) // (i + 1)
        A[d] = math.comb(N, d) * (q - 1) * acc
    return tuple(A)


def _log_int(x: int) -> float:
    return math.log(x) if x > 0 else -math.inf


@lru_cache(maxsize=32)
def _mis_terms(N: int, K: int, m: int) -> tuple[np.ndarray, np.ndarray]:
    """Channel-independent part of every miscorrection term and its error weight.

    Terms are indexed by (d, i, j, h): i positions of a weight-d codeword's
    support received exactly, j received as another nonzero value, h errors
    outside the support, with i+j+h > t_max and d-i+h <= t_max.
    """
    q = 1 << m
    t_max = (N - K) // 2
    A = rs_weight_distribution(N, K, q)
    lq2 = math.log(q - 2) if q > 2 else -math.inf
    lq1 = math.log(q - 1)
    base, weight = [], []
    for d in range(N - K + 1, N + 1):
        lad = _log_int(A[d])
        if lad == -math.inf:
            continue
        # d - i + h <= t_max  =>  i >= d - t_max
        for i in range(max(0, d - t_max), d + 1):
            for h in range(0, min(N - d, t_max - (d - i)) + 1):
                for j in range(0, d - i + 1):
                    w = i + j + h
                    if w <= t_max:
                        continue
                    t = lad + _lbinom(d, i) + _lbinom(d - i, j) + _lbinom(N - d, h)
                    base.append(t + _times(j, lq2) + h * lq1)
                    weight.append(w)
    return np.array(base), np.array(weight, dtype=np.int64)


def log_p_mis(N: int, K: int, m: int, P_b: float) -> float:
    """log miscorrection probability of a bounded-distance decoder."""
    s = qsc_params(P_b, m)
    base, w = _mis_terms(N, K, m)
    if base.size == 0 or s.log_P_e == -math.inf:
        return -math.inf
    # w >= 1 always; N - w may be 0, where 0 * log P_c must stay 0
    rest = N - w
    lpc = np.zeros(w.shape)
    lpc[rest > 0] = rest[rest > 0] * s.log_P_c
    return float(logsumexp(base + w * s.log_P_e + lpc))


def p_mis(N: int, K: int, m: int, P_b: float) -> float:
    return math.exp(log_p_mis(N, K, m, P_b))


def mceliece_swanson_cap(t_max: int) -> Fraction:
    """1 / t_max! as an exact rational."""
    if t_max < 0:
        raise ValueError("t_max must be nonnegative")
    return Fraction(1, math.factorial(t_max))


def log10_mceliece_swanson_cap(t_max: int) -> float:
    return -math.lgamma(t_max + 1) / math.log(10.0)
