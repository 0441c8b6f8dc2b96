"""ML-decoding error bounds from a weight spectrum.

Per-weight terms combine Divsalar's exponential bound with the union term,
min{exp(-n E), S_d Q(sqrt(2 d gamma))}. The refined bound keeps only the
terms d <= 2 d* and adds the probability that more than d* hard-decision
errors occur; the optimized bound minimizes it over d*.
Everything is evaluated with natural logarithms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import log_ndtr, logsumexp

from .wef import WefTable, log_binom


def log_q(x) -> np.ndarray:
    """log Q(x), accurate far into the tail."""
    return log_ndtr(-np.asarray(x, dtype=np.float64))


def divsalar_beta(delta: float, gamma: float, rn: float) -> float:
    """Optimizing parameter of the Divsalar exponent (0 < delta < 1, rn > 0)."""
    a = (1.0 - delta) / delta
    inner = gamma * a * 2.0 / (1.0 - math.exp(-2.0 * rn)) + a * a * ((1.0 + gamma) ** 2 - 1.0)
    return math.sqrt(inner) - a * (1.0 + gamma)


def divsalar_exponent(delta: float, beta: float, gamma: float, rn: float) -> float:
    return (
        -rn
        + 0.5 * math.log(beta + (1.0 - beta) * math.exp(2.0 * rn))
        + beta * gamma * delta / (1.0 - (1.0 - beta) * delta)
    )


def divsalar_term(d: int, logS_d: float, n: int, sigma2: float, es: float = 1.0) -> float:
    """log min{exp(-n E(delta, beta, gamma)), S_d Q(sqrt(2 d gamma))}.

    The exponential branch is used only when it is well defined: 0 < d < n
    and S_d > 1 (r_n > 0). The optimizing beta is clipped to (0, 1].
    """
    if not 1 <= d <= n:
        raise ValueError(f"weight d={d} outside [1, {n}]")
    if logS_d == -math.inf:
        return -math.inf
    gamma = es / (2.0 * sigma2)
    log_union = logS_d + float(log_q(math.sqrt(2.0 * d * gamma)))
    if d == n:
        return log_union
    delta = d / n
    rn = logS_d / n
    if rn <= 0.0:
        return log_union
    beta = divsalar_beta(delta, gamma, rn)
    beta = min(max(beta, 1e-300), 1.0)
    E = divsalar_exponent(delta, beta, gamma, rn)
    return min(-n * E, log_union)


@dataclass(frozen=True)
class BoundConfig:
    n: int
    sigma2: float
    mode: str = "frame"  # "frame" uses S_d, "bit" uses S'_d

    def __post_init__(self):
        if self.mode not in ("frame", "bit"):
            raise ValueError(f"unknown bound mode {self.mode!r}")
        if not self.sigma2 > 0:
            raise ValueError("noise variance must be positive")

    @property
    def gamma(self) -> float:
        return 1.0 / (2.0 * self.sigma2)


def _spectrum(wef: WefTable, mode: str) -> np.ndarray:
    return wef.logS if mode == "frame" else wef.logSprime


def log_terms(wef: WefTable, cfg: BoundConfig) -> np.ndarray:
    """log of the per-weight terms for d = 1..D (index d-1)."""
    spec = _spectrum(wef, cfg.mode)
    return np.array([divsalar_term(d, float(spec[d]), cfg.n, cfg.sigma2) for d in range(1, wef.D + 1)])


def union_divsalar_bound(wef: WefTable, cfg: BoundConfig) -> float:
    """Sum of per-weight terms over the full spectrum, clipped at 1."""
    if wef.D < cfg.n:
        raise ValueError(f"union bound needs the full spectrum (D={wef.D} < n={cfg.n})")
    return min(1.0, math.exp(logsumexp(log_terms(wef, cfg))))


def p_bsc(sigma2: float) -> float:
    return math.exp(float(log_q(1.0 / math.sqrt(sigma2))))


def log_bsc_tail(n: int, d_star: int, sigma2: float) -> float:
    """log sum_{t > d*} C(n,t) p^t (1-p)^(n-t) with p = Q(1/sigma)."""
    if not 0 <= d_star <= n:
        raise ValueError(f"list radius must be in [0, {n}]")
    if d_star == n:
        return -math.inf
    lp = float(log_q(1.0 / math.sqrt(sigma2)))
    l1p = math.log1p(-math.exp(lp))
    t = np.arange(d_star + 1, n + 1)
    return float(logsumexp(log_binom(n, t) + t * lp + (n - t) * l1p))


def bsc_tail(n: int, d_star: int, sigma2: float) -> float:
    return math.exp(log_bsc_tail(n, d_star, sigma2))


def _refined_curve(log_t: np.ndarray, n: int, sigma2: float, max_dstar: int) -> np.ndarray:
    """Refined bound (log) for every d* in 0..max_dstar."""
    # cumulative log-sum of terms d = 1..2d*
    cum = np.logaddexp.accumulate(np.concatenate([[-np.inf], log_t]))
    out = np.empty(max_dstar + 1)
    lp = float(log_q(1.0 / math.sqrt(sigma2)))
    l1p = math.log1p(-math.exp(lp))
    t = np.arange(0, n + 1)
    logpmf = log_binom(n, t) + t * lp + (n - t) * l1p
    # tail[d*] = log sum_{t > d*} pmf
    tail = np.logaddexp.accumulate(logpmf[::-1])[::-1]
    tail = np.concatenate([tail[1:], [-np.inf]])
    for ds in range(max_dstar + 1):
        out[ds] = np.logaddexp(cum[min(2 * ds, log_t.size)], tail[ds])
    return out


def refined_bound(wef: WefTable, cfg: BoundConfig, d_star: int) -> float:
    """Terms with d <= 2 d* plus the probability of more than d* BSC errors.

    d* = n reproduces the union bound over the full spectrum.
    """
    if d_star < 0:
        raise ValueError("list radius must be nonnegative")
    if d_star < cfg.n and 2 * d_star > wef.D:
        raise ValueError(f"spectrum depth {wef.D} < 2 d* = {2 * d_star}")
    if d_star >= cfg.n:
        return union_divsalar_bound(wef, cfg)
    log_t = log_terms(wef, cfg)[: 2 * d_star]
    val = np.logaddexp(logsumexp(log_t) if log_t.size else -np.inf, log_bsc_tail(cfg.n, d_star, cfg.sigma2))
    return min(1.0, math.exp(val))


def optimized_bound(wef: WefTable, cfg: BoundConfig, return_dstar: bool = False):
    """min over d* <= D/2 of the refined bound."""
    log_t = log_terms(wef, cfg)
    max_ds = wef.D // 2
    curve = _refined_curve(log_t, cfg.n, cfg.sigma2, max_ds)
    best = int(np.argmin(curve))
    val = min(1.0, math.exp(curve[best]))
    return (val, best) if return_dstar else val
