"""Greedy window-by-window design of the p-sequence.

q_9 is chosen first for the rate-0.9 prefix code, then q_8 with q_9 fixed,
and so on down to q_1. Each step is a one-dimensional golden-section search
(in log q) whose objective is either the density-evolution threshold or a
simulated SNR-at-target-BER.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

from .channel import ChannelConfig, simulate_ber
from .de import rate_threshold
from .kite import N_WINDOWS, KiteCodeSpec, PSequence

log = logging.getLogger(__name__)

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0  # 0.618...


def golden_search(objective, lo: float, hi: float, tol: float, probe_log: list | None = None) -> float:
    """Golden-section minimizer of ``objective`` on [lo, hi] to interval width ``tol``.

    For a non-unimodal objective this returns a local minimizer. Every probe
    is appended to ``probe_log`` as ``(x, f(x))`` when given.
    """
    if not lo < hi:
        raise ValueError("need lo < hi")

    def f(x):
        y = objective(x)
        if probe_log is not None:
            probe_log.append((x, y))
        return y

    a, b = lo, hi
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
    return c if fc <= fd else d


@dataclass
class DesignConfig:
    k: int
    criterion: str = "de_threshold"  # or "simulation_ordinal"
    target_ber: float = 1e-4
    rel_tol: float = 0.02
    seed: int = 1
    # simulation-criterion settings
    snr_lo: float = -8.0
    snr_hi: float = 10.0
    snr_step: float = 0.1
    min_errors: int = 100
    max_frames: int = 20_000
    J: int = 50

    def __post_init__(self):
        if self.criterion not in ("de_threshold", "simulation_ordinal"):
            raise ValueError(f"unknown criterion {self.criterion!r}")

    def bounds(self, window: int, fixed: dict[int, float]) -> tuple[float, float]:
        if window == N_WINDOWS:
            return 1.0 / self.k, 0.05
        return 1.0 / (10 * self.k), fixed[window + 1]


@dataclass
class DesignLog:
    probes: list = field(default_factory=list)  # (window, q, objective)

    def to_csv_rows(self):
        yield from self.probes


def _pseq_with(fixed: dict[int, float], window: int, q: float) -> PSequence:
    vals = []
    for w in range(N_WINDOWS, 0, -1):
        vals.append(fixed[w] if w in fixed and w > window else q)
    return PSequence(tuple(vals))


def snr_at_target(spec: KiteCodeSpec, n: int, cfg: DesignConfig) -> float:
    """Lowest SNR (bisected to ``snr_step``) whose simulated BER is <= target."""

    def good(snr):
        rep = simulate_ber(spec, n, ChannelConfig.from_snr_db(snr), cfg.J, cfg.min_errors, cfg.max_frames, cfg.seed)
        return rep.ber <= cfg.target_ber

    lo, hi = cfg.snr_lo, cfg.snr_hi
    if not good(hi):
        return math.inf
    while hi - lo > cfg.snr_step:
        mid = 0.5 * (lo + hi)
        if good(mid):
            hi = mid
        else:
            lo = mid
    return hi


def ordinal_prefer(q_a: float, q_b: float, window: int, fixed: dict[int, float], cfg: DesignConfig) -> float:
    """Return whichever candidate reaches the target BER at the lower simulated SNR."""
    n = (10 * cfg.k) // window
    sa = snr_at_target(KiteCodeSpec(cfg.k, cfg.seed, _pseq_with(fixed, window, q_a)), n, cfg)
    sb = snr_at_target(KiteCodeSpec(cfg.k, cfg.seed, _pseq_with(fixed, window, q_b)), n, cfg)
    return q_a if sa <= sb else q_b


def step_objective(window: int, fixed: dict[int, float], cfg: DesignConfig):
    """Objective q -> score (dB) for the rate-window/10 prefix code."""
    if cfg.criterion == "de_threshold":
        return lambda q: rate_threshold(cfg.k, _pseq_with(fixed, window, q), window, cfg.target_ber)
    n = (10 * cfg.k) // window
    return lambda q: snr_at_target(KiteCodeSpec(cfg.k, cfg.seed, _pseq_with(fixed, window, q)), n, cfg)


def design_step(window: int, fixed: dict[int, float], cfg: DesignConfig, dlog: DesignLog | None = None) -> float:
    """Choose q_window with all higher-rate parameters fixed."""
    missing = [w for w in range(window + 1, N_WINDOWS + 1) if w not in fixed]
    if missing:
        raise ValueError(f"parameters for windows {missing} must be fixed first")
    lo, hi = cfg.bounds(window, fixed)
    if not lo < hi:
        return lo
    obj = step_objective(window, fixed, cfg)
    probes: list = []
    x = golden_search(lambda lq: obj(math.exp(lq)), math.log(lo), math.log(hi), math.log1p(cfg.rel_tol), probes)
    for lq, y in probes:
        q = math.exp(lq)
        if not lo * (1 - 1e-12) <= q <= hi * (1 + 1e-12):
            raise RuntimeError("golden search probed outside its bounds")
        if dlog is not None:
            dlog.probes.append((window, q, y))
        log.debug("window %d probe q=%.6g objective=%.4f", window, q, y)
    return math.exp(x)


def greedy_design(cfg: DesignConfig, dlog: DesignLog | None = None) -> PSequence:
    fixed: dict[int, float] = {}
    for w in range(N_WINDOWS, 0, -1):
        fixed[w] = design_step(w, fixed, cfg, dlog)
        log.info("q_%d = %.6g", w, fixed[w])
    for w in range(N_WINDOWS, 1, -1):
        if fixed[w - 1] > fixed[w]:
            log.warning("designed q_%d = %.4g exceeds q_%d = %.4g", w - 1, fixed[w - 1], w, fixed[w])
    return PSequence(tuple(fixed[w] for w in range(N_WINDOWS, 0, -1)))
