"""BPSK over AWGN, Monte-Carlo BER harness and rateless decoding-rate sessions.

Noise and information bits come from numpy's PCG64 generator seeded per
frame with ``(seed, frame_index)``; Gaussian samples use numpy's ziggurat
transform. Frames are processed in fixed-size batches so results do not
depend on the number of worker threads.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .bp import SumProductDecoder, init_llr
from .kite import KiteCode, KiteCodeSpec, KiteEncoder, kite_encode

BATCH_FRAMES = 16


@dataclass(frozen=True)
class ChannelConfig:
    sigma2: float

    def __post_init__(self):
        if not self.sigma2 > 0:
            raise ValueError(f"noise variance must be positive, got {self.sigma2}")

    @classmethod
    def from_snr_db(cls, snr_db: float) -> "ChannelConfig":
        return cls(10.0 ** (-snr_db / 10.0))

    @property
    def es(self) -> float:
        return 1.0

    @property
    def snr_db(self) -> float:
        return -10.0 * math.log10(self.sigma2)

    @property
    def gamma(self) -> float:
        """E_s / (2 sigma^2)."""
        return self.es / (2.0 * self.sigma2)


def frame_rng(seed: int, frame: int) -> np.random.Generator:
    return np.random.default_rng([seed & 0xFFFFFFFFFFFFFFFF, frame])


def bpsk_modulate(c) -> np.ndarray:
    return 1.0 - 2.0 * np.asarray(c, dtype=np.float64)


def awgn_transmit(x, cfg: ChannelConfig, rng: np.random.Generator | int) -> np.ndarray:
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    x = np.asarray(x, dtype=np.float64)
    return x + math.sqrt(cfg.sigma2) * rng.standard_normal(x.shape)


@dataclass
class SimReport:
    k: int
    n: int
    snr_db: float
    seed: int
    frames: int = 0
    bit_errors: int = 0
    frame_errors: int = 0
    decoder_failures: int = 0

    @property
    def ber(self) -> float:
        return self.bit_errors / (self.frames * self.k) if self.frames else float("nan")

    @property
    def fer(self) -> float:
        return self.frame_errors / self.frames if self.frames else float("nan")

    @property
    def ber_halfwidth(self) -> float:
        """95% normal-approximation half-width on the BER estimate."""
        if not self.frames:
            return float("nan")
        nb = self.frames * self.k
        p = self.ber
        return 1.96 * math.sqrt(max(p * (1 - p), 0.0) / nb)

    def merge(self, other: "SimReport") -> "SimReport":
        return SimReport(
            self.k, self.n, self.snr_db, self.seed,
            self.frames + other.frames,
            self.bit_errors + other.bit_errors,
            self.frame_errors + other.frame_errors,
            self.decoder_failures + other.decoder_failures,
        )


def _one_frame(code: KiteCode, decoder: SumProductDecoder, n: int, cfg: ChannelConfig, J: int, seed: int, frame: int):
    rng = frame_rng(seed, frame)
    v = rng.integers(0, 2, code.k, dtype=np.uint8)
    w = kite_encode(v, code, n - code.k)
    c = np.concatenate([v, w])
    y = awgn_transmit(bpsk_modulate(c), cfg, rng)
    out = decoder.decode(init_llr(y, cfg.sigma2), J)
    errs = int(np.count_nonzero(out.hard_bits[: code.k] != v))
    return errs, not out.success


def simulate_ber(
    spec: KiteCodeSpec | KiteCode,
    n: int,
    cfg: ChannelConfig,
    J: int = 50,
    min_errors: int = 100,
    max_frames: int = 100_000,
    seed: int = 0,
    threads: int = 1,
) -> SimReport:
    """Monte-Carlo information-bit error rate of the prefix code K[n, k].

    Runs batches of frames until ``min_errors`` bit errors are seen or
    ``max_frames`` frames have been simulated.
    """
    code = spec if isinstance(spec, KiteCode) else KiteCode(spec)
    decoder = SumProductDecoder(code.realization(n))
    rep = SimReport(code.k, n, cfg.snr_db, seed)
    pool = ThreadPoolExecutor(threads) if threads > 1 else None
    try:
        while rep.bit_errors < min_errors and rep.frames < max_frames:
            frames = range(rep.frames, min(rep.frames + BATCH_FRAMES, max_frames))
            if pool is None:
                results = [_one_frame(code, decoder, n, cfg, J, seed, f) for f in frames]
            else:
                results = list(pool.map(lambda f: _one_frame(code, decoder, n, cfg, J, seed, f), frames))
            for errs, failed in results:
                rep.frames += 1
                rep.bit_errors += errs
                rep.frame_errors += errs > 0
                rep.decoder_failures += failed
    finally:
        if pool is not None:
            pool.shutdown()
    return rep


@dataclass
class RatelessResult:
    success: bool
    n: int | None
    attempts: list = field(default_factory=list)
    k: int = 0

    @property
    def rate(self) -> float | None:
        return None if not self.success else self.k / self.n


class DecoderPool:
    """Prefix decoders of one Kite code backed by a single growing edge table."""

    def __init__(self, code: KiteCode, growth: float = 1.25):
        self.code = code
        self.growth = growth
        self._master: SumProductDecoder | None = None

    def get(self, n: int) -> SumProductDecoder:
        m = self._master
        if m is None or n > m.n:
            cap = n if m is None else max(n, int(m.n * self.growth))
            cap = min(cap, self.code.k + 9 * self.code.k)
            cap = max(cap, n)
            m = self._master = SumProductDecoder(self.code.realization(cap))
        return m if n == m.n else m.prefix(n)


class IncrementalChannel:
    """Encoder + channel producing a growing noisy prefix for one frame."""

    def __init__(self, code: KiteCode, v, cfg: ChannelConfig, rng: np.random.Generator):
        self.code = code
        self.cfg = cfg
        self.rng = rng
        self.encoder = KiteEncoder(code, v)
        self.bits = [np.asarray(v, dtype=np.uint8)]
        self.y = [awgn_transmit(bpsk_modulate(v), cfg, rng)]
        self.n = code.k

    def extend_to(self, n: int) -> None:
        if n > self.n:
            w = self.encoder.extend(n - self.n)
            self.bits.append(w)
            self.y.append(awgn_transmit(bpsk_modulate(w), cfg=self.cfg, rng=self.rng))
            self.n = n

    def llr(self, n: int) -> np.ndarray:
        self.extend_to(n)
        return init_llr(np.concatenate(self.y)[:n], self.cfg.sigma2)

    def codeword(self, n: int) -> np.ndarray:
        self.extend_to(n)
        return np.concatenate(self.bits)[:n]


def rateless_session(
    spec: KiteCodeSpec | KiteCode,
    cfg: ChannelConfig,
    r0: int,
    delta_r: int,
    J: int = 50,
    T: int | None = None,
    seed: int = 0,
    frame: int = 0,
    v=None,
    pool: DecoderPool | None = None,
) -> RatelessResult:
    """Decode at n = k + r0, k + r0 + delta_r, ... until BP succeeds or n > k + T."""
    if r0 < 0 or delta_r < 1:
        raise ValueError("need r0 >= 0 and delta_r >= 1")
    code = spec if isinstance(spec, KiteCode) else KiteCode(spec)
    k = code.k
    if T is None:
        T = 9 * k
    pool = pool or DecoderPool(code)
    rng = frame_rng(seed, frame)
    if v is None:
        v = rng.integers(0, 2, k, dtype=np.uint8)
    chan = IncrementalChannel(code, v, cfg, rng)
    n = k + r0
    attempts = []
    while n <= k + T:
        out = pool.get(n).decode(chan.llr(n), J)
        attempts.append((n, out.iterations, out.success))
        if out.success:
            return RatelessResult(True, n, attempts, k)
        n += delta_r
    return RatelessResult(False, None, attempts, k)


def biawgn_capacity(snr_db: float) -> float:
    """Mutual information (bits) of equiprobable BPSK over AWGN at SNR = 1/sigma^2.

    Uses C = 1 - E[log2(1 + exp(-L))] with L ~ N(2/s2, 4/s2). The expectation
    is integrated with composite Gauss-Legendre rules on mu +/- 14 sd, split at
    L = 0 where the integrand has its kink-like transition.
    """
    if snr_db == -math.inf:
        return 0.0
    if snr_db == math.inf:
        return 1.0
    s2 = 10.0 ** (-snr_db / 10.0)
    mu = 2.0 / s2
    sd = 2.0 / math.sqrt(s2)
    lo, hi = mu - 14.0 * sd, mu + 14.0 * sd
    edges = [lo, hi] if not lo < 0.0 < hi else [lo, 0.0, hi]
    x, w = np.polynomial.legendre.leggauss(24)
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        panels = np.linspace(a, b, 65)
        half = 0.5 * np.diff(panels)
        mid = 0.5 * (panels[1:] + panels[:-1])
        L = (mid[:, None] + half[:, None] * x[None, :]).ravel()
        wts = (half[:, None] * w[None, :]).ravel()
        dens = np.exp(-0.5 * ((L - mu) / sd) ** 2) / (sd * math.sqrt(2.0 * math.pi))
        total += float(np.dot(wts, np.logaddexp(0.0, -L) * dens))
    return 1.0 - total / math.log(2.0)
