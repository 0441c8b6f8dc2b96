"""RS-Kite serial concatenation: encoder and incremental-redundancy decoder.

Bit layout of the inner information word: RS codeword 0 first, each symbol
serialized most-significant bit first (codeword-major, symbol-major).
The optional generalized-RS scrambler multiplies every outer code symbol by
a nonzero field element before serialization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .bp import DecodeOutcome
from .channel import ChannelConfig, DecoderPool, IncrementalChannel, biawgn_capacity, frame_rng
from .kite import KiteCode, KiteCodeSpec, KiteEncoder, PSequence
from .prng import derive_seed
from .rs import GrsScrambler, RsCode

# label mixed into the code seed to derive the scrambler stream
_GRS_LABEL = 0x475253


def symbols_to_bits(sym, m: int) -> np.ndarray:
    sym = np.asarray(sym, dtype=np.int64)
    shifts = np.arange(m - 1, -1, -1)
    return ((sym[..., None] >> shifts) & 1).astype(np.uint8).reshape(*sym.shape[:-1], -1)


def bits_to_symbols(bits, m: int) -> np.ndarray:
    bits = np.asarray(bits, dtype=np.int64)
    b = bits.reshape(*bits.shape[:-1], -1, m)
    return (b << np.arange(m - 1, -1, -1)).sum(axis=-1)


@dataclass(frozen=True)
class ConcatSpec:
    rs: RsCode
    ell: int
    seed: int
    pseq: PSequence
    r0: int | None = None
    delta_r: int | None = None
    J: int = 50
    T: int | None = None
    grs: bool = True

    def __post_init__(self):
        if self.ell < 1:
            raise ValueError("need at least one RS codeword")
        k = self.k
        if self.r0 is None:
            object.__setattr__(self, "r0", math.ceil(k / 0.95) - k)
        if self.delta_r is None:
            object.__setattr__(self, "delta_r", math.ceil(k / 100))
        if self.T is None:
            object.__setattr__(self, "T", 9 * k)
        if self.r0 < 0 or self.delta_r < 1:
            raise ValueError("need r0 >= 0 and delta_r >= 1")

    @property
    def m(self) -> int:
        return self.rs.m

    @property
    def k(self) -> int:
        return self.ell * self.rs.m * self.rs.N

    @property
    def data_bits(self) -> int:
        return self.ell * self.rs.m * self.rs.K

    @property
    def kite(self) -> KiteCodeSpec:
        return KiteCodeSpec(self.k, self.seed, self.pseq)

    def scrambler(self) -> GrsScrambler:
        if not self.grs:
            return GrsScrambler.identity(self.m, self.rs.N)
        return GrsScrambler.from_seed(self.m, self.rs.N, derive_seed(self.seed, _GRS_LABEL))


def outer_encode(u, spec: ConcatSpec) -> np.ndarray:
    """Data bits -> inner information word v (serialized, scrambled RS codewords)."""
    u = np.asarray(u, dtype=np.uint8)
    if u.shape != (spec.data_bits,):
        raise ValueError(f"data must have {spec.data_bits} bits, got shape {u.shape}")
    msgs = bits_to_symbols(u, spec.m).reshape(spec.ell, spec.rs.K)
    scr = spec.scrambler()
    cws = np.stack([scr.scramble(spec.rs.encode(msg)) for msg in msgs])
    return symbols_to_bits(cws, spec.m).reshape(-1)


def concat_encode(u, spec: ConcatSpec, T: int, code: KiteCode | None = None) -> np.ndarray:
    """Systematic bits followed by the first T parity bits."""
    v = outer_encode(u, spec)
    enc = KiteEncoder(code or KiteCode(spec.kite), v)
    return np.concatenate([v, enc.extend(T)])


@dataclass
class SessionLog:
    n: int
    iterations: int
    inner_success: bool
    new: list
    delta: int
    gamma: tuple = ()  # per-codeword success flags after this sweep


@dataclass
class ConcatResult:
    success: bool
    data: np.ndarray | None
    n: int
    gamma: np.ndarray
    log: list = field(default_factory=list)

    @property
    def k(self) -> int:
        return self.gamma.size


class ConcatDecoder:
    """Alternates inner sum-product and outer BM decoding with feedback.

    Successfully decoded RS codewords are pinned as known inner bits in all
    later inner decoding attempts; the redundancy grows by ``delta_r`` only
    after a sweep that decoded no new codeword.
    """

    def __init__(self, spec: ConcatSpec, code: KiteCode | None = None, pool: DecoderPool | None = None):
        self.spec = spec
        self.code = code or KiteCode(spec.kite)
        self.pool = pool or DecoderPool(self.code)
        self.scr = spec.scrambler()
        self.cw_bits = spec.m * spec.rs.N

    def decode(self, source, inner_hook=None) -> ConcatResult:
        """Run the incremental decoding loop on ``source`` (anything with ``llr(n)``).

        ``inner_hook(n, hard_bits) -> hard_bits`` may alter the inner decoder's
        hard decisions before the outer sweep (used for fault injection).
        """
        spec = self.spec
        k, ell, m = spec.k, spec.ell, spec.m
        gamma = np.zeros(ell, dtype=bool)
        decoded = [None] * ell  # RS codewords before scrambling
        known_mask = np.zeros(k, dtype=bool)
        known_bits = np.zeros(k, dtype=np.uint8)
        log = []
        n = k + spec.r0
        while n <= k + spec.T:
            dec = self.pool.get(n)
            mask = np.zeros(n, dtype=bool)
            vals = np.zeros(n, dtype=np.uint8)
            mask[:k] = known_mask
            vals[:k] = known_bits
            out: DecodeOutcome = dec.decode(source.llr(n), spec.J, (mask, vals) if known_mask.any() else None)
            hard = out.hard_bits[:k]
            if inner_hook is not None:
                hard = inner_hook(n, hard.copy())
            delta = 1
            new = []
            for i in np.nonzero(~gamma)[0]:
                seg = slice(i * self.cw_bits, (i + 1) * self.cw_bits)
                rcv = self.scr.descramble(bits_to_symbols(hard[seg], m))
                res = spec.rs.decode(rcv)
                if res.success:
                    if not spec.rs.is_codeword(res.codeword):
                        raise AssertionError("BM returned a non-codeword")
                    gamma[i] = True
                    decoded[i] = res.codeword
                    known_mask[seg] = True
                    known_bits[seg] = symbols_to_bits(self.scr.scramble(res.codeword), m)
                    new.append(int(i))
                    delta = 0
            log.append(SessionLog(n, out.iterations, out.success, new, delta, tuple(gamma.tolist())))
            if gamma.all():
                data = np.concatenate([symbols_to_bits(cw[: spec.rs.K], m) for cw in decoded])
                return ConcatResult(True, data, n, gamma, log)
            if delta:
                n += spec.delta_r
        return ConcatResult(False, None, n, gamma, log)


def concat_decode(source, spec: ConcatSpec, code: KiteCode | None = None) -> ConcatResult:
    return ConcatDecoder(spec, code).decode(source)


@dataclass
class RateReport:
    frames: int
    rates: list
    failures: int
    undetected_errors: int
    snr_db: float

    @property
    def mean_rate(self) -> float:
        """Mean inner decoding rate k/n over successful frames."""
        return float(np.mean(self.rates)) if self.rates else float("nan")

    @property
    def capacity(self) -> float:
        return biawgn_capacity(self.snr_db)

    @property
    def capacity_gap(self) -> float:
        return self.capacity - self.mean_rate


def run_frame(decoder: ConcatDecoder, cfg: ChannelConfig, seed: int, frame: int, inner_hook=None):
    """One frame: random data, noisy growing prefix, incremental decoding."""
    spec = decoder.spec
    rng = frame_rng(seed, frame)
    u = rng.integers(0, 2, spec.data_bits, dtype=np.uint8)
    v = outer_encode(u, spec)
    source = IncrementalChannel(decoder.code, v, cfg, rng)
    return u, decoder.decode(source, inner_hook)


def measure_decoding_rate(spec: ConcatSpec, cfg: ChannelConfig, frames: int, seed: int = 0, progress=None) -> RateReport:
    if frames < 1:
        raise ValueError("need at least one frame")
    decoder = ConcatDecoder(spec)
    rates, fails, wrong = [], 0, 0
    for f in range(frames):
        u, res = run_frame(decoder, cfg, seed, f)
        if res.success:
            rates.append(spec.k / res.n)
            wrong += int(not np.array_equal(res.data, u))
        else:
            fails += 1
        if progress is not None:
            progress(f, res)
    return RateReport(frames, rates, fails, wrong, cfg.snr_db)
