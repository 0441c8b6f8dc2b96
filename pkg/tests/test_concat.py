from __future__ import annotations

import math

import numpy as np
import pytest

from kitecode.bp import LLR_CLAMP
from kitecode.channel import ChannelConfig, IncrementalChannel, frame_rng
from kitecode.concat import (
    ConcatDecoder,
    ConcatSpec,
    bits_to_symbols,
    concat_decode,
    concat_encode,
    measure_decoding_rate,
    outer_encode,
    run_frame,
    symbols_to_bits,
)
from kitecode.kite import PSEQ_1890, PSEQ_51150, KiteCode, KiteEncoder, PSequence
from kitecode.rs import RsCode

SMALL_PSEQ = PSequence((0.06, 0.05, 0.04, 0.035, 0.03, 0.025, 0.02, 0.015, 0.01))


def medium_spec(**kw) -> ConcatSpec:
    """RS[63, 43] outer code (t_max = 10): miscorrections are rare enough for noisy runs."""
    args = dict(rs=RsCode(6, 63, 43), ell=2, seed=3, pseq=PSEQ_1890, J=30)
    args.update(kw)
    return ConcatSpec(**args)


def small_spec(**kw) -> ConcatSpec:
    args = dict(rs=RsCode(4, 15, 11), ell=2, seed=3, pseq=SMALL_PSEQ, r0=12, delta_r=6, J=30)
    args.update(kw)
    return ConcatSpec(**args)


class NoiselessSource:
    """Perfect channel: LLRs at the clamp for the true codeword prefix."""

    def __init__(self, code: KiteCode, v):
        self.enc = KiteEncoder(code, v)
        self.c = np.asarray(v, dtype=np.uint8)

    def llr(self, n: int) -> np.ndarray:
        if n > self.c.size:
            self.c = np.concatenate([self.c, self.enc.extend(n - self.c.size)])
        return LLR_CLAMP * (1.0 - 2.0 * self.c[:n])


def test_symbol_serialization_is_msb_first():
    assert symbols_to_bits(np.array([0b1010, 0b0001]), 4).tolist() == [1, 0, 1, 0, 0, 0, 0, 1]
    sym = np.random.default_rng(0).integers(0, 1024, (3, 7))
    assert np.array_equal(bits_to_symbols(symbols_to_bits(sym, 10), 10), sym)


def test_spec_defaults_and_dimensions():
    spec = ConcatSpec(RsCode(10, 1023, 1000), 5, 1, PSEQ_51150)
    assert spec.k == 51150 and spec.data_bits == 50000
    assert spec.r0 == math.ceil(51150 / 0.95) - 51150
    assert spec.delta_r == 512 and spec.T == 9 * 51150 and spec.grs
    assert spec.kite.k == spec.k
    with pytest.raises(ValueError):
        ConcatSpec(RsCode(4, 15, 11), 0, 1, SMALL_PSEQ)
    with pytest.raises(ValueError):
        small_spec(delta_r=0)


def test_all_zero_data_gives_all_zero_output():
    spec = small_spec()
    assert not concat_encode(np.zeros(spec.data_bits, dtype=np.uint8), spec, 50).any()


@pytest.mark.parametrize("grs", [True, False])
def test_systematic_part_is_the_serialized_outer_code(grs):
    spec = small_spec(grs=grs)
    u = np.random.default_rng(1).integers(0, 2, spec.data_bits, dtype=np.uint8)
    c = concat_encode(u, spec, 40)
    assert c.size == spec.k + 40
    scr = spec.scrambler()
    msgs = bits_to_symbols(u, 4).reshape(2, 11)
    for i in range(2):
        seg = bits_to_symbols(c[i * 60 : (i + 1) * 60], 4)
        cw = scr.descramble(seg)
        assert spec.rs.is_codeword(cw)
        assert np.array_equal(cw, spec.rs.encode(msgs[i]))
        if not grs:
            assert np.array_equal(seg, cw)
    with pytest.raises(ValueError):
        outer_encode(u[:-1], spec)


@pytest.mark.parametrize("ell", [1, 2])
def test_noiseless_loopback(ell):
    spec = ConcatSpec(RsCode(8, 255, 223), ell, 5, PSEQ_1890, r0=0)
    u = np.random.default_rng(ell).integers(0, 2, spec.data_bits, dtype=np.uint8)
    dec = ConcatDecoder(spec)
    res = dec.decode(NoiselessSource(dec.code, outer_encode(u, spec)))
    assert res.success and res.n == spec.k and len(res.log) == 1
    assert np.array_equal(res.data, u)


def test_injected_symbol_errors_fixed_without_growth():
    spec = small_spec()
    t = spec.rs.t_max
    u = np.random.default_rng(2).integers(0, 2, spec.data_bits, dtype=np.uint8)
    dec = ConcatDecoder(spec)
    calls = []

    def corrupt(n, hard):
        calls.append(n)
        # flip one bit in each of t_max symbols of codeword 1
        for s in range(t):
            hard[60 + 4 * (3 * s + 1)] ^= 1
        return hard

    res = dec.decode(NoiselessSource(dec.code, outer_encode(u, spec)), inner_hook=corrupt)
    assert res.success and np.array_equal(res.data, u)
    assert res.n == spec.k + spec.r0 and calls == [res.n]
    assert res.log[0].new == [0, 1] and res.log[0].delta == 0


def test_uncorrectable_codeword_waits_for_pinning():
    spec = medium_spec()
    u = np.zeros(spec.data_bits, dtype=np.uint8)
    dec = ConcatDecoder(spec)
    first = []

    def corrupt(n, hard):
        if not first:
            first.append(n)
            for s in range(spec.rs.t_max + 1):
                hard[6 * s] ^= 1
        return hard

    res = dec.decode(NoiselessSource(dec.code, outer_encode(u, spec)), inner_hook=corrupt)
    assert res.success and not res.data.any()
    # codeword 1 decodes in the first sweep; codeword 0 is retried at the same n
    assert res.log[0].new == [1] and res.log[0].delta == 0
    assert res.log[1].n == res.log[0].n and res.log[1].new == [0]


def check_session_log(spec: ConcatSpec, res) -> None:
    seen: set = set()
    for a, b in zip(res.log, res.log[1:]):
        assert b.n - a.n == (spec.delta_r if a.delta else 0)
    for e in res.log:
        assert (e.delta == 0) == bool(e.new)
        assert not seen.intersection(e.new)
        seen.update(e.new)
    assert res.gamma.tolist() == [i in seen for i in range(spec.ell)]
    for a, b in zip(res.log, res.log[1:]):
        assert all(y >= x for x, y in zip(a.gamma, b.gamma))


def test_noisy_sessions_respect_feedback_rules():
    spec = medium_spec()
    dec = ConcatDecoder(spec)
    cfg = ChannelConfig.from_snr_db(3.0)
    for f in range(12):
        u, res = run_frame(dec, cfg, 7, f)
        assert res.success and np.array_equal(res.data, u)
        assert spec.k / res.n <= 1.0
        check_session_log(spec, res)


def test_session_is_deterministic():
    spec = medium_spec()
    cfg = ChannelConfig.from_snr_db(2.5)
    u1, r1 = run_frame(ConcatDecoder(spec), cfg, 11, 3)
    u2, r2 = run_frame(ConcatDecoder(spec), cfg, 11, 3)
    assert np.array_equal(u1, u2) and r1.n == r2.n
    assert [(e.n, e.iterations, e.new) for e in r1.log] == [(e.n, e.iterations, e.new) for e in r2.log]


def test_exhaustion_reports_failure():
    spec = medium_spec(r0=0, T=30)
    dec = ConcatDecoder(spec)
    u, res = run_frame(dec, ChannelConfig.from_snr_db(-8.0), 1, 0)
    assert not res.success and res.data is None
    assert res.log[-1].n <= spec.k + spec.T
    check_session_log(spec, res)


def outer_failures(spec, dec, hard):
    fails = []
    for i in range(spec.ell):
        seg = hard[i * dec.cw_bits : (i + 1) * dec.cw_bits]
        if not spec.rs.decode(dec.scr.descramble(bits_to_symbols(seg, spec.m))).success:
            fails.append(i)
    return fails


def test_pinning_never_increases_block_errors():
    """Paired frames at a fixed prefix length: after pinning the codewords that
    decoded, the remaining codewords fail no more often than before."""
    # a short iteration budget makes partially successful inner passes common
    spec = medium_spec(ell=4, J=8)
    dec = ConcatDecoder(spec)
    cfg = ChannelConfig.from_snr_db(2.5)
    n = int(spec.k / 0.6)
    inner = dec.pool.get(n)
    before = after = partial = 0
    for f in range(40):
        rng = frame_rng(21, f)
        u = rng.integers(0, 2, spec.data_bits, dtype=np.uint8)
        v = outer_encode(u, spec)
        llr = IncrementalChannel(dec.code, v, cfg, rng).llr(n)
        first = inner.decode(llr, spec.J)
        fails = outer_failures(spec, dec, first.hard_bits[: spec.k])
        if not fails or len(fails) == spec.ell:
            continue
        partial += 1
        mask = np.ones(n, dtype=bool)
        mask[spec.k :] = False
        for i in fails:
            mask[i * dec.cw_bits : (i + 1) * dec.cw_bits] = False
        vals = np.zeros(n, dtype=np.uint8)
        vals[: spec.k] = v
        second = inner.decode(llr, spec.J, (mask, vals))
        fails2 = outer_failures(spec, dec, second.hard_bits[: spec.k])
        assert set(fails2) <= set(fails)
        before += len(fails)
        after += len(fails2)
    assert partial >= 5
    assert after < before


def test_concat_decode_wrapper_and_rate_report():
    spec = small_spec()
    dec = ConcatDecoder(spec)
    u = np.ones(spec.data_bits, dtype=np.uint8)
    res = concat_decode(NoiselessSource(dec.code, outer_encode(u, spec)), spec, dec.code)
    assert res.success and np.array_equal(res.data, u)
    rep = measure_decoding_rate(medium_spec(), ChannelConfig.from_snr_db(3.0), 6, seed=4)
    assert rep.failures == 0 and rep.undetected_errors == 0
    assert all(0 < r <= 1 for r in rep.rates)
    assert rep.capacity_gap == pytest.approx(rep.capacity - rep.mean_rate)
    assert rep.mean_rate < rep.capacity
    with pytest.raises(ValueError):
        measure_decoding_rate(spec, ChannelConfig.from_snr_db(2.0), 0)
