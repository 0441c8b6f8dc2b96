from __future__ import annotations

import numpy as np
import pytest

from kitecode.bp import LLR_CLAMP, SumProductDecoder, init_llr, sp_decode
from kitecode.channel import ChannelConfig, awgn_transmit, bpsk_modulate
from kitecode.kite import PSEQ_1890, KiteCode, KiteCodeSpec, PSequence, build_parity_check, kite_encode

from .oracles import bitwise_map_llr, cycle_free_codes


def test_posteriors_match_map_on_cycle_free_graphs():
    rng = np.random.default_rng(5)
    worst = 0.0
    for spec, H, cws in cycle_free_codes(15):
        c = cws[rng.integers(len(cws))]
        y = bpsk_modulate(c) + rng.normal(0.0, 1.0, c.size)
        llr = init_llr(y, 1.0)
        out = sp_decode(H, llr, J=20, early_stop=False)
        worst = max(worst, float(np.abs(out.posterior_llrs - bitwise_map_llr(cws, llr)).max()))
    assert worst < 1e-6


def test_init_llr():
    assert np.allclose(init_llr([1.0, -0.5], 0.5), [4.0, -2.0])
    with pytest.raises(ValueError):
        init_llr([1.0], 0.0)


def test_channel_llr_moments():
    # consistent Gaussian: mean 2/sigma^2, variance 4/sigma^2 for the all-zero word
    cfg = ChannelConfig(0.8)
    rng = np.random.default_rng(0)
    llr = init_llr(awgn_transmit(np.ones(400_000), cfg, rng), cfg.sigma2)
    assert llr.mean() == pytest.approx(2 / 0.8, rel=5e-3)
    assert llr.var() == pytest.approx(4 / 0.8, rel=1e-2)


def test_noiseless_decoding_succeeds_immediately():
    spec = KiteCodeSpec(200, 4, PSequence.constant(0.05))
    H = build_parity_check(spec, 260)
    v = np.random.default_rng(1).integers(0, 2, 200, dtype=np.uint8)
    c = np.concatenate([v, kite_encode(v, spec, 60)])
    out = sp_decode(H, 10.0 * bpsk_modulate(c))
    assert out.success and out.iterations == 1
    assert np.array_equal(out.hard_bits, c)


def test_decodes_moderate_noise():
    spec = KiteCodeSpec(1890, 1, PSEQ_1890)
    code = KiteCode(spec)
    dec = SumProductDecoder(code.realization(2100))
    rng = np.random.default_rng(2)
    v = rng.integers(0, 2, 1890, dtype=np.uint8)
    c = np.concatenate([v, kite_encode(v, code, 210)])
    cfg = ChannelConfig.from_snr_db(8.0)
    out = dec.decode(init_llr(awgn_transmit(bpsk_modulate(c), cfg, rng), cfg.sigma2))
    assert out.success and np.array_equal(out.hard_bits, c)


def test_pinned_bits_are_held():
    spec = KiteCodeSpec(100, 2, PSequence.constant(0.05))
    H = build_parity_check(spec, 150)
    v = np.zeros(100, dtype=np.uint8)
    c = np.concatenate([v, kite_encode(v, spec, 50)])
    llr = 2.0 * bpsk_modulate(c)
    llr[:10] = -5.0  # channel says 1, but the bits are known to be 0
    mask = np.zeros(150, dtype=bool)
    mask[:10] = True
    out = sp_decode(H, llr, J=10, known=(mask, np.zeros(150, dtype=np.uint8)))
    assert np.all(out.posterior_llrs[:10] == LLR_CLAMP)
    assert out.success and not out.hard_bits.any()


def test_prefix_view_matches_fresh_decoder():
    spec = KiteCodeSpec(300, 8, PSequence.constant(0.03))
    code = KiteCode(spec)
    big = SumProductDecoder(code.realization(600))
    llr = np.random.default_rng(3).normal(1.0, 1.5, 450)
    a = big.prefix(450).decode(llr, 15, early_stop=False)
    b = SumProductDecoder(code.realization(450)).decode(llr, 15, early_stop=False)
    assert np.array_equal(a.posterior_llrs, b.posterior_llrs)
    with pytest.raises(ValueError):
        big.prefix(700)


def test_early_stop_and_zero_parity():
    spec = KiteCodeSpec(50, 1, PSequence.constant(0.1))
    dec = SumProductDecoder(build_parity_check(spec, 50))
    out = dec.decode(np.ones(50))
    assert out.success and out.iterations == 0
    dec = SumProductDecoder(build_parity_check(spec, 80))
    out = dec.decode(np.full(80, 3.0), 25, early_stop=False)
    assert out.iterations == 25 and out.success
    with pytest.raises(ValueError):
        dec.decode(np.ones(79))
