from __future__ import annotations

import math

import numpy as np
import pytest
from scipy.optimize import minimize_scalar
from scipy.special import betainc
from scipy.stats import norm

from kitecode.bounds import (
    BoundConfig,
    bsc_tail,
    divsalar_beta,
    divsalar_exponent,
    divsalar_term,
    log_q,
    optimized_bound,
    p_bsc,
    refined_bound,
    union_divsalar_bound,
)
from kitecode.kite import PSequence
from kitecode.wef import ensemble_wef


@pytest.fixture(scope="module")
def small_wef():
    return ensemble_wef(96, PSequence.constant(0.05), 48)


def test_log_q_matches_normal_tail():
    for x in (0.0, 1.0, 5.0, 20.0):
        assert math.exp(float(log_q(x))) == pytest.approx(norm.sf(x), rel=1e-12)
    assert float(log_q(40.0)) == pytest.approx(norm.logsf(40.0), rel=1e-12)


@pytest.mark.parametrize("n,d_star,sigma2", [(100, 3, 0.5), (2100, 40, 0.2), (2100, 400, 0.6), (50, 0, 1.0)])
def test_bsc_tail_matches_incomplete_beta(n, d_star, sigma2):
    p = p_bsc(sigma2)
    assert p == pytest.approx(norm.sf(1 / math.sqrt(sigma2)), rel=1e-12)
    # P(X > d*) = I_p(d* + 1, n - d*)
    assert bsc_tail(n, d_star, sigma2) == pytest.approx(betainc(d_star + 1, n - d_star, p), rel=1e-9)
    assert bsc_tail(n, n, sigma2) == 0.0


@pytest.mark.parametrize("delta,gamma,rn", [(0.1, 1.0, 0.2), (0.3, 2.5, 0.05), (0.5, 0.4, 0.4), (0.05, 3.0, 0.01)])
def test_beta_maximizes_the_exponent(delta, gamma, rn):
    beta = divsalar_beta(delta, gamma, rn)
    res = minimize_scalar(lambda b: -divsalar_exponent(delta, b, gamma, rn), bounds=(1e-9, 1.0), method="bounded",
                          options={"xatol": 1e-12})
    if 0 < beta < 1:
        assert beta == pytest.approx(res.x, abs=1e-5)
    best = -res.fun
    clipped = min(max(beta, 1e-300), 1.0)
    assert divsalar_exponent(delta, clipped, gamma, rn) >= best - 1e-9


def test_term_never_exceeds_union_term():
    n, sigma2 = 200, 0.5
    for d, logS in [(5, 3.0), (50, 40.0), (120, 90.0), (200, 0.0), (7, -2.0)]:
        union = logS + float(log_q(math.sqrt(d / sigma2)))
        assert divsalar_term(d, logS, n, sigma2) <= union + 1e-12
    assert divsalar_term(3, -math.inf, n, sigma2) == -math.inf
    with pytest.raises(ValueError):
        divsalar_term(0, 1.0, n, sigma2)


def test_bound_hierarchy(small_wef):
    n = small_wef.n
    for snr in (0.0, 2.0, 4.0, 6.0):
        cfg = BoundConfig(n, 10 ** (-snr / 10), "bit")
        u = union_divsalar_bound(small_wef, cfg)
        opt, ds = optimized_bound(small_wef, cfg, return_dstar=True)
        assert opt <= u + 1e-15
        assert opt == pytest.approx(refined_bound(small_wef, cfg, ds), rel=1e-9)
        for d_star in (0, 5, 20, n // 2):
            assert opt <= refined_bound(small_wef, cfg, d_star) * (1 + 1e-9)
        assert refined_bound(small_wef, cfg, n) == pytest.approx(u, rel=1e-12)


def test_bounds_decrease_with_snr(small_wef):
    vals = [optimized_bound(small_wef, BoundConfig(small_wef.n, 10 ** (-s / 10), "frame")) for s in np.arange(0, 9, 0.5)]
    assert all(a >= b for a, b in zip(vals, vals[1:]))
    assert vals[-1] < vals[0]


def test_bit_bound_below_frame_bound(small_wef):
    for snr in (3.0, 6.0):
        s2 = 10 ** (-snr / 10)
        bit = union_divsalar_bound(small_wef, BoundConfig(small_wef.n, s2, "bit"))
        frame = union_divsalar_bound(small_wef, BoundConfig(small_wef.n, s2, "frame"))
        assert bit <= frame


def test_argument_validation(small_wef):
    with pytest.raises(ValueError):
        BoundConfig(10, 1.0, "symbol")
    with pytest.raises(ValueError):
        BoundConfig(10, -1.0)
    part = ensemble_wef(96, PSequence.constant(0.05), 48, D=60)
    cfg = BoundConfig(part.n, 0.5)
    with pytest.raises(ValueError):
        union_divsalar_bound(part, cfg)
    with pytest.raises(ValueError):
        refined_bound(part, cfg, 40)
    assert refined_bound(part, cfg, 30) <= 1.0
