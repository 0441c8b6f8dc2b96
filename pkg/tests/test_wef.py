from __future__ import annotations

import math

import numpy as np
import pytest
from scipy.special import logsumexp

from kitecode.kite import PSEQ_1890, PSequence
from kitecode.wef import (
    cond_wef,
    cond_wef_batch,
    ensemble_wef,
    random_ensemble_logS,
    succ_prob_closed,
    succ_prob_profile,
)

from .oracles import mc_irwef


def test_success_probability_recursion_matches_closed_form():
    p = np.array([0.01, 0.2, 0.5, 0.7])
    k = 30
    for ell in (0, 1, 5, 30):
        rec = succ_prob_profile(ell, PSequence.constant(0.2), k, 10)
        assert np.allclose(rec, succ_prob_closed(ell, 0.2), rtol=1e-13, atol=1e-15)
    assert np.allclose(succ_prob_closed(3, p), [(1 - (1 - 2 * x) ** 3) / 2 for x in p])
    with pytest.raises(ValueError):
        succ_prob_profile(31, 0.1, 30, 5)


def test_conditional_wef_is_a_distribution():
    for ell in (1, 4, 50):
        c = cond_wef(ell, PSEQ_1890, 1890, 60)
        assert logsumexp(c.coeffs) == pytest.approx(0.0, abs=1e-12)
    zero = cond_wef(0, PSEQ_1890, 1890, 60).coeffs
    assert zero[0] == 0.0 and np.all(zero[1:] == -np.inf)


def test_conditional_wef_small_case_by_enumeration():
    # ell = 1, r = 3, constant p: enumerate all flip patterns
    p = 0.3
    probs = np.zeros(4)
    for bits in range(8):
        flips = [(bits >> t) & 1 for t in range(3)]
        w, state = 0, 0
        pr = 1.0
        for f in flips:
            pr *= p if f else 1 - p
            state ^= f
            w += state
        probs[w] += pr
    got = np.exp(cond_wef_batch([1], p, 10, 3)[0])
    assert np.allclose(got, probs, rtol=1e-13)


@pytest.mark.parametrize("k,r", [(20, 10), (64, 32), (5, 40)])
def test_half_probability_matches_random_ensemble(k, r):
    wef = ensemble_wef(k, PSequence.constant(0.5), r)
    ref = random_ensemble_logS(k, r)
    finite = np.isfinite(ref)
    assert np.array_equal(np.isfinite(wef.logS), finite)
    assert np.allclose(wef.logS[finite], ref[finite], rtol=1e-9, atol=1e-9)


def test_total_count_is_number_of_inputs():
    wef = ensemble_wef(60, PSequence.constant(0.05), 30)
    assert logsumexp(wef.logS) == pytest.approx(60 * math.log(2), rel=1e-12)
    assert wef.logS[0] == pytest.approx(0.0, abs=1e-12)
    assert wef.logSprime[0] == -np.inf


def test_bit_spectrum_weighting():
    wef = ensemble_wef(30, PSequence.constant(0.1), 10)
    i = np.arange(wef.logA.shape[0])[:, None]
    with np.errstate(divide="ignore"):
        manual = wef.logA + np.log(i / 30)
    for d in (1, 5, 17):
        mask = (i + np.arange(wef.logA.shape[1])[None, :]) == d
        assert wef.logSprime[d] == pytest.approx(logsumexp(manual[mask]), rel=1e-12)
    assert np.all(wef.logSprime <= wef.logS + 1e-12)


def test_truncation_agrees_with_full_table():
    full = ensemble_wef(40, PSequence.constant(0.08), 20)
    part = ensemble_wef(40, PSequence.constant(0.08), 20, D=15)
    assert np.allclose(part.logS, full.logS[:16], rtol=1e-12)
    assert part.log_A(3, 4) == full.log_A(3, 4)
    with pytest.raises(IndexError):
        part.log_A(10, 10)
    with pytest.raises(ValueError):
        ensemble_wef(40, 0.08, 20, D=61)


def test_matches_matrix_sampling_oracle():
    mean, se = mc_irwef(8, 8, 0.2, samples=20_000, seed=11)
    wef = ensemble_wef(8, PSequence.constant(0.2), 8)
    exact = np.exp(wef.logA)
    ok = se > 0
    z = np.abs(mean[ok] - exact[ok]) / se[ok]
    assert z.max() < 4.5
    assert np.mean(z < 3) > 0.97
    # deterministic cells (input weight 0) are exact
    assert mean[0, 0] == 1.0 and exact[0, 0] == pytest.approx(1.0)
