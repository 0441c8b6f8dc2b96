from __future__ import annotations

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kitecode.design import DesignConfig, DesignLog, _pseq_with, design_step, golden_search, ordinal_prefer, step_objective


@settings(max_examples=50, deadline=None)
@given(center=st.floats(-5, 5), width=st.floats(0.5, 20))
def test_golden_search_finds_quadratic_minimum(center, width):
    lo, hi = center - width * 0.3, center + width * 0.7
    probes: list = []
    x = golden_search(lambda t: (t - center) ** 2, lo, hi, 1e-7, probes)
    assert abs(x - center) < 1e-6
    assert all(lo <= p <= hi for p, _ in probes)


def test_golden_search_boundary_minimum_and_evaluation_count():
    probes: list = []
    x = golden_search(lambda t: t, 0.0, 1.0, 1e-4, probes)
    assert x < 1e-4
    # each step shrinks the bracket by 0.618 and costs one evaluation
    expected = 2 + math.ceil(math.log(1e-4) / math.log(0.6180339887))
    assert len(probes) <= expected + 1
    with pytest.raises(ValueError):
        golden_search(abs, 1.0, 1.0, 0.1)


def test_golden_search_tolerates_infinite_values():
    f = lambda t: math.inf if t < 0.2 else (t - 0.5) ** 2
    assert golden_search(f, 0.0, 1.0, 1e-6) == pytest.approx(0.5, abs=1e-5)


def test_pseq_with_keeps_fixed_windows():
    ps = _pseq_with({9: 0.02, 8: 0.01}, 7, 0.005)
    assert ps.q_of(9) == 0.02 and ps.q_of(8) == 0.01
    assert all(ps.q_of(w) == 0.005 for w in range(1, 8))


def test_config_bounds_and_validation():
    cfg = DesignConfig(1890)
    assert cfg.bounds(9, {}) == (1 / 1890, 0.05)
    assert cfg.bounds(5, {6: 0.002}) == (1 / 18900, 0.002)
    with pytest.raises(ValueError):
        DesignConfig(10, criterion="exit_chart")


def test_design_step_requires_higher_windows():
    with pytest.raises(ValueError):
        design_step(7, {9: 0.02}, DesignConfig(1890))


def test_first_design_step_by_threshold():
    cfg = DesignConfig(1890, rel_tol=0.05)
    dlog = DesignLog()
    q9 = design_step(9, {}, cfg, dlog)
    lo, hi = cfg.bounds(9, {})
    assert lo <= q9 <= hi
    obj = step_objective(9, {}, cfg)
    best = obj(q9)
    assert best <= obj(lo) and best <= obj(hi)
    assert len(dlog.probes) > 3 and all(w == 9 for w, _, _ in dlog.probes)
    assert 0.01 < q9 < 0.05


def test_ordinal_comparison_prefers_the_better_code():
    cfg = DesignConfig(120, criterion="simulation_ordinal", target_ber=1e-2, min_errors=30, max_frames=400,
                       snr_lo=-2.0, snr_hi=10.0, snr_step=0.25, J=20)
    fixed = {9: 0.05, 8: 0.05, 7: 0.05, 6: 0.05}
    # a tiny q leaves rate-0.5 parity rows nearly empty and needs about 1 dB more
    assert ordinal_prefer(1 / 1200, 0.03, 5, fixed, cfg) == 0.03
    assert ordinal_prefer(0.03, 1 / 1200, 5, fixed, cfg) == 0.03
