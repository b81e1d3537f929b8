from __future__ import annotations

import json
import math

import numpy as np
import pytest

from lcscore.aggregation import CategoryAggregate, harmonic_aggregate
from lcscore.montecarlo import DistributionMismatchError, mc_validate


def agg(m, v):
    return CategoryAggregate.from_values(m, v)


def test_zero_variance_degenerate():
    r = mc_validate(agg((40, 50, 60), (0, 0, 0)), 1000, 0)
    assert r.ratio == 1.0 and r.empirical_half_width == 0.0
    assert r.empirical_ci[0] == r.empirical_ci[1]


def test_symmetric_case_matches_closed_form():
    r = mc_validate(agg((50, 50, 50), (9, 9, 9)), 100_000, 42)
    assert r.delta_half_width == pytest.approx(1.96 * math.sqrt(3), rel=1e-12)
    assert 0.98 <= r.ratio <= 1.02
    assert r.empirical_ci[0] <= r.point <= r.empirical_ci[1]


def test_percentile_convention():
    # the empirical interval is the type-7 percentile pair of the simulated H values
    r = mc_validate(agg((30, 60, 80), (4, 4, 4)), 5000, 3)
    assert r.empirical_half_width == pytest.approx((r.empirical_ci[1] - r.empirical_ci[0]) / 2)


def test_deterministic_and_thread_independent():
    a = agg((70, 55, 62), (3, 5, 8))
    r1 = mc_validate(a, 50_000, 11, workers=1)
    r2 = mc_validate(a, 50_000, 11, workers=4)
    assert r1 == r2 and r1.to_json() == r2.to_json()
    assert mc_validate(a, 50_000, 12) != r1
    json.loads(r1.to_json())


def test_too_few_trials():
    with pytest.raises(ValueError):
        mc_validate(agg((50, 50, 50), (1, 1, 1)), 999)


def test_rejection_regime_raises():
    with pytest.raises(DistributionMismatchError):
        mc_validate(agg((5, 50, 50), (100, 1, 1)), 10_000, 0)


def test_moderate_rejection_is_reported():
    r = mc_validate(agg((8, 50, 50), (16, 1, 1)), 20_000, 0)
    assert 0 < r.rejected < 0.1 * (20_000 + r.rejected)


def test_ratio_ladder_converges():
    ratios = [mc_validate(agg((50, 50, 50), (v, v, v)), 100_000, 42).ratio for v in (400, 100, 25, 9, 1)]
    gaps = [abs(r - 1) for r in ratios]
    assert all(b < a for a, b in zip(gaps, gaps[1:]))
    assert 0.99 <= ratios[-1] <= 1.01


def test_coverage_under_self_simulation():
    # the delta interval around the truth should cover fresh estimates ~95% of the time
    rng = np.random.default_rng(5)
    truth = np.array([60.0, 45.0, 70.0])
    v = np.array([2.0, 3.0, 2.5])
    h_true = harmonic_aggregate(agg(truth, v))
    hits = 0
    n = 2000
    for _ in range(n):
        x = rng.normal(truth, np.sqrt(v))
        h = harmonic_aggregate(agg(x, v))
        hits += abs(h.mean - h_true.mean) <= h.half_width
    assert abs(hits / n - 0.95) < 0.02
