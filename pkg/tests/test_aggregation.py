from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from lcscore.aggregation import (
    AggregationError,
    CategoryAggregate,
    aggregate,
    alt_aggregate,
    category_means,
    harmonic_aggregate,
    score_surface,
    weighted_harmonic,
)
from lcscore.auc import LOGARITHMIC, UNIFORM
from lcscore.core import ScoreSurface, SliceScore

pos = st.floats(0.5, 100)
var = st.floats(0, 25)


def cats(b, c, s, v=(0.0, 0.0, 0.0)):
    return CategoryAggregate.from_values((b, c, s), v)


def constant_surface(config, model, per_layer, variance=0.0):
    cells = {}
    for d in config.dimensions:
        for comp in d.components:
            for sl in comp.slices or (None,):
                cells[(model, comp.name, sl)] = SliceScore(per_layer[d.layer], variance, 100)
    return ScoreSurface(cells)


def test_harmonic_published_row():
    assert harmonic_aggregate(cats(86.36, 74.98, 73.37)).mean == pytest.approx(77.83, abs=0.005)


def test_harmonic_variance_hand_value():
    h = harmonic_aggregate(cats(50, 50, 50, (9, 9, 9)))
    assert h.mean == pytest.approx(50)
    assert h.variance == pytest.approx(3.0, abs=1e-12)
    assert h.half_width == pytest.approx(1.96 * math.sqrt(3), abs=1e-12)


def test_ninety_ninety_thirty():
    a = cats(90, 90, 30)
    assert alt_aggregate(a, "arithmetic").mean == pytest.approx(70.0)
    assert alt_aggregate(a, "minimum").mean == 30
    # formula value; the prose figure 50.6 does not follow from 3/(1/90+1/90+1/30)
    assert harmonic_aggregate(a).mean == pytest.approx(54.0, abs=1e-12)


def test_weighted_harmonic_examples():
    a = cats(80, 40, 10, (4, 9, 16))
    assert weighted_harmonic(a, (0.5, 0.5, 0.0)).mean == pytest.approx(160 / 3, abs=1e-12)
    assert weighted_harmonic(a, (1.0, 0.0, 0.0)).mean == 80
    assert weighted_harmonic(a, (1.0, 0.0, 0.0)).variance == pytest.approx(4)
    eq = weighted_harmonic(a, (1 / 3, 1 / 3, 1 / 3))
    h = harmonic_aggregate(a)
    assert eq.mean == pytest.approx(h.mean, rel=1e-14) and eq.variance == pytest.approx(h.variance, rel=1e-12)
    with pytest.raises(AggregationError):
        weighted_harmonic(a, (0.5, 0.5, 0.5))


def test_nonpositive_rejected():
    with pytest.raises(AggregationError):
        harmonic_aggregate(cats(0, 50, 50))
    with pytest.raises(AggregationError):
        alt_aggregate(cats(-1, 50, 50), "geometric")


@given(pos, pos, pos)
def test_mean_ordering(b, c, s):
    a = cats(b, c, s)
    mn, h, g, ar = (aggregate(a, k).mean for k in ("minimum", "harmonic", "geometric", "arithmetic"))
    eps = 1e-9 * ar
    assert mn <= h + eps and h <= g + eps and g <= ar + eps


@given(pos)
def test_equal_inputs_coincide(x):
    a = cats(x, x, x)
    for k in ("minimum", "harmonic", "geometric", "arithmetic"):
        assert aggregate(a, k).mean == pytest.approx(x, rel=1e-12)


@given(pos, pos, pos, var, var, var, st.floats(0.1, 10))
def test_harmonic_symmetry_and_scaling(b, c, s, vb, vc, vs, lam):
    h = harmonic_aggregate(cats(b, c, s, (vb, vc, vs)))
    p = harmonic_aggregate(cats(s, b, c, (vs, vb, vc)))
    assert p.mean == pytest.approx(h.mean, rel=1e-12) and p.variance == pytest.approx(h.variance, rel=1e-9, abs=1e-300)
    sc = harmonic_aggregate(cats(lam * b, lam * c, lam * s, (lam**2 * vb, lam**2 * vc, lam**2 * vs)))
    assert sc.mean == pytest.approx(lam * h.mean, rel=1e-12)
    assert sc.variance == pytest.approx(lam**2 * h.variance, rel=1e-9, abs=1e-300)
    assert h.variance >= 0
    assert (h.variance == 0) == (vb == vc == vs == 0)


def test_harmonic_variance_matches_numeric_gradient():
    rng = np.random.default_rng(1)
    for _ in range(50):
        x = rng.uniform(10, 90, 3)
        v = rng.uniform(0, 10, 3)
        h = harmonic_aggregate(cats(*x, v))
        grad = []
        for i in range(3):
            e = np.zeros(3)
            e[i] = 1e-5
            grad.append((harmonic_aggregate(cats(*(x + e))).mean - harmonic_aggregate(cats(*(x - e))).mean) / 2e-5)
        assert h.variance == pytest.approx(float(np.dot(np.square(grad), v)), rel=1e-6)


def test_category_means_from_consistent_surface(config):
    s = constant_surface(config, "gemini", {"foundational": 86.36, "application": 74.98, "holistic": 73.37})
    for scope in (131072, 1048576):
        a = category_means(s, config, "gemini", scope)
        assert (a.b.mean, a.c.mean, a.s.mean) == pytest.approx((86.36, 74.98, 73.37), abs=1e-9)
        assert harmonic_aggregate(a).mean == pytest.approx(77.83, abs=0.005)


def test_category_variance_divides_by_dimension_count(config):
    s = constant_surface(config, "m", {"foundational": 60, "application": 60, "holistic": 60}, variance=9.0)
    a = category_means(s, config, "m", 131072)
    # each constant-variance AUC keeps sum(alpha^2)*9, three foundational dims -> /3
    from lcscore.auc import alpha_weights

    v_auc = 9.0 * sum(x * x for x in alpha_weights((8192, 16384, 32768, 65536, 131072)).alphas)
    assert a.b.variance == pytest.approx(v_auc / 3, rel=1e-12)
    # holistic: two components of variance 9 averaged -> 9/2, a single dimension
    assert a.s.variance == pytest.approx(4.5)


def test_holistic_fixed_across_scopes(config, surface):
    r1 = score_surface(surface, config, 131072)
    r2 = score_surface(surface, config, 1048576)
    for m in r1:
        assert r1[m].categories.s == r2[m].categories.s


def test_log_weights_on_constant_curves_equal_uniform(config):
    s = constant_surface(config, "m", {"foundational": 61.5, "application": 42.25, "holistic": 70})
    a = score_surface(s, config, 1048576, UNIFORM)["m"].overall.mean
    b = score_surface(s, config, 1048576, LOGARITHMIC)["m"].overall.mean
    assert a == pytest.approx(b, rel=1e-13)


def test_score_surface_thread_independent(config, surface):
    one = score_surface(surface, config, 1048576, workers=1)
    many = score_surface(surface, config, 1048576, workers=4)
    assert list(one) == list(many)
    assert [r.overall for r in one.values()] == [r.overall for r in many.values()]


def test_unknown_scope_rejected(config, surface):
    with pytest.raises(AggregationError):
        score_surface(surface, config, 100000)
