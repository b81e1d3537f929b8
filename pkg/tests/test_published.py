"""Checks against the published aggregate tables shipped in lcscore/data."""
from __future__ import annotations

import statistics

import pytest

from lcscore.aggregation import harmonic_aggregate
from lcscore.auc import decay_rate
from lcscore.io import fixture_lite_schemes, fixture_weight_sensitivity
from lcscore.montecarlo import mc_validate
from lcscore.ranks import (
    aggregation_sensitivity,
    category_weight_sensitivity,
    compare_rankings,
    layer_discrepancy,
    lite_pareto,
    rank_migration,
)


def overall(board):
    return {r.model: r.overall for r in board}


@pytest.mark.parametrize("scope", ["128k", "1m"])
def test_harmonic_and_half_width_reproduce(scope, request):
    board = request.getfixturevalue(f"board_{scope}")
    for r in board:
        h = harmonic_aggregate(r.categories())
        assert abs(h.mean - r.overall) <= 0.01
        assert abs(h.half_width - r.overall_hw) <= 0.01


def test_relative_decay(board_128k, board_1m):
    long = overall(board_1m)
    decay = {m: decay_rate(v, long[m]) for m, v in overall(board_128k).items()}
    assert decay["Claude-Opus-4.6 (max)"] == pytest.approx(0.085, abs=0.001)
    assert decay["GLM-4.7 (Non-reasoning)"] == pytest.approx(0.605, abs=0.001)
    assert min(decay, key=decay.get) == "Claude-Opus-4.6 (max)"
    assert max(decay, key=decay.get) == "GLM-4.7 (Non-reasoning)"
    assert statistics.fmean(decay.values()) == pytest.approx(0.243, abs=0.001)


def test_rank_migration(board_128k, board_1m):
    shifts = rank_migration(overall(board_128k), overall(board_1m))
    assert shifts["GPT-5.2 (xhigh)"] == -4
    assert shifts["Gemini-3-Flash-Preview (high)"] == 2
    assert shifts["Kimi-Linear-48B-A3B-Instruct"] == 3
    assert shifts["DeepSeek-V3.1 (Non-reasoning)"] == -2
    assert sum(abs(v) >= 2 for v in shifts.values()) == 7
    # ranks from the score columns agree with the printed rank columns
    printed = {r.model: r.rank for r in board_128k}
    printed_long = {r.model: r.rank for r in board_1m}
    assert shifts == {m: printed[m] - printed_long[m] for m in printed}


@pytest.mark.parametrize("scope,r2,rho,count,gap", [("128k", 0.61, 0.74, 15, 12), ("1m", 0.73, 0.88, 11, 7)])
def test_layer_discrepancy(scope, r2, rho, count, gap, request):
    board = request.getfixturevalue(f"board_{scope}")
    ld = layer_discrepancy({r.model: r.foundational for r in board}, {r.model: r.application for r in board})
    assert ld.stats.r2 == pytest.approx(r2, abs=0.005)
    assert ld.stats.rho == pytest.approx(rho, abs=0.005)
    assert ld.count == count and ld.max_gap == gap


AGG = {
    "128k": {"arithmetic": (0.995, 0.975, 3), "geometric": (0.998, 0.988, 2), "minimum": (0.945, 0.809, 7)},
    "1m": {"arithmetic": (0.997, 0.975, 1), "geometric": (0.999, 0.988, 1), "minimum": (0.988, 0.932, 2)},
}
REWEIGHT = {
    "128k": {"reduced-s-weight": (0.992, 0.951, 3), "drop-s": (0.969, 0.877, 6)},
    "1m": {"reduced-s-weight": (0.999, 0.988, 1), "drop-s": (0.992, 0.963, 4)},
}


@pytest.mark.parametrize("scope", ["128k", "1m"])
def test_aggregation_and_reweight_sensitivity(scope, request):
    cats = {r.model: r.categories() for r in request.getfixturevalue(f"board_{scope}")}
    got = aggregation_sensitivity(cats)
    got.update(category_weight_sensitivity(cats))
    for name, (rho, tau, shift) in {**AGG[scope], **REWEIGHT[scope]}.items():
        assert got[name].rho == pytest.approx(rho, abs=0.0005), name
        # rounded 128K triples tie two models under the arithmetic mean; tau-b counts the tie
        tol = 0.002 if (scope, name) == ("128k", "arithmetic") else 0.0005
        assert got[name].tau == pytest.approx(tau, abs=tol), name
        assert got[name].max_abs_rank_shift == shift, name


@pytest.mark.parametrize("scope,scheme,rho", [(131072, "logarithmic", 1.000), (131072, "inverse-logarithmic", 1.000),
                                              (1048576, "logarithmic", 0.999), (1048576, "inverse-logarithmic", 0.997)])
def test_weight_scheme_rho_on_printed_ranks(scope, scheme, rho):
    rows = fixture_weight_sensitivity()

    def col(s):
        return {r["model"]: -r["rank"] for r in rows if r["scope"] == scope and r["scheme"] == s}

    st = compare_rankings(col("uniform"), col(scheme))
    assert st.rho == pytest.approx(rho, abs=0.001)
    if scope == 1048576:
        assert st.max_abs_rank_shift <= 1


def test_uniform_column_ranks_match_superscripts():
    from lcscore.ranks import rank_vector

    rows = fixture_weight_sensitivity()
    col = {r["model"]: r["score"] for r in rows if r["scope"] == 1048576 and r["scheme"] == "uniform"}
    printed = {r["model"]: r["rank"] for r in rows if r["scope"] == 1048576 and r["scheme"] == "uniform"}
    assert rank_vector(col) == printed


def test_lite_table():
    schemes, front = lite_pareto(fixture_lite_schemes())
    published_eff = {"Full 8 slices": 1.00, "7 slices (drop 1M)": 1.83, "3 pts: 8K+128K+1M": 1.65,
                     "6 slices (drop 512K+1M)": 3.12, "5 slices: 8K-128K": 4.90, "128K only": 6.74,
                     "256K only": 4.89, "8K + 128K": 6.55}
    for s in schemes:
        assert abs(s.efficiency - published_eff[s.name]) <= 0.01, s.name
    assert set(front) == {"Full 8 slices", "7 slices (drop 1M)", "6 slices (drop 512K+1M)", "128K only", "256K only"}


def test_mc_ratio_in_published_regime(board_128k):
    ratios = [mc_validate(r.categories(), 100_000, 0).ratio for r in board_128k]
    assert all(0.99 <= x <= 1.01 for x in ratios)
