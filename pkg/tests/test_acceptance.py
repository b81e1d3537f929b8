"""Acceptance criteria 1-12. Each prints one PASS/FAIL line.

Run directly (``python3 tests/test_acceptance.py``) or through pytest.
"""
from __future__ import annotations

import math
import tempfile
import time
from pathlib import Path

import numpy as np
import pytest

from lcscore.aggregation import CategoryAggregate, aggregate, harmonic_aggregate
from lcscore.auc import ScoreCurve, alpha_weights, auc, decay_rate
from lcscore.cli import main
from lcscore.core import DEFAULT_GRID
from lcscore.io import default_taxonomy, fixture_leaderboard, fixture_lite_schemes, fixture_weight_sensitivity, write_slice_scores
from lcscore.metrics import (
    normalize_text,
    score_answer_level,
    score_exact_match,
    score_mrecall_at_k,
    score_qpem,
    score_set_f1,
    weighted_composite,
    score_weighted_binary_composite,
)
from lcscore.montecarlo import mc_validate
from lcscore.ranks import compare_rankings, lite_pareto, rank_migration
from lcscore.synthetic import synthetic_surface
from lcscore.uncertainty import clt_variance, cluster_variance


def c1():
    t = time.perf_counter()
    worst = 0.0
    for scope in ("128k", "1m"):
        for r in fixture_leaderboard(scope):
            worst = max(worst, abs(harmonic_aggregate(r.categories()).mean - r.overall))
    ms = (time.perf_counter() - t) * 1e3
    ex = (harmonic_aggregate(CategoryAggregate.from_values((86.36, 74.98, 73.37))).mean,
          harmonic_aggregate(CategoryAggregate.from_values((77.19, 63.99, 71.72))).mean)
    ok = worst <= 0.01 and abs(ex[0] - 77.83) <= 0.01 and abs(ex[1] - 70.55) <= 0.01
    return ok, f"max |H - published| = {worst:.4f} over 52 rows; examples {ex[0]:.2f}, {ex[1]:.2f}; {ms:.1f} ms"


def c2():
    short = {r.model: r.overall for r in fixture_leaderboard("128k")}
    long = {r.model: r.overall for r in fixture_leaderboard("1m")}
    opus = decay_rate(short["Claude-Opus-4.6 (max)"], long["Claude-Opus-4.6 (max)"]) * 100
    glm = decay_rate(short["GLM-4.7 (Non-reasoning)"], long["GLM-4.7 (Non-reasoning)"]) * 100
    ok = abs(opus - 8.5) <= 0.1 and abs(glm - 60.5) <= 0.1
    return ok, f"Claude-Opus-4.6 {opus:.3f}%, GLM-4.7 {glm:.3f}%"


def c3():
    a, b = decay_rate(88.21, 47.31) * 100, decay_rate(74.87, 30.51) * 100
    return abs(a - 46.4) <= 0.1 and abs(b - 59.2) <= 0.1, f"{a:.3f}%, {b:.3f}%"


def c4():
    short = {r.model: r.overall for r in fixture_leaderboard("128k")}
    long = {r.model: r.overall for r in fixture_leaderboard("1m")}
    d = rank_migration(short, long)
    want = {"GPT-5.2 (xhigh)": -4, "Gemini-3-Flash-Preview (high)": 2,
            "Kimi-Linear-48B-A3B-Instruct": 3, "DeepSeek-V3.1 (Non-reasoning)": -2}
    n2 = sum(abs(v) >= 2 for v in d.values())
    ok = all(d[m] == v for m, v in want.items()) and n2 == 7
    return ok, ", ".join(f"{m.split(' ')[0]} {d[m]:+.0f}" for m in want) + f"; |dr|>=2: {n2}"


def c5():
    rows = fixture_weight_sensitivity()

    def col(scope, scheme):
        return {r["model"]: -r["rank"] for r in rows if r["scope"] == scope and r["scheme"] == scheme}

    r128 = compare_rankings(col(131072, "uniform"), col(131072, "logarithmic")).rho
    r1m = compare_rankings(col(1048576, "uniform"), col(1048576, "logarithmic")).rho
    ok = abs(r128 - 1.000) <= 0.001 and r1m >= 0.999 and abs(r1m - 0.999) <= 0.001
    return ok, f"rho 128K {r128:.5f}, 1M {r1m:.5f} (on printed ranks)"


def c6():
    schemes, front = lite_pareto(fixture_lite_schemes())
    eff = {s.name: s.efficiency for s in schemes}["128K only"]
    want = {"Full 8 slices", "7 slices (drop 1M)", "6 slices (drop 512K+1M)", "128K only", "256K only"}
    ok = abs(eff - 6.74) <= 0.01 and set(front) == want and len(front) == 5
    return ok, f"efficiency {eff:.4f}; frontier {sorted(front)}"


def c7():
    al = alpha_weights(DEFAULT_GRID).alphas
    want = [k / 2032 for k in (8, 24, 48, 96, 192, 384, 768, 512)]
    ok = max(abs(a - b) for a, b in zip(al, want)) <= 1e-15 and abs(sum(al) - 1) <= 1e-12
    rng = np.random.default_rng(20240607)
    worst = 0.0
    for _ in range(1000):
        n = int(rng.integers(2, 11))
        ls = np.sort(rng.choice(np.arange(1, 2**21), n, replace=False)).tolist()
        ss = rng.uniform(0, 100, n).tolist()
        brute = sum((ls[i + 1] - ls[i]) * (ss[i] + ss[i + 1]) / 2 for i in range(n - 1)) / (ls[-1] - ls[0])
        worst = max(worst, abs(auc(ScoreCurve.from_means(ls, ss)).mean - brute))
    ok = ok and worst <= 1e-12
    return ok, f"sum(alpha) - 1 = {sum(al) - 1:.1e}; max |auc - brute| = {worst:.1e} on 1000 curves"


def c8():
    t = time.perf_counter()
    r = mc_validate(CategoryAggregate.from_values((50, 50, 50), (9, 9, 9)), 100_000, 42)
    closed = 1.96 * math.sqrt(3)
    rel = abs(r.empirical_half_width - closed) / closed
    ladder = (400, 100, 25, 9, 1)
    ratios = [mc_validate(CategoryAggregate.from_values((50, 50, 50), (v, v, v)), 100_000, 42).ratio for v in ladder]
    gaps = [abs(x - 1) for x in ratios]
    mono = all(b < a for a, b in zip(gaps, gaps[1:]))
    secs = time.perf_counter() - t
    ok = rel <= 0.02 and mono and 0.99 <= ratios[-1] <= 1.01 and secs < 10
    return ok, (f"MC hw {r.empirical_half_width:.4f} vs {closed:.4f} ({rel:.2%}); "
                f"ladder ratios {[round(x, 4) for x in ratios]}; {secs:.2f} s")


def c9():
    rng = np.random.default_rng(99)
    worst = 0.0
    for _ in range(1000):
        xs = rng.uniform(0, 1, int(rng.integers(2, 200))).tolist()
        worst = max(worst, abs(cluster_variance([(x, i) for i, x in enumerate(xs)]).variance - clt_variance(xs).variance))
    v = cluster_variance([(1, "a"), (1, "a"), (0, "b"), (0, "b")]).variance
    return worst <= 1e-12 and v == 0.25, f"max |cluster - clt| = {worst:.1e}; fixture variance {v!r}"


def c10():
    rng = np.random.default_rng(10)
    bad = 0
    for b, c, s in rng.uniform(1e-3, 100, (10_000, 3)):
        a = CategoryAggregate.from_values((b, c, s))
        mn, h, g, ar = (aggregate(a, k).mean for k in ("minimum", "harmonic", "geometric", "arithmetic"))
        eps = 1e-12 * ar
        bad += not (mn <= h + eps and h <= g + eps and g <= ar + eps)
    eq_bad = 0
    for x in rng.uniform(1e-3, 100, 100):
        vals = [aggregate(CategoryAggregate.from_values((x, x, x)), k).mean for k in ("minimum", "harmonic", "geometric", "arithmetic")]
        eq_bad += max(vals) - min(vals) > 1e-12 * x
    return bad == 0 and eq_bad == 0, f"{bad} ordering violations in 10000 triples; {eq_bad} mismatches on equal triples"


def c11():
    checks = [
        normalize_text("Paris, France!") == "paris france",
        normalize_text("") == "",
        normalize_text("  a  B ") == "a b",
        score_exact_match("alpha", "alpha") == 1,
        score_exact_match("alpha", "beta") == 0,
        score_exact_match("alpha ", "alpha") == 1,
        score_qpem("paris france is the answer", ["Paris, France"]) == 1,
        score_qpem("the answer is paris", ["Paris, France"]) == 0,
        score_qpem("Any Gold!", ["Any Gold!"]) == 1,
        score_set_f1({"a", "b"}, {"a", "b"}) == 1,
        score_set_f1({"a", "b"}, {"b", "c"}) == 0.5,
        score_set_f1(set(), {"a"}) == 0,
        score_mrecall_at_k(["a", "x", "b"], {"a", "b"}, 3) == 1,
        score_mrecall_at_k(["a", "x", "y"], {"a", "b"}, 3) == 0,
        score_mrecall_at_k(["a", "b"], {"a", "b", "c"}, 2) == 1,
        score_answer_level(42, 42, "numeric", tau=5.0) == 1,
        abs(score_answer_level(40, 42, "numeric", tau=2.0) - 0.3679) < 5e-5,
        score_answer_level("Europe", "europe", "categorical") == 1,
        score_weighted_binary_composite({"only": [1, 0, 1, 1]}, {"only": 2.0}) == (clt_variance([1, 0, 1, 1]).mean, clt_variance([1, 0, 1, 1]).variance),
        all(abs(a - b) < 1e-12 for a, b in zip(weighted_composite({"m1": (0.6, 0.24, 100), "m2": (0.4, 0.24, 50)}), (0.5333333333333333, 0.0016))),
        abs(score_weighted_binary_composite({"a": [1, 0, 1, 0], "b": [0, 1]})[0] - 0.5) < 1e-15,
    ]
    return all(checks), f"{sum(checks)}/{len(checks)} metric examples"


def c12():
    cfg = default_taxonomy()
    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        surf = tmp / "surface.csv"
        surf.write_text(write_slice_scores(synthetic_surface(cfg, n_models=12, seed=3), cfg))
        outputs = []
        for run, workers in enumerate(("1", "4")):
            d = tmp / f"run{run}"
            d.mkdir()
            codes = [
                main(["aggregate", "--slices", str(surf), "--scope", "1M", "--out", str(d / "lb.md"), "--workers", workers]),
                main(["analyze", "--mode", "weights", "--slices", str(surf), "--scope", "1M", "--out", str(d), "--workers", workers]),
                main(["analyze", "--mode", "mc", "--trials", "20000", "--seed", "7", "--out", str(d), "--workers", workers]),
                main(["analyze", "--mode", "decay", "--slices", str(surf), "--out", str(d), "--workers", workers]),
            ]
            files = sorted(p.name for p in d.iterdir())
            outputs.append((codes, {f: (d / f).read_bytes() for f in files}))
        same = outputs[0][1] == outputs[1][1]
        ok = same and all(c == 0 for c in outputs[0][0] + outputs[1][0])
        return ok, f"{len(outputs[0][1])} files byte-identical across runs (workers 1 vs 4): {same}"


CRITERIA = [
    (1, "Harmonic reproduction", c1), (2, "Relative decay", c2), (3, "Dimension decay", c3),
    (4, "Rank migration", c4), (5, "Weight-scheme sensitivity", c5), (6, "Lite efficiency and frontier", c6),
    (7, "Alpha-weight oracle", c7), (8, "Delta method vs Monte Carlo", c8), (9, "Estimator degeneracy", c9),
    (10, "Aggregator ordering", c10), (11, "Metric unit tests", c11), (12, "Determinism", c12),
]


def report(num, name, fn) -> tuple[bool, str]:
    ok, detail = fn()
    return ok, f"[{'PASS' if ok else 'FAIL'}] criterion {num:>2} {name}: {detail}"


@pytest.mark.parametrize("num,name,fn", CRITERIA, ids=[f"c{n:02d}" for n, _, _ in CRITERIA])
def test_criterion(num, name, fn, capsys):
    ok, line = report(num, name, fn)
    with capsys.disabled():
        print("\n" + line)
    assert ok, line


if __name__ == "__main__":
    results = [report(*c) for c in CRITERIA]
    for _, line in results:
        print(line)
    raise SystemExit(0 if all(ok for ok, _ in results) else 1)
