"""Recompute every quantity derivable from the published aggregate tables and print it."""
from __future__ import annotations

import argparse
import statistics

from lcscore.aggregation import harmonic_aggregate
from lcscore.auc import decay_rate
from lcscore.io import fixture_leaderboard, fixture_lite_schemes, fixture_weight_sensitivity
from lcscore.montecarlo import mc_validate
from lcscore.ranks import (
    aggregation_sensitivity,
    category_weight_sensitivity,
    compare_rankings,
    layer_discrepancy,
    lite_pareto,
    rank_migration,
)


def leaderboards() -> None:
    for scope in ("128k", "1m"):
        rows = fixture_leaderboard(scope)
        d_mean = max(abs(harmonic_aggregate(r.categories()).mean - r.overall) for r in rows)
        d_hw = max(abs(harmonic_aggregate(r.categories()).half_width - r.overall_hw) for r in rows)
        print(f"[{scope}] harmonic max|diff| {d_mean:.4f}, half-width max|diff| {d_hw:.4f}")
        ld = layer_discrepancy({r.model: r.foundational for r in rows}, {r.model: r.application for r in rows})
        print(f"[{scope}] B vs C: R2 {ld.stats.r2:.3f}, rho {ld.stats.rho:.3f}, |drank|>=4: {ld.count}, max {ld.max_gap:.0f}")
        cats = {r.model: r.categories() for r in rows}
        table = {**aggregation_sensitivity(cats), **category_weight_sensitivity(cats)}
        for name, st in table.items():
            print(f"[{scope}]   {name:<17} rho {st.rho:.3f} tau {st.tau:.3f} max|dr| {st.max_abs_rank_shift:.0f}")


def decay_and_migration() -> None:
    short = {r.model: r.overall for r in fixture_leaderboard("128k")}
    long = {r.model: r.overall for r in fixture_leaderboard("1m")}
    decay = {m: decay_rate(v, long[m]) for m, v in short.items()}
    print(f"mean relative decay {statistics.fmean(decay.values()):.2%}")
    lo, hi = min(decay, key=decay.get), max(decay, key=decay.get)
    print(f"lowest {lo} {decay[lo]:.2%}, highest {hi} {decay[hi]:.2%}")
    shifts = rank_migration(short, long)
    print(f"models moving >= 2 ranks: {sum(abs(v) >= 2 for v in shifts.values())}; "
          f"moving at all: {sum(v != 0 for v in shifts.values())}")
    for m, v in sorted(shifts.items(), key=lambda kv: kv[1]):
        if v:
            print(f"  {v:+.0f}  {m}")


def weight_schemes() -> None:
    rows = fixture_weight_sensitivity()
    for scope in (131072, 1048576):
        col = lambda s: {r["model"]: -r["rank"] for r in rows if r["scope"] == scope and r["scheme"] == s}
        for scheme in ("logarithmic", "inverse-logarithmic"):
            st = compare_rankings(col("uniform"), col(scheme))
            print(f"[{scope}] uniform vs {scheme}: rho {st.rho:.5f}, max|dr| {st.max_abs_rank_shift:.0f}")


def lite() -> None:
    schemes, front = lite_pareto(fixture_lite_schemes())
    for s in schemes:
        mark = "*" if s.name in front else " "
        print(f" {mark} {s.name:<24} cost {s.relative_cost:.3f} rho {s.rho:.3f} efficiency {s.efficiency:.2f}")


def monte_carlo(trials: int, seed: int) -> None:
    ratios = [mc_validate(r.categories(), trials, seed).ratio for r in fixture_leaderboard("128k")]
    print(f"delta/MC half-width ratio on 128K categories: {min(ratios):.4f} .. {max(ratios):.4f}")


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args()
    leaderboards()
    decay_and_migration()
    weight_schemes()
    lite()
    monte_carlo(args.trials, args.seed)


if __name__ == "__main__":
    main()
