"""Delta-method / Monte Carlo half-width ratio over a shrinking-variance ladder."""
from __future__ import annotations

import argparse

from lcscore.aggregation import CategoryAggregate
from lcscore.montecarlo import mc_validate


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--mean", type=float, default=50.0)
    p.add_argument("--variances", default="400,100,25,9,1,0.01,0.0001")
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--seeds", default="0,42")
    args = p.parse_args()
    seeds = [int(s) for s in args.seeds.split(",")]
    print("variance  " + "  ".join(f"seed {s:<4}" for s in seeds))
    for v in (float(x) for x in args.variances.split(",")):
        agg = CategoryAggregate.from_values((args.mean,) * 3, (v,) * 3)
        print(f"{v:<9g} " + "  ".join(f"{mc_validate(agg, args.trials, s).ratio:.5f}  " for s in seeds))


if __name__ == "__main__":
    main()
