"""Monte Carlo check of the delta-method interval on the harmonic aggregate.

Each trial draws B, C, S independently from normals centred on the category
estimates and evaluates the harmonic mean; the empirical 95% interval is the
2.5/97.5 percentile pair (linear interpolation between order statistics).

Trials are split into fixed-size blocks, each with its own child stream of a
``SeedSequence``, so results depend only on (seed, trials, inputs) and never
on how many workers run the blocks.
"""
from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from lcscore.aggregation import CategoryAggregate, harmonic_aggregate

BLOCK = 16384
MAX_REJECTION = 0.10


class DistributionMismatchError(ValueError):
    """Too many nonpositive draws: the normal approximation does not hold."""


@dataclass(frozen=True)
class McReport:
    trials: int
    seed: int
    point: float
    empirical_ci: tuple[float, float]
    delta_ci: tuple[float, float]
    empirical_half_width: float
    delta_half_width: float
    ratio: float
    rejected: int

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2)


def _block(seed_seq: np.random.SeedSequence, size: int, means, sds) -> tuple[np.ndarray, int]:
    rng = np.random.Generator(np.random.PCG64(seed_seq))
    out = np.empty(size)
    filled = rejected = 0
    while filled < size:
        need = size - filled
        draws = rng.standard_normal((need, 3)) * sds + means
        ok = (draws > 0).all(axis=1)
        good = draws[ok]
        rejected += need - len(good)
        out[filled:filled + len(good)] = 3.0 / (1.0 / good).sum(axis=1)
        filled += len(good)
        if rejected > MAX_REJECTION * (size + rejected):
            break
    return out[:filled], rejected


def mc_validate(agg: CategoryAggregate, trials: int = 100_000, seed: int = 0, workers: int = 1) -> McReport:
    if trials < 1000:
        raise ValueError(f"trials must be >= 1000, got {trials}")
    delta = harmonic_aggregate(agg)
    means = np.array([e.mean for e in agg.triple])
    sds = np.sqrt([e.variance for e in agg.triple])
    dci = (delta.mean - delta.half_width, delta.mean + delta.half_width)
    if not sds.any():
        return McReport(trials, seed, delta.mean, (delta.mean, delta.mean), dci, 0.0, 0.0, 1.0, 0)

    sizes = [BLOCK] * (trials // BLOCK) + ([trials % BLOCK] if trials % BLOCK else [])
    children = np.random.SeedSequence(seed).spawn(len(sizes))
    jobs = list(zip(children, sizes))
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(lambda j: _block(j[0], j[1], means, sds), jobs))
    else:
        parts = [_block(s, n, means, sds) for s, n in jobs]
    rejected = sum(r for _, r in parts)
    drawn = trials + rejected
    if rejected > MAX_REJECTION * drawn or sum(len(h) for h, _ in parts) < trials:
        raise DistributionMismatchError(
            f"{rejected} of {drawn} draws had a nonpositive category; delta method inapplicable"
        )
    h = np.concatenate([h for h, _ in parts])
    lo, hi = np.percentile(h, [2.5, 97.5], method="linear")
    emp_hw = (hi - lo) / 2.0
    ratio = delta.half_width / emp_hw if emp_hw > 0 else 1.0
    return McReport(trials, seed, delta.mean, (float(lo), float(hi)), dci,
                    float(emp_hw), delta.half_width, float(ratio), int(rejected))
