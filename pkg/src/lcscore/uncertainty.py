"""Subset-level variance estimators for instance scores on the 0-1 scale."""
from __future__ import annotations

import math
import statistics
from collections import defaultdict
from dataclasses import dataclass, replace
from typing import Hashable, Iterable, Mapping, Optional, Sequence

from lcscore.metrics import score_weighted_binary_composite, weighted_composite

Z95 = 1.96

__all__ = [
    "Z95",
    "CiEstimate",
    "InsufficientSampleError",
    "clt_variance",
    "cluster_variance",
    "weighted_variance",
    "scale_to_reporting",
    "weighted_composite",
    "score_weighted_binary_composite",
    "ESTIMATORS",
]


class InsufficientSampleError(ValueError):
    pass


@dataclass(frozen=True)
class CiEstimate:
    mean: float
    variance: float
    z: float = Z95
    n: int = 0
    k_clusters: Optional[int] = None
    estimator: str = "clt"

    def __post_init__(self):
        if self.variance < 0:
            raise ValueError(f"negative variance {self.variance}")

    @property
    def half_width(self) -> float:
        return self.z * math.sqrt(self.variance)

    @classmethod
    def from_half_width(cls, mean: float, half_width: float, z: float = Z95, **kw) -> "CiEstimate":
        return cls(mean, (half_width / z) ** 2, z=z, **kw)


def clt_variance(scores: Sequence[float], z: float = Z95) -> CiEstimate:
    n = len(scores)
    if n < 2:
        raise InsufficientSampleError(f"CLT variance needs n >= 2, got {n}")
    return CiEstimate(statistics.fmean(scores), statistics.variance(scores) / n, z=z, n=n)


def cluster_variance(scores: Iterable[tuple[float, Hashable]], z: float = Z95) -> CiEstimate:
    """Cluster-robust variance of the sample mean.

    ``scores`` holds ``(value, cluster_id)`` pairs. Computes
    K/(K-1) * 1/n**2 * sum_k (sum_{i in C_k} (x_i - xbar))**2.
    """
    pairs = list(scores)
    n = len(pairs)
    groups: dict[Hashable, list[float]] = defaultdict(list)
    for x, c in pairs:
        groups[c].append(x)
    k = len(groups)
    if k < 2:
        raise InsufficientSampleError(f"cluster variance needs K >= 2 clusters, got {k}")
    xbar = statistics.fmean(x for x, _ in pairs)
    ss = math.fsum(math.fsum(x - xbar for x in g) ** 2 for g in groups.values())
    return CiEstimate(xbar, k / (k - 1) * ss / n**2, z=z, n=n, k_clusters=k, estimator="cluster")


def weighted_variance(
    scores: Mapping[str, Sequence[float]],
    weights: Mapping[str, float] | str = "count",
    z: float = Z95,
) -> CiEstimate:
    mean, var = score_weighted_binary_composite(scores, weights)
    n = sum(len(v) for v in scores.values())
    return CiEstimate(mean, var, z=z, n=n, estimator="weighted")


def scale_to_reporting(est: CiEstimate) -> CiEstimate:
    """0-1 scale -> 0-100 scale: mean x100, variance x1e4 (half-width follows)."""
    return replace(est, mean=est.mean * 100.0, variance=est.variance * 1e4)


ESTIMATORS = {
    "clt": clt_variance,
    "cluster": cluster_variance,
    "weighted": weighted_variance,
}
