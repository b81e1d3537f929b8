"""Normalized trapezoidal AUC over a length grid, with linear variance propagation.

The trapezoid rule is linear in the slice scores, so both the unweighted and
the slice-weighted AUC reduce to ``sum(c_i * s_i)`` for fixed coefficients
``c_i``; the variance is ``sum(c_i**2 * v_i)`` under independent slices.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from lcscore.core import LengthGrid, SliceScore
from lcscore.uncertainty import Z95, CiEstimate

LOG_ANCHOR = 4096  # log weights: log2(l / 4K)
INVLOG_ANCHOR = 2097152  # inverse-log weights: log2(2M / l)


class DecayError(ValueError):
    pass


@dataclass(frozen=True)
class ScoreCurve:
    slices: tuple[int, ...]
    points: tuple[SliceScore, ...]

    def __post_init__(self):
        object.__setattr__(self, "slices", tuple(int(s) for s in self.slices))
        object.__setattr__(self, "points", tuple(self.points))
        if len(self.slices) != len(self.points):
            raise ValueError("one point per slice required")
        LengthGrid(self.slices)

    @classmethod
    def from_means(cls, slices: Sequence[int], means: Sequence[float], variances: Optional[Sequence[float]] = None):
        variances = variances if variances is not None else [0.0] * len(means)
        return cls(tuple(slices), tuple(SliceScore(m, v) for m, v in zip(means, variances)))


@dataclass(frozen=True)
class TrapezoidWeights:
    slices: tuple[int, ...]
    alphas: tuple[float, ...]


@dataclass(frozen=True)
class SliceWeights:
    scheme: str
    w: Callable[[int], float] | tuple[float, ...]

    def values(self, slices: Sequence[int]) -> np.ndarray:
        if callable(self.w):
            out = np.array([self.w(s) for s in slices], dtype=float)
        else:
            if len(self.w) != len(slices):
                raise ValueError(f"{self.scheme}: {len(self.w)} weights for {len(slices)} slices")
            out = np.asarray(self.w, dtype=float)
        if (out < 0).any():
            raise ValueError(f"{self.scheme}: negative slice weight")
        if not out.any():
            raise ValueError(f"{self.scheme}: all slice weights are zero")
        return out

    @property
    def is_uniform(self) -> bool:
        return self.scheme == "uniform"


UNIFORM = SliceWeights("uniform", lambda l: 1.0)
LOGARITHMIC = SliceWeights("logarithmic", lambda l: math.log2(l / LOG_ANCHOR))
INVERSE_LOGARITHMIC = SliceWeights("inverse-logarithmic", lambda l: math.log2(INVLOG_ANCHOR / l))
SCHEMES = {w.scheme: w for w in (UNIFORM, LOGARITHMIC, INVERSE_LOGARITHMIC)}


def custom_weights(mapping: dict[int, float], name: str = "custom") -> SliceWeights:
    def w(l):
        try:
            return float(mapping[l])
        except KeyError:
            raise ValueError(f"{name}: no weight for slice {l}") from None

    return SliceWeights(name, w)


def alpha_weights(grid: LengthGrid | Sequence[int]) -> TrapezoidWeights:
    """Per-slice coefficients of the normalized trapezoid rule (they sum to 1)."""
    l = tuple(grid.slices if isinstance(grid, LengthGrid) else LengthGrid(tuple(grid)).slices)
    span = 2.0 * (l[-1] - l[0])
    alphas = [(l[1] - l[0]) / span]
    alphas += [(l[i + 1] - l[i - 1]) / span for i in range(1, len(l) - 1)]
    alphas.append((l[-1] - l[-2]) / span)
    return TrapezoidWeights(l, tuple(alphas))


def auc_coefficients(slices: Sequence[int], weights: SliceWeights = UNIFORM) -> np.ndarray:
    alphas = np.array(alpha_weights(slices).alphas)
    if weights.is_uniform:
        return alphas
    # sum_i D_i (w_i s_i + w_{i+1} s_{i+1}) / 2 == span * sum_i w_i alpha_i s_i
    wa = weights.values(slices) * alphas
    denom = wa.sum()
    if denom <= 0:
        raise ValueError(f"{weights.scheme}: effective AUC denominator is zero")
    return wa / denom


def weighted_auc(curve: ScoreCurve, weights: SliceWeights = UNIFORM, z: float = Z95) -> CiEstimate:
    c = auc_coefficients(curve.slices, weights)
    s = np.array([p.mean for p in curve.points])
    v = np.array([p.variance for p in curve.points])
    return CiEstimate(float(c @ s), float((c**2) @ v), z=z, estimator="auc")


def auc(curve: ScoreCurve, z: float = Z95) -> CiEstimate:
    return weighted_auc(curve, UNIFORM, z)


def decay_rate(auc_short, auc_long) -> float:
    """Relative drop (short - long) / short; negative means improvement."""
    short = getattr(auc_short, "mean", auc_short)
    long = getattr(auc_long, "mean", auc_long)
    if short == 0:
        raise DecayError("decay undefined for a zero short-scope score")
    return (short - long) / short
