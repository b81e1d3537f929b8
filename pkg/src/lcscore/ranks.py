"""Cross-model rank analyses: correlations, layer gaps, ablations, sensitivity, Lite schemes."""
from __future__ import annotations

import functools
import itertools
import math
import statistics
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np
from scipy import stats

from lcscore.aggregation import (
    AggregationError,
    CategoryAggregate,
    aggregate,
    overall_values,
    score_surface,
)
from lcscore.auc import UNIFORM, SliceWeights, decay_rate
from lcscore.core import SCOPE_128K, SCOPE_1M, ScoreSurface, TaxonomyConfig

EXACT_P_BELOW = 10


class CorrelationError(ValueError):
    pass


def _aligned(x, y) -> tuple[list[str] | None, np.ndarray, np.ndarray]:
    if isinstance(x, Mapping):
        if not isinstance(y, Mapping) or set(x) != set(y):
            raise CorrelationError("both inputs must cover the same models")
        keys = list(x)
        return keys, np.array([x[k] for k in keys], float), np.array([y[k] for k in keys], float)
    a, b = np.asarray(x, float), np.asarray(y, float)
    if a.shape != b.shape:
        raise CorrelationError("inputs differ in length")
    return None, a, b


def _ranks(a: np.ndarray) -> np.ndarray:
    # rank 1 = highest value, ties share their average rank
    return stats.rankdata(-a, method="average")


def rank_vector(values: Mapping[str, float] | Sequence[float]):
    if isinstance(values, Mapping):
        keys = list(values)
        r = _ranks(np.array([values[k] for k in keys], float))
        return {k: float(v) for k, v in zip(keys, r)}
    return [float(v) for v in _ranks(np.asarray(values, float))]


def _pearson(a: np.ndarray, b: np.ndarray) -> float:
    a, b = a - a.mean(), b - b.mean()
    den = math.sqrt(float(a @ a) * float(b @ b))
    if den == 0:
        raise CorrelationError("correlation undefined for constant input")
    return float(np.clip((a @ b) / den, -1.0, 1.0))


@functools.lru_cache(maxsize=None)
def _permutations(n: int) -> np.ndarray:
    return np.array(list(itertools.permutations(range(n))), dtype=np.int8)


def spearman(x, y) -> tuple[float, float]:
    """Spearman rho with a two-sided p-value.

    The p-value uses the t approximation for n >= 10 and an exact enumeration
    of all permutations below that.
    """
    _, a, b = _aligned(x, y)
    n = len(a)
    if n < 3:
        raise CorrelationError(f"spearman needs >= 3 models, got {n}")
    ra, rb = _ranks(a), _ranks(b)
    rho = _pearson(ra, rb)
    if n >= EXACT_P_BELOW:
        if abs(rho) == 1.0:
            return rho, 0.0
        t = rho * math.sqrt((n - 2) / (1 - rho * rho))
        return rho, float(2 * stats.t.sf(abs(t), n - 2))
    ca = ra - ra.mean()
    cb = rb - rb.mean()
    den = math.sqrt(float(ca @ ca) * float(cb @ cb))
    null = cb[_permutations(n)] @ ca / den
    p = float(np.mean(np.abs(null) >= abs(rho) - 1e-12))
    return rho, p


def kendall(x, y) -> float:
    """Kendall tau-b (tie-corrected)."""
    _, a, b = _aligned(x, y)
    n = len(a)
    if n < 3:
        raise CorrelationError(f"kendall needs >= 3 models, got {n}")
    i, j = np.triu_indices(n, 1)
    da, db = np.sign(a[i] - a[j]), np.sign(b[i] - b[j])
    n1, n2 = np.count_nonzero(da), np.count_nonzero(db)
    if n1 == 0 or n2 == 0:
        raise CorrelationError("correlation undefined for constant input")
    return float((da * db).sum() / math.sqrt(n1 * n2))


def pearson_r2(x, y) -> float:
    _, a, b = _aligned(x, y)
    return _pearson(a, b) ** 2


@dataclass
class RankStats:
    rho: float
    tau: float
    p_rho: float
    r2: Optional[float] = None
    shifts: dict[str, float] = field(default_factory=dict)

    @property
    def max_abs_rank_shift(self) -> float:
        return max((abs(v) for v in self.shifts.values()), default=0.0)

    def count_shifts(self, at_least: float = 2) -> int:
        return sum(abs(v) >= at_least for v in self.shifts.values())

    def as_dict(self) -> dict:
        return {
            "rho": self.rho, "tau": self.tau, "p_rho": self.p_rho, "r2": self.r2,
            "max_abs_rank_shift": self.max_abs_rank_shift,
            "shifts_ge2": self.count_shifts(2), "shifts": self.shifts,
        }


def compare_rankings(base: Mapping[str, float], other: Mapping[str, float], with_r2: bool = False) -> RankStats:
    """Correlate two per-model score maps; shifts are rank(base) - rank(other)."""
    rho, p = spearman(base, other)
    rb, ro = rank_vector(base), rank_vector(other)
    return RankStats(
        rho=rho,
        tau=kendall(base, other),
        p_rho=p,
        r2=pearson_r2(base, other) if with_r2 else None,
        shifts={m: rb[m] - ro[m] for m in base},
    )


def rank_migration(scores_short: Mapping[str, float], scores_long: Mapping[str, float]) -> dict[str, float]:
    """Signed shift r_short - r_long; positive means the model ranks better at the long scope."""
    if set(scores_short) != set(scores_long):
        raise ValueError("rank migration needs the same model set at both scopes")
    rs, rl = rank_vector(scores_short), rank_vector(scores_long)
    return {m: rs[m] - rl[m] for m in scores_short}


@dataclass
class LayerDiscrepancy:
    stats: RankStats
    threshold: float
    gaps: dict[str, float]

    @property
    def count(self) -> int:
        return sum(g >= self.threshold for g in self.gaps.values())

    @property
    def max_gap(self) -> float:
        return max(self.gaps.values())

    def as_dict(self) -> dict:
        return {"r2": self.stats.r2, "rho": self.stats.rho, "p_rho": self.stats.p_rho,
                "tau": self.stats.tau, "threshold": self.threshold, "count": self.count,
                "max_gap": self.max_gap, "gaps": self.gaps}


def layer_discrepancy(b_scores: Mapping[str, float], c_scores: Mapping[str, float], threshold: float = 4) -> LayerDiscrepancy:
    st = compare_rankings(b_scores, c_scores, with_r2=True)
    return LayerDiscrepancy(st, threshold, {m: abs(v) for m, v in st.shifts.items()})


def discriminability(scores: Mapping[str, Mapping[str, float]]) -> dict[str, float]:
    """Bessel-corrected cross-model standard deviation per dimension.

    ``scores`` maps dimension -> model -> score.
    """
    out = {}
    for dim, per_model in scores.items():
        vals = list(per_model.values())
        if len(vals) < 2:
            raise ValueError(f"{dim}: discriminability needs >= 2 models")
        out[dim] = statistics.stdev(vals)
    return out


# -- surface-level analyses -------------------------------------------------

def dimension_scores(surface: ScoreSurface, config: TaxonomyConfig, scope: int,
                     weights: SliceWeights = UNIFORM) -> dict[str, dict[str, float]]:
    """dimension -> model -> AUC (holistic dimensions use their fixed scores)."""
    res = score_surface(surface, config, scope, weights)
    out: dict[str, dict[str, float]] = {d.name: {} for d in config.dimensions}
    for m, r in res.items():
        for d, e in r.dimensions.items():
            out[d][m] = e.mean
    return out


def leave_one_dimension_out(surface: ScoreSurface, config: TaxonomyConfig, scope: int, dropped: str) -> RankStats:
    dim = config.dimension(dropped)
    if not dim.length_sliced:
        raise AggregationError(f"{dropped!r} is not a length-sliced dimension")
    full = overall_values(score_surface(surface, config, scope))
    reduced = overall_values(score_surface(surface, config.without_dimension(dropped), scope))
    return compare_rankings(full, reduced)


def weight_scheme_sensitivity(surface: ScoreSurface, config: TaxonomyConfig, scope: int,
                              schemes: Iterable[SliceWeights]) -> dict[str, tuple[dict[str, float], RankStats]]:
    base = overall_values(score_surface(surface, config, scope, UNIFORM))
    out = {}
    for w in schemes:
        scores = overall_values(score_surface(surface, config, scope, w))
        out[w.scheme] = (scores, compare_rankings(base, scores))
    return out


def aggregation_sensitivity(categories: Mapping[str, CategoryAggregate],
                            kinds: Sequence[str] = ("harmonic", "arithmetic", "geometric", "minimum")) -> dict[str, RankStats]:
    """Rank stability of alternative aggregators against the harmonic baseline."""
    base = {m: aggregate(c, "harmonic").mean for m, c in categories.items()}
    out = {}
    for k in kinds:
        alt = {m: aggregate(c, k).mean for m, c in categories.items()}
        out[k] = compare_rankings(base, alt)
    return out


HOLISTIC_REWEIGHTS = {
    "reduced-s-weight": (0.4, 0.4, 0.2),
    "drop-s": (0.5, 0.5, 0.0),
}


def category_weight_sensitivity(categories: Mapping[str, CategoryAggregate],
                                variants: Mapping[str, Sequence[float]] = HOLISTIC_REWEIGHTS) -> dict[str, RankStats]:
    base = {m: aggregate(c).mean for m, c in categories.items()}
    return {
        name: compare_rankings(base, {m: aggregate(c, weights=w).mean for m, c in categories.items()})
        for name, w in variants.items()
    }


def holistic_sensitivity(surface: ScoreSurface, config: TaxonomyConfig, scope: int) -> dict[str, RankStats]:
    """Vary the holistic category: each single holistic component alone, then the reweightings.

    A single-component variant recomputes S and its variance from the surviving
    component only.
    """
    base_res = score_surface(surface, config, scope)
    base = overall_values(base_res)
    out = {"default": compare_rankings(base, base)}
    for dim in config.layer("holistic"):
        if len(dim.components) < 2:
            continue
        for comp in dim.components:
            cfg = config.with_components(dim.name, [comp.name])
            out[f"only-{comp.name}"] = compare_rankings(base, overall_values(score_surface(surface, cfg, scope)))
    cats = {m: r.categories for m, r in base_res.items()}
    out.update(category_weight_sensitivity(cats))
    return out


@dataclass
class CorrelationMatrix:
    names: list[str]
    rho: np.ndarray
    p: np.ndarray

    def off_diagonal(self) -> np.ndarray:
        i, j = np.triu_indices(len(self.names), 1)
        return self.rho[i, j]

    def summary(self, threshold: float = 0.5) -> dict:
        off = self.off_diagonal()
        return {"mean": float(off.mean()), "median": float(np.median(off)),
                "below_threshold": int((off < threshold).sum()), "threshold": threshold,
                "pairs": int(off.size)}

    def long_form(self) -> list[tuple[str, str, float, float]]:
        return [(a, b, float(self.rho[i, j]), float(self.p[i, j]))
                for i, a in enumerate(self.names) for j, b in enumerate(self.names)]


def correlation_matrix(scores: Mapping[str, Mapping[str, float]]) -> CorrelationMatrix:
    names = list(scores)
    k = len(names)
    rho, p = np.eye(k), np.zeros((k, k))
    for i, j in itertools.combinations(range(k), 2):
        r, pv = spearman(scores[names[i]], scores[names[j]])
        rho[i, j] = rho[j, i] = r
        p[i, j] = p[j, i] = pv
    return CorrelationMatrix(names, rho, p)


def pairwise_dimension_correlation(surface: ScoreSurface, config: TaxonomyConfig, scope: int) -> CorrelationMatrix:
    scores = dimension_scores(surface, config, scope)
    return correlation_matrix({d.name: scores[d.name] for d in config.sliced_dimensions})


@dataclass
class DecayReport:
    dimensions: dict[str, dict[str, float]]  # model -> dimension -> decay
    aggregates: dict[str, dict[str, float]]  # model -> {B, C, overall} decay

    def mean_overall(self) -> float:
        return statistics.fmean(v["overall"] for v in self.aggregates.values())


def decay_report(surface: ScoreSurface, config: TaxonomyConfig,
                 short: int = SCOPE_128K, long: int = SCOPE_1M) -> DecayReport:
    rs, rl = score_surface(surface, config, short), score_surface(surface, config, long)
    dims, aggs = {}, {}
    for m in rs:
        dims[m] = {d.name: decay_rate(rs[m].dimensions[d.name], rl[m].dimensions[d.name])
                   for d in config.sliced_dimensions if d.name in rs[m].dimensions}
        aggs[m] = {
            "B": decay_rate(rs[m].categories.b, rl[m].categories.b),
            "C": decay_rate(rs[m].categories.c, rl[m].categories.c),
            "overall": decay_rate(rs[m].overall, rl[m].overall),
        }
    return DecayReport(dims, aggs)


# -- reduced-slice (Lite) schemes --------------------------------------------

@dataclass
class LiteScheme:
    name: str
    slices: tuple[int, ...]
    relative_cost: float
    rho: Optional[float] = None
    max_shift: Optional[float] = None
    shifts_ge2: Optional[int] = None

    def __post_init__(self):
        if not 0 < self.relative_cost <= 1:
            raise ValueError(f"{self.name}: relative cost must lie in (0, 1]")
        if not self.slices:
            raise ValueError(f"{self.name}: empty slice subset")

    @property
    def efficiency(self) -> float:
        return self.rho / self.relative_cost


def pareto_frontier(points: Sequence[tuple[float, float]]) -> list[int]:
    """Indices of (cost, fidelity) points not dominated by another.

    q dominates p when cost_q <= cost_p and fidelity_q >= fidelity_p with at
    least one strict inequality.
    """
    keep = []
    for i, (c, f) in enumerate(points):
        dominated = any(
            (c2 <= c and f2 >= f) and (c2 < c or f2 > f)
            for j, (c2, f2) in enumerate(points) if j != i
        )
        if not dominated:
            keep.append(i)
    return keep


def evaluate_lite(schemes: Sequence[LiteScheme], surface: ScoreSurface, config: TaxonomyConfig,
                  reference_scope: Optional[int] = None) -> list[LiteScheme]:
    """Fill in rho / shifts of each scheme against the full-grid ranking.

    Each scheme re-scores every model on its slice subset (AUC over the
    subset, or the slice score itself for a single slice).
    """
    scope = reference_scope or config.grid.slices[-1]
    full = overall_values(score_surface(surface, config, scope))
    out = []
    for s in schemes:
        bad = set(s.slices) - set(config.grid.slices)
        if bad:
            raise ValueError(f"{s.name}: slices {sorted(bad)} not on the grid")
        if not any(c.length_sliced and set(c.slices) & set(s.slices) for c in config.components):
            raise ValueError(f"{s.name}: no component supports any slice of the subset")
        reduced = overall_values(score_surface(surface, config, scope, slices=s.slices))
        st = compare_rankings(full, reduced)
        out.append(LiteScheme(s.name, s.slices, s.relative_cost, st.rho,
                              st.max_abs_rank_shift, st.count_shifts(2)))
    return out


def lite_pareto(schemes: Sequence[LiteScheme], surface: Optional[ScoreSurface] = None,
                config: Optional[TaxonomyConfig] = None) -> tuple[list[LiteScheme], list[str]]:
    """Evaluate schemes (when a surface is given) and return them with the frontier names."""
    if surface is not None:
        schemes = evaluate_lite(schemes, surface, config)
    if any(s.rho is None for s in schemes):
        raise ValueError("every scheme needs a rho, or pass a surface to compute it")
    front = pareto_frontier([(s.relative_cost, s.rho) for s in schemes])
    return list(schemes), [schemes[i].name for i in front]
