"""Category aggregates B/C/S and the overall aggregate with delta-method variance.

B averages the foundational dimensions, C the length-sliced application
dimensions and S the holistic ones. The overall score is the harmonic mean of
the three; its variance comes from a first-order Taylor expansion with the
categories treated as independent (they aggregate disjoint instance sets).
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

from lcscore.auc import UNIFORM, ScoreCurve, SliceWeights, weighted_auc
from lcscore.core import ScoreSurface, TaxonomyConfig
from lcscore.uncertainty import Z95, CiEstimate

AGGREGATORS = ("harmonic", "arithmetic", "geometric", "minimum")


class AggregationError(ValueError):
    pass


@dataclass(frozen=True)
class CategoryAggregate:
    b: CiEstimate
    c: CiEstimate
    s: CiEstimate

    @property
    def triple(self) -> tuple[CiEstimate, CiEstimate, CiEstimate]:
        return self.b, self.c, self.s

    @classmethod
    def from_values(cls, means: Sequence[float], variances: Sequence[float] = (0.0, 0.0, 0.0)):
        b, c, s = (CiEstimate(m, v, estimator="category") for m, v in zip(means, variances))
        return cls(b, c, s)


@dataclass(frozen=True)
class OverallScore:
    mean: float
    variance: float
    aggregator: str = "harmonic"
    scope: Optional[int] = None
    z: float = Z95

    @property
    def half_width(self) -> float:
        return self.z * math.sqrt(self.variance)


def _require_positive(agg: CategoryAggregate, mask=(True, True, True)):
    for name, est, used in zip("BCS", agg.triple, mask):
        if used and not est.mean > 0:
            raise AggregationError(f"category {name} must be positive, got {est.mean}")


def weighted_harmonic(agg: CategoryAggregate, w: Sequence[float], scope: Optional[int] = None) -> OverallScore:
    """1 / sum(w_x / x) with variance sum((H**2 w_x / x**2)**2 v_x)."""
    if len(w) != 3 or any(x < 0 for x in w) or not math.isclose(sum(w), 1.0, abs_tol=1e-9):
        raise AggregationError(f"weights must be three nonnegative reals summing to 1, got {w}")
    _require_positive(agg, [x > 0 for x in w])
    terms = [(wx, e) for wx, e in zip(w, agg.triple) if wx > 0]
    h = 1.0 / math.fsum(wx / e.mean for wx, e in terms)
    var = math.fsum((h * h * wx / e.mean**2) ** 2 * e.variance for wx, e in terms)
    name = "harmonic" if all(math.isclose(x, 1 / 3) for x in w) else "weighted-harmonic"
    return OverallScore(h, var, name, scope)


def harmonic_aggregate(agg: CategoryAggregate, scope: Optional[int] = None) -> OverallScore:
    """H = 3 / (1/B + 1/C + 1/S), var(H) = H**4/9 * sum(v_x / x**4)."""
    _require_positive(agg)
    b, c, s = agg.triple
    h = 3.0 / (1.0 / b.mean + 1.0 / c.mean + 1.0 / s.mean)
    var = h**4 / 9.0 * math.fsum(e.variance / e.mean**4 for e in agg.triple)
    return OverallScore(h, var, "harmonic", scope)


def alt_aggregate(agg: CategoryAggregate, kind: str, scope: Optional[int] = None) -> OverallScore:
    xs = agg.triple
    if kind == "arithmetic":
        return OverallScore(math.fsum(e.mean for e in xs) / 3.0, math.fsum(e.variance for e in xs) / 9.0, kind, scope)
    if kind == "geometric":
        _require_positive(agg)
        g = (xs[0].mean * xs[1].mean * xs[2].mean) ** (1.0 / 3.0)
        return OverallScore(g, g * g / 9.0 * math.fsum(e.variance / e.mean**2 for e in xs), kind, scope)
    if kind == "minimum":
        lo = min(xs, key=lambda e: e.mean)
        return OverallScore(lo.mean, lo.variance, kind, scope)
    if kind == "harmonic":
        return harmonic_aggregate(agg, scope)
    raise AggregationError(f"unknown aggregator {kind!r}")


def aggregate(agg: CategoryAggregate, kind: str = "harmonic", scope: Optional[int] = None,
              weights: Optional[Sequence[float]] = None) -> OverallScore:
    if weights is not None:
        if kind != "harmonic":
            raise AggregationError("category weights apply to the harmonic aggregator only")
        return weighted_harmonic(agg, weights, scope)
    return alt_aggregate(agg, kind, scope)


# -- surface -> scores ------------------------------------------------------

@dataclass
class ModelResult:
    model: str
    components: dict[str, CiEstimate] = field(default_factory=dict)
    dimensions: dict[str, CiEstimate] = field(default_factory=dict)
    categories: Optional[CategoryAggregate] = None
    overall: Optional[OverallScore] = None


def _mean_of(estimates: Sequence[CiEstimate], tag: str) -> CiEstimate:
    m = len(estimates)
    return CiEstimate(
        math.fsum(e.mean for e in estimates) / m,
        math.fsum(e.variance for e in estimates) / m**2,
        estimator=tag,
    )


def component_score(surface: ScoreSurface, config: TaxonomyConfig, model: str, component: str,
                    scope: int, weights: SliceWeights = UNIFORM,
                    slices: Optional[Sequence[int]] = None) -> Optional[CiEstimate]:
    """AUC of one component up to ``scope`` over its own supported slices.

    ``slices`` restricts the grid (reduced-slice schemes). A single surviving
    slice is used directly; no surviving slice returns None.
    """
    comp = config.component(component)
    if not comp.length_sliced:
        cell = surface.holistic(model, component)
        return CiEstimate(cell.mean, cell.variance, n=cell.n, estimator="holistic")
    use = [s for s in comp.slices if s <= scope and (slices is None or s in slices)]
    if not use:
        return None
    try:
        points = surface.curve(model, component, use)
    except KeyError as exc:
        raise AggregationError(f"missing cell {exc.args[0]}") from None
    if len(use) == 1:
        return CiEstimate(points[0].mean, points[0].variance, n=points[0].n, estimator="slice")
    return weighted_auc(ScoreCurve(tuple(use), tuple(points)), weights)


def score_model(surface: ScoreSurface, config: TaxonomyConfig, model: str, scope: int,
                weights: SliceWeights = UNIFORM, aggregator: str = "harmonic",
                category_weights: Optional[Sequence[float]] = None,
                slices: Optional[Sequence[int]] = None) -> ModelResult:
    res = ModelResult(model)
    per_layer: dict[str, list[CiEstimate]] = {"foundational": [], "application": [], "holistic": []}
    for dim in config.dimensions:
        ests = []
        for comp in dim.components:
            e = component_score(surface, config, model, comp.name, scope, weights, slices)
            if e is not None:
                res.components[comp.name] = e
                ests.append(e)
        if ests:
            res.dimensions[dim.name] = ests[0] if len(ests) == 1 else _mean_of(ests, "dimension")
            per_layer[dim.layer].append(res.dimensions[dim.name])
    cats = []
    for layer, ests in per_layer.items():
        if not ests:
            raise AggregationError(f"{model}: empty {layer} category")
        cats.append(_mean_of(ests, layer))
    res.categories = CategoryAggregate(*cats)
    res.overall = aggregate(res.categories, aggregator, scope, category_weights)
    return res


def category_means(surface: ScoreSurface, config: TaxonomyConfig, model: str, scope: int,
                   weights: SliceWeights = UNIFORM) -> CategoryAggregate:
    return score_model(surface, config, model, scope, weights).categories


def score_surface(surface: ScoreSurface, config: TaxonomyConfig, scope: int,
                  weights: SliceWeights = UNIFORM, aggregator: str = "harmonic",
                  category_weights: Optional[Sequence[float]] = None,
                  slices: Optional[Sequence[int]] = None, workers: int = 1) -> dict[str, ModelResult]:
    """Score every model; output order follows the surface, whatever ``workers`` is."""
    if scope not in config.grid.slices:
        raise AggregationError(f"scope {scope} is not a slice of the grid")

    def one(m):
        return score_model(surface, config, m, scope, weights, aggregator, category_weights, slices)

    models = surface.models
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(one, models))
    else:
        results = [one(m) for m in models]
    return dict(zip(models, results))


def overall_values(results: Mapping[str, ModelResult]) -> dict[str, float]:
    return {m: r.overall.mean for m, r in results.items()}
