"""Shared vocabulary: length grid, reporting scope, taxonomy and the score surface.

Everything downstream consumes a :class:`ScoreSurface` together with the
:class:`TaxonomyConfig` that says how its cells are organised. Scores live on
the 0-100 reporting scale, variances on the matching (squared) scale.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from types import MappingProxyType
from typing import Iterable, Iterator, Mapping, Optional

LAYERS = ("foundational", "application", "holistic")
METRICS = ("em", "acc", "binary", "answer_level", "f1", "mrecall", "qpem", "composite")
ESTIMATORS = ("clt", "cluster", "weighted")

DEFAULT_GRID = tuple(8192 * 2**k for k in range(8))
SCOPE_128K = 131072
SCOPE_1M = 1048576


class ConfigError(ValueError):
    """Raised for an invalid taxonomy, grid or scope."""


@dataclass(frozen=True)
class LengthGrid:
    slices: tuple[int, ...] = DEFAULT_GRID

    def __post_init__(self):
        s = tuple(int(x) for x in self.slices)
        object.__setattr__(self, "slices", s)
        if len(s) < 2:
            raise ConfigError("length grid needs at least 2 slices")
        if any(b <= a for a, b in zip(s, s[1:])):
            raise ConfigError(f"length grid must be strictly increasing: {s}")

    def __iter__(self) -> Iterator[int]:
        return iter(self.slices)

    def __len__(self) -> int:
        return len(self.slices)

    def up_to(self, max_length: int) -> tuple[int, ...]:
        return tuple(x for x in self.slices if x <= max_length)


@dataclass(frozen=True)
class ReportingScope:
    max_length: int

    def check(self, grid: LengthGrid) -> None:
        if self.max_length not in grid.slices:
            raise ConfigError(f"scope {self.max_length} is not a slice of the grid")

    @property
    def label(self) -> str:
        return format_length(self.max_length)


def format_length(tokens: int) -> str:
    """8192 -> '8K', 1048576 -> '1M'; anything else falls back to the raw count."""
    if tokens % 1048576 == 0:
        return f"{tokens // 1048576}M"
    if tokens % 1024 == 0:
        return f"{tokens // 1024}K"
    return str(tokens)


def parse_length(text: str | int) -> int:
    if isinstance(text, int):
        return text
    t = text.strip().upper()
    for suffix, mult in (("M", 1048576), ("K", 1024)):
        if t.endswith(suffix):
            return int(float(t[:-1]) * mult)
    return int(t)


@dataclass(frozen=True)
class Component:
    name: str
    metric: str
    estimator: str = "clt"
    # None marks a holistic component scored at its original lengths.
    slices: Optional[tuple[int, ...]] = None
    counts: Mapping = field(default_factory=dict)
    tau: float = 1.0
    k: Optional[int] = None
    exact_mode: bool = False
    weights_mode: str = "count"
    subcomponents: Mapping[str, str] = field(default_factory=dict)

    @property
    def length_sliced(self) -> bool:
        return self.slices is not None


@dataclass(frozen=True)
class Dimension:
    name: str
    layer: str
    components: tuple[Component, ...]

    @property
    def length_sliced(self) -> bool:
        return self.layer != "holistic"


@dataclass(frozen=True)
class TaxonomyConfig:
    grid: LengthGrid
    dimensions: tuple[Dimension, ...]
    scopes: tuple[int, ...] = (SCOPE_128K, SCOPE_1M)

    def __post_init__(self):
        seen_dims: dict[str, str] = {}
        seen_comps: set[str] = set()
        for d in self.dimensions:
            if d.layer not in LAYERS:
                raise ConfigError(f"dimension {d.name!r}: unknown layer {d.layer!r}")
            if d.name in seen_dims:
                raise ConfigError(
                    f"dimension {d.name!r} declared twice "
                    f"(layers {seen_dims[d.name]!r} and {d.layer!r})"
                )
            seen_dims[d.name] = d.layer
            if not d.components:
                raise ConfigError(f"dimension {d.name!r} has no components")
            for c in d.components:
                if c.name in seen_comps:
                    raise ConfigError(f"component {c.name!r} declared twice")
                seen_comps.add(c.name)
                if c.metric not in METRICS:
                    raise ConfigError(f"component {c.name!r}: unknown metric {c.metric!r}")
                if c.estimator not in ESTIMATORS:
                    raise ConfigError(f"component {c.name!r}: unknown estimator {c.estimator!r}")
                if d.layer == "holistic" and c.slices is not None:
                    raise ConfigError(f"holistic component {c.name!r} must not declare slices")
                if d.layer != "holistic":
                    if not c.slices:
                        raise ConfigError(f"length-sliced component {c.name!r} needs slices")
                    bad = set(c.slices) - set(self.grid.slices)
                    if bad:
                        raise ConfigError(f"component {c.name!r}: slices {sorted(bad)} not on grid")
        for s in self.scopes:
            ReportingScope(s).check(self.grid)

    def dimension(self, name: str) -> Dimension:
        for d in self.dimensions:
            if d.name == name:
                return d
        raise KeyError(name)

    def component(self, name: str) -> Component:
        for d in self.dimensions:
            for c in d.components:
                if c.name == name:
                    return c
        raise KeyError(name)

    def dimension_of(self, component: str) -> Dimension:
        for d in self.dimensions:
            if any(c.name == component for c in d.components):
                return d
        raise KeyError(component)

    def layer(self, layer: str) -> tuple[Dimension, ...]:
        return tuple(d for d in self.dimensions if d.layer == layer)

    @property
    def components(self) -> tuple[Component, ...]:
        return tuple(c for d in self.dimensions for c in d.components)

    @property
    def sliced_dimensions(self) -> tuple[Dimension, ...]:
        return tuple(d for d in self.dimensions if d.length_sliced)

    def without_dimension(self, name: str) -> "TaxonomyConfig":
        dim = self.dimension(name)
        rest = tuple(d for d in self.dimensions if d.name != name)
        if not any(d.layer == dim.layer for d in rest):
            raise ConfigError(f"dropping {name!r} would empty the {dim.layer} category")
        return replace(self, dimensions=rest)

    def with_components(self, dimension: str, keep: Iterable[str]) -> "TaxonomyConfig":
        """Restrict one dimension to a subset of its components."""
        keep = set(keep)
        dims = []
        for d in self.dimensions:
            if d.name == dimension:
                comps = tuple(c for c in d.components if c.name in keep)
                if not comps:
                    raise ConfigError(f"no components of {dimension!r} left")
                d = replace(d, components=comps)
            dims.append(d)
        return replace(self, dimensions=tuple(dims))


@dataclass(frozen=True)
class SliceScore:
    mean: float
    variance: float = 0.0
    n: int = 0
    estimator: Optional[str] = None

    @property
    def half_width(self) -> float:
        return 1.96 * self.variance**0.5


# (model, component, slice); slice is None for holistic components.
CellKey = tuple[str, str, Optional[int]]


class ScoreSurface(Mapping):
    """Immutable mapping ``(model, component, slice) -> SliceScore``.

    Dimension membership is resolved through the taxonomy, so one dimension
    may carry several components.
    """

    def __init__(self, cells: Mapping[CellKey, SliceScore] | Iterable[tuple[CellKey, SliceScore]] = ()):
        items = cells.items() if isinstance(cells, Mapping) else cells
        data: dict[CellKey, SliceScore] = {}
        for key, score in items:
            model, comp, sl = key
            key = (str(model), str(comp), None if sl is None else int(sl))
            if key in data:
                raise ValueError(f"duplicate surface cell {key}")
            data[key] = score
        self._cells = MappingProxyType(data)

    def __getitem__(self, key: CellKey) -> SliceScore:
        return self._cells[key]

    def __iter__(self):
        return iter(self._cells)

    def __len__(self) -> int:
        return len(self._cells)

    def __repr__(self) -> str:
        return f"ScoreSurface({len(self)} cells, {len(self.models)} models)"

    def __eq__(self, other) -> bool:
        if not isinstance(other, ScoreSurface):
            return NotImplemented
        return dict(self._cells) == dict(other._cells)

    __hash__ = None

    @property
    def models(self) -> tuple[str, ...]:
        return tuple(dict.fromkeys(m for m, _, _ in self._cells))

    def curve(self, model: str, component: str, slices: Iterable[int]) -> list[SliceScore]:
        return [self._cells[(model, component, s)] for s in slices]

    def holistic(self, model: str, component: str) -> SliceScore:
        return self._cells[(model, component, None)]

    def restrict_models(self, models: Iterable[str]) -> "ScoreSurface":
        keep = set(models)
        return ScoreSurface({k: v for k, v in self._cells.items() if k[0] in keep})


def validate_surface(
    surface: ScoreSurface, config: TaxonomyConfig, scope: Optional[int] = None
) -> list[str]:
    """List every invariant violation in ``surface``; empty means valid.

    With ``scope`` given, also require every configured cell up to that scope
    for every model present. Slices a component does not support are never
    required.
    """
    out: list[str] = []
    known = {c.name: c for c in config.components}
    for (model, comp, sl), score in surface.items():
        where = f"{model}/{comp}/{'-' if sl is None else sl}"
        c = known.get(comp)
        if c is None:
            out.append(f"unknown component: {where}")
            continue
        if c.length_sliced and sl is None:
            out.append(f"length-sliced component without slice: {where}")
        elif not c.length_sliced and sl is not None:
            out.append(f"holistic component with slice: {where}")
        elif sl is not None and sl not in c.slices:
            out.append(f"unsupported slice: {where}")
        if not 0.0 <= score.mean <= 100.0:
            out.append(f"mean out of [0,100]: {where} = {score.mean}")
        if score.variance < 0:
            out.append(f"negative variance: {where} = {score.variance}")
    if scope is not None:
        if scope not in config.grid.slices:
            out.append(f"scope {scope} is not a slice of the grid")
            return out
        for model in surface.models:
            for c in config.components:
                needed = [s for s in c.slices if s <= scope] if c.length_sliced else [None]
                for s in needed:
                    if (model, c.name, s) not in surface:
                        out.append(f"missing cell: {model}/{c.name}/{'-' if s is None else s}")
    return out
