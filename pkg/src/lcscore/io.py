"""Ingestion (taxonomy JSON, instance JSONL, slice-score CSV) and report emission."""
from __future__ import annotations

import csv
import io
import json
import warnings
from collections import defaultdict
from dataclasses import asdict, dataclass, field
from decimal import ROUND_HALF_EVEN, Decimal
from importlib import resources
from pathlib import Path
from typing import Any, Iterable, Mapping, Optional, Sequence

from lcscore.aggregation import CategoryAggregate, ModelResult
from lcscore.core import (
    Component,
    ConfigError,
    Dimension,
    LengthGrid,
    ScoreSurface,
    SliceScore,
    TaxonomyConfig,
    format_length,
    parse_length,
    validate_surface,
)
from lcscore.metrics import (
    InstanceScore,
    MetricInputError,
    answer_level,
    score_accuracy,
    score_exact_match,
    score_mrecall_at_k,
    score_qpem,
    score_set_f1,
)
from lcscore.uncertainty import (
    CiEstimate,
    InsufficientSampleError,
    clt_variance,
    cluster_variance,
    scale_to_reporting,
    weighted_variance,
)

SURFACE_FIELDS = ["model", "dimension", "component", "slice", "mean", "variance", "n"]
BOARD_FIELDS = ["rank", "model", "foundational", "foundational_hw", "application", "application_hw",
                "holistic", "holistic_hw", "overall", "overall_hw"]
BOARD_TITLES = ["#", "Model", "Foundational", "Application", "Holistic", "Overall"]


class IngestError(ValueError):
    """Invalid input data; carries the source line when known."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


def _data(name: str):
    return resources.files("lcscore") / "data" / name


# -- taxonomy ---------------------------------------------------------------

def _line_of(text: str, needle: str) -> Optional[int]:
    for i, line in enumerate(text.splitlines(), 1):
        if needle in line:
            return i
    return None


def parse_taxonomy(text: str) -> TaxonomyConfig:
    if not text.strip():
        raise IngestError("empty taxonomy document", 1)
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise IngestError(f"invalid JSON: {exc.msg}", exc.lineno) from None

    def fail(path: str, msg: str, anchor: Optional[str] = None):
        line = _line_of(text, anchor) if anchor else None
        raise IngestError(f"{path}: {msg}", line)

    if not isinstance(doc, dict):
        fail("<root>", "expected an object")
    for key in ("grid", "dimensions"):
        if key not in doc:
            fail(key, "missing required field")
    try:
        grid = LengthGrid(tuple(parse_length(x) for x in doc["grid"]))
    except (ConfigError, ValueError, TypeError) as exc:
        fail("grid", str(exc), '"grid"')
    scopes = tuple(parse_length(x) for x in doc.get("scopes", (grid.slices[-1],)))
    dims = []
    for i, d in enumerate(doc["dimensions"]):
        path = f"dimensions[{i}]"
        if not isinstance(d, dict):
            fail(path, "expected an object")
        for key in ("name", "layer", "components"):
            if key not in d:
                fail(f"{path}.{key}", "missing required field", json.dumps(d.get("name", "")))
        anchor = f'"name": {json.dumps(d["name"])}'
        comps = []
        for j, c in enumerate(d["components"]):
            cpath = f"{path}.components[{j}]"
            for key in ("name", "metric"):
                if key not in c:
                    fail(f"{cpath}.{key}", "missing required field", anchor)
            slices = c.get("slices")
            counts = c.get("counts", {})
            if isinstance(counts, int):
                counts = {None: counts}
            else:
                counts = {parse_length(k): int(v) for k, v in counts.items()}
            comps.append(Component(
                name=c["name"],
                metric=c["metric"],
                estimator=c.get("estimator", "clt"),
                slices=None if slices is None else tuple(parse_length(s) for s in slices),
                counts=counts,
                tau=float(c.get("tau", 1.0)),
                k=c.get("k"),
                exact_mode=bool(c.get("exact_mode", False)),
                weights_mode=c.get("weights_mode", "count"),
                subcomponents=dict(c.get("subcomponents", {})),
            ))
        dims.append(Dimension(d["name"], d["layer"], tuple(comps)))
    try:
        return TaxonomyConfig(grid, tuple(dims), scopes)
    except ConfigError as exc:
        msg = str(exc)
        name = msg.split("'")[1] if "'" in msg else None
        raise IngestError(f"dimensions: {msg}", _line_of(text, f'"{name}"') if name else None) from None


def load_taxonomy(path: str | Path | None = None) -> TaxonomyConfig:
    """Load a taxonomy JSON document; ``None`` loads the shipped default."""
    if path is None:
        return parse_taxonomy(_data("default_taxonomy.json").read_text(encoding="utf-8"))
    return parse_taxonomy(Path(path).read_text(encoding="utf-8"))


def default_taxonomy() -> TaxonomyConfig:
    return load_taxonomy(None)


# -- instance records -------------------------------------------------------

@dataclass(frozen=True)
class InstanceRecord:
    model: str
    component: str
    instance_id: str
    kind: str
    prediction: Any
    gold: Any
    slice: Optional[int] = None
    cluster_id: Optional[str] = None
    subcomponent: Optional[str] = None


def read_instances(path: str | Path) -> list[tuple[int, InstanceRecord]]:
    out = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                sl = obj.get("slice")
                rec = InstanceRecord(
                    model=str(obj["model"]),
                    component=str(obj["component"]),
                    instance_id=str(obj.get("instance_id", lineno)),
                    kind=str(obj["kind"]),
                    prediction=obj.get("prediction"),
                    gold=obj.get("gold"),
                    slice=None if sl in (None, "") else parse_length(sl),
                    cluster_id=None if obj.get("cluster_id") is None else str(obj["cluster_id"]),
                    subcomponent=obj.get("subcomponent"),
                )
            except json.JSONDecodeError as exc:
                raise IngestError(f"malformed JSON: {exc.msg}", lineno) from None
            except (KeyError, TypeError, ValueError) as exc:
                raise IngestError(f"malformed record: {exc!r}", lineno) from None
            out.append((lineno, rec))
    return out


def _expected_kind(comp: Component, rec: InstanceRecord) -> str:
    if comp.metric != "composite":
        return comp.metric
    if rec.subcomponent is None:
        raise MetricInputError("composite component needs a subcomponent tag")
    if comp.subcomponents and rec.subcomponent not in comp.subcomponents:
        raise MetricInputError(f"unknown subcomponent {rec.subcomponent!r}")
    return comp.subcomponents.get(rec.subcomponent, rec.kind)


def score_record(rec: InstanceRecord, comp: Component) -> InstanceScore:
    """Score one record with its component's metric.

    Raises MetricInputError when the payload does not fit the metric.
    """
    kind = _expected_kind(comp, rec)
    if rec.kind != kind:
        raise MetricInputError(f"record kind {rec.kind!r} does not match metric {kind!r}")
    p, g, diag = rec.prediction, rec.gold, None
    if kind == "em":
        v = score_exact_match(str(p), str(g))
    elif kind == "acc":
        v = score_accuracy(str(p), str(g))
    elif kind == "binary":
        if p not in (0, 1, True, False):
            raise MetricInputError(f"binary payload must be 0/1, got {p!r}")
        v = float(p)
    elif kind == "f1":
        v = score_set_f1(p or [], g or [])
    elif kind == "mrecall":
        ids, k = (g.get("ids"), g.get("k")) if isinstance(g, dict) else (g, None)
        ids = list(ids or [])
        v = score_mrecall_at_k(list(p or []), ids, int(k or comp.k or len(ids) or 1))
    elif kind == "qpem":
        v = score_qpem(str(p), [g] if isinstance(g, str) else list(g or []), comp.exact_mode)
    elif kind == "answer_level":
        if not isinstance(g, dict) or "type" not in g or "value" not in g:
            raise MetricInputError("answer_level gold must be {type, value}")
        v, diag = answer_level(p, g["value"], g["type"], float(g.get("tau", comp.tau)))
    else:
        raise MetricInputError(f"unsupported kind {kind!r}")
    return InstanceScore(v, rec.instance_id, rec.cluster_id, rec.subcomponent, diag)


def _estimate(comp: Component, scores: list[InstanceScore]) -> CiEstimate:
    if comp.estimator == "cluster":
        # instances without a cluster id form their own singleton cluster
        return cluster_variance([(s.value, s.cluster_id or f"#{s.instance_id}") for s in scores])
    if comp.estimator == "weighted":
        groups: dict[str, list[float]] = defaultdict(list)
        for s in scores:
            groups[s.subcomponent or ""].append(s.value)
        return weighted_variance(dict(groups), comp.weights_mode)
    return clt_variance([s.value for s in scores])


def ingest_instances(path: str | Path, config: TaxonomyConfig) -> tuple[ScoreSurface, list[str]]:
    """Score every record, estimate each (model, component, slice) group, build a surface.

    Returns the surface and per-record diagnostics (skipped records, parse notes).
    """
    records = read_instances(path)
    if not records:
        raise IngestError("no records")
    diagnostics: list[str] = []
    groups: dict[tuple, list[InstanceScore]] = defaultdict(list)
    for lineno, rec in records:
        try:
            comp = config.component(rec.component)
        except KeyError:
            raise IngestError(f"unknown component {rec.component!r}", lineno) from None
        if comp.length_sliced and rec.slice not in comp.slices:
            raise IngestError(f"slice {rec.slice} not supported by {comp.name!r}", lineno)
        if not comp.length_sliced and rec.slice is not None:
            raise IngestError(f"holistic component {comp.name!r} takes no slice", lineno)
        try:
            sc = score_record(rec, comp)
        except (MetricInputError, TypeError, ValueError, AttributeError) as exc:
            diagnostics.append(f"line {lineno}: skipped: {exc}")
            continue
        if sc.diagnostic:
            diagnostics.append(f"line {lineno}: {sc.diagnostic}")
        groups[(rec.model, rec.component, rec.slice)].append(sc)
    cells = {}
    for key, scores in groups.items():
        comp = config.component(key[1])
        try:
            est = scale_to_reporting(_estimate(comp, scores))
        except (InsufficientSampleError, MetricInputError) as exc:
            raise IngestError(f"{key[0]}/{key[1]}/{key[2]}: {exc}") from None
        cells[key] = SliceScore(est.mean, est.variance, len(scores), comp.estimator)
    return ScoreSurface(cells), diagnostics


# -- slice-score CSV ----------------------------------------------------------

def read_slice_scores(path_or_text: str | Path, config: TaxonomyConfig, *, text: bool = False) -> ScoreSurface:
    src = path_or_text if text else Path(path_or_text).read_text(encoding="utf-8")
    reader = csv.DictReader(io.StringIO(src))
    if reader.fieldnames is None:
        raise IngestError("empty slice-score file", 1)
    missing = {"model", "component", "slice", "mean"} - set(reader.fieldnames)
    if missing:
        raise IngestError(f"missing columns {sorted(missing)}", 1)
    if "variance" not in reader.fieldnames:
        warnings.warn("variance column absent; variances default to 0", stacklevel=2)
    cells: dict = {}
    for lineno, row in enumerate(reader, 2):
        try:
            comp = config.component(row["component"])
        except KeyError:
            raise IngestError(f"unknown component {row['component']!r}", lineno) from None
        dim = config.dimension_of(comp.name).name
        if row.get("dimension") and row["dimension"] != dim:
            raise IngestError(f"component {comp.name!r} belongs to {dim!r}, not {row['dimension']!r}", lineno)
        try:
            sl = parse_length(row["slice"]) if row["slice"] else None
            score = SliceScore(
                float(row["mean"]),
                float(row.get("variance") or 0.0),
                int(row.get("n") or 0),
                row.get("estimator") or None,
            )
        except ValueError as exc:
            raise IngestError(str(exc), lineno) from None
        if not 0.0 <= score.mean <= 100.0:
            raise IngestError(f"mean {score.mean} outside [0, 100]", lineno)
        if score.variance < 0:
            raise IngestError(f"negative variance {score.variance}", lineno)
        key = (row["model"], comp.name, sl)
        if key in cells:
            raise IngestError(f"duplicate cell {key}", lineno)
        cells[key] = score
    surface = ScoreSurface(cells)
    problems = validate_surface(surface, config)
    if problems:
        raise IngestError("; ".join(problems))
    return surface


def ingest_slice_scores(path: str | Path, config: TaxonomyConfig) -> ScoreSurface:
    return read_slice_scores(path, config)


def write_slice_scores(surface: ScoreSurface, config: TaxonomyConfig) -> str:
    buf = io.StringIO()
    with_est = any(s.estimator for s in surface.values())
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SURFACE_FIELDS + (["estimator"] if with_est else []))
    for (model, comp, sl), s in surface.items():
        row = [model, config.dimension_of(comp).name, comp, "" if sl is None else sl,
               repr(s.mean), repr(s.variance), s.n]
        w.writerow(row + ([s.estimator or ""] if with_est else []))
    return buf.getvalue()


# -- leaderboards -------------------------------------------------------------

def fmt2(x: float) -> str:
    """Two decimals, round-half-even on the shortest decimal form of ``x``."""
    d = Decimal(repr(float(x))).quantize(Decimal("0.01"), rounding=ROUND_HALF_EVEN)
    return str(d + 0)  # normalizes -0.00


@dataclass(frozen=True)
class LeaderboardRow:
    rank: int
    model: str
    foundational: float
    foundational_hw: float
    application: float
    application_hw: float
    holistic: float
    holistic_hw: float
    overall: float
    overall_hw: float

    def categories(self) -> CategoryAggregate:
        return CategoryAggregate(
            CiEstimate.from_half_width(self.foundational, self.foundational_hw),
            CiEstimate.from_half_width(self.application, self.application_hw),
            CiEstimate.from_half_width(self.holistic, self.holistic_hw),
        )


def leaderboard_rows(results: Mapping[str, ModelResult]) -> list[LeaderboardRow]:
    ordered = sorted(results.values(), key=lambda r: -r.overall.mean)
    rows = []
    for i, r in enumerate(ordered, 1):
        b, c, s = r.categories.triple
        rows.append(LeaderboardRow(i, r.model, b.mean, b.half_width, c.mean, c.half_width,
                                   s.mean, s.half_width, r.overall.mean, r.overall.half_width))
    return rows


def check_leaderboard(rows: Sequence[LeaderboardRow]) -> list[str]:
    out = []
    for a, b in zip(rows, rows[1:]):
        if b.rank <= a.rank or b.overall > a.overall:
            out.append(f"rank order broken between {a.model!r} and {b.model!r}")
    for r in rows:
        if min(r.foundational_hw, r.application_hw, r.holistic_hw, r.overall_hw) < 0:
            out.append(f"negative half-width for {r.model!r}")
    return out


def _md_escape(s: str) -> str:
    return s.replace("|", "\\|")


def emit_leaderboard(rows: Sequence[LeaderboardRow], fmt: str = "markdown") -> str:
    if fmt == "json":
        return json.dumps([asdict(r) for r in rows], indent=2) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(BOARD_FIELDS)
        for r in rows:
            w.writerow([r.rank, r.model] + [fmt2(getattr(r, f)) for f in BOARD_FIELDS[2:]])
        return buf.getvalue()
    if fmt == "markdown":
        lines = ["| " + " | ".join(BOARD_TITLES) + " |", "|---:|:---|---:|---:|---:|---:|"]
        for r in rows:
            cells = [f"{fmt2(getattr(r, k))}±{fmt2(getattr(r, k + '_hw'))}"
                     for k in ("foundational", "application", "holistic", "overall")]
            lines.append(f"| {r.rank} | {_md_escape(r.model)} | " + " | ".join(cells) + " |")
        return "\n".join(lines) + "\n"
    raise ValueError(f"unknown format {fmt!r}")


def parse_leaderboard(text: str, fmt: str = "csv") -> list[LeaderboardRow]:
    if fmt == "json":
        return [LeaderboardRow(**obj) for obj in json.loads(text)]
    if fmt == "csv":
        rows = []
        for row in csv.DictReader(io.StringIO(text)):
            rows.append(LeaderboardRow(int(row["rank"]), row["model"],
                                       *(float(row[f]) for f in BOARD_FIELDS[2:])))
        return rows
    if fmt == "markdown":
        rows = []
        for line in text.splitlines()[2:]:
            if not line.strip():
                continue
            parts = [p.strip().replace("\\|", "|") for p in
                     line.strip().strip("|").replace("\\|", "\x00").split("|")]
            parts = [p.replace("\x00", "|") for p in parts]
            nums = []
            for cell in parts[2:]:
                m, h = cell.split("±")
                nums += [float(m), float(h)]
            rows.append(LeaderboardRow(int(parts[0]), parts[1], *nums))
        return rows
    raise ValueError(f"unknown format {fmt!r}")


def load_leaderboard(path: str | Path) -> list[LeaderboardRow]:
    path = Path(path)
    fmt = {".json": "json", ".md": "markdown"}.get(path.suffix, "csv")
    return parse_leaderboard(path.read_text(encoding="utf-8"), fmt)


def fixture_leaderboard(scope: str) -> list[LeaderboardRow]:
    """Published leaderboards shipped with the package: ``'128k'`` or ``'1m'``."""
    name = {"128k": "leaderboard_128k.csv", "1m": "leaderboard_1m.csv"}[scope.lower()]
    return parse_leaderboard(_data(name).read_text(encoding="utf-8"), "csv")


def fixture_weight_sensitivity() -> list[dict]:
    rows = list(csv.DictReader(io.StringIO(_data("weight_sensitivity.csv").read_text(encoding="utf-8"))))
    for r in rows:
        r["scope"], r["score"], r["rank"] = int(r["scope"]), float(r["score"]), int(r["rank"])
    return rows


def read_lite_schemes(text: str) -> list:
    from lcscore.ranks import LiteScheme

    out = []
    for row in csv.DictReader(io.StringIO(text)):
        rho = row.get("rho")
        out.append(LiteScheme(
            row["name"],
            tuple(parse_length(s) for s in row["slices"].split(";")),
            float(row["relative_cost"]),
            float(rho) if rho not in (None, "") else None,
        ))
    return out


def fixture_lite_schemes() -> list:
    return read_lite_schemes(_data("lite_schemes.csv").read_text(encoding="utf-8"))


# -- bundle -------------------------------------------------------------------

def _est(e: CiEstimate) -> dict:
    return {"mean": e.mean, "variance": e.variance, "half_width": e.half_width}


@dataclass
class ReportBundle:
    leaderboards: dict[str, list[LeaderboardRow]] = field(default_factory=dict)
    models: dict[str, dict] = field(default_factory=dict)
    radar: dict[str, dict[str, dict[str, float]]] = field(default_factory=dict)
    sections: dict[str, Any] = field(default_factory=dict)

    def add_scope(self, scope: int, results: Mapping[str, ModelResult]) -> None:
        label = format_length(scope)
        self.leaderboards[label] = leaderboard_rows(results)
        self.radar[label] = {m: {c: e.mean for c, e in r.components.items()} for m, r in results.items()}
        for m, r in results.items():
            self.models.setdefault(m, {})[label] = {
                "components": {c: _est(e) for c, e in r.components.items()},
                "dimensions": {d: _est(e) for d, e in r.dimensions.items()},
                "categories": dict(zip("BCS", (_est(e) for e in r.categories.triple))),
                "overall": {**_est(r.overall), "aggregator": r.overall.aggregator},
            }

    def to_dict(self) -> dict:
        return {
            "leaderboards": {k: [asdict(r) for r in v] for k, v in self.leaderboards.items()},
            "models": self.models,
            "radar": self.radar,
            **self.sections,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"


def write_text(path: str | Path, content: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(content)
