"""Command-line front end: ``lcscore score | aggregate | analyze``.

Exit codes: 0 success, 1 I/O failure, 2 validation or usage error.
Randomness enters only through ``--seed`` (default 0). Output never depends on
``--workers``.
"""
from __future__ import annotations

import argparse
import csv
import datetime as _dt
import hashlib
import io
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

from lcscore import __version__
from lcscore.aggregation import (
    AGGREGATORS,
    AggregationError,
    CategoryAggregate,
    ModelResult,
    aggregate,
    score_surface,
)
from lcscore.auc import INVERSE_LOGARITHMIC, LOGARITHMIC, UNIFORM, custom_weights, decay_rate
from lcscore.core import ConfigError, format_length, parse_length
from lcscore.io import (
    IngestError,
    LeaderboardRow,
    ReportBundle,
    emit_leaderboard,
    fixture_leaderboard,
    fixture_lite_schemes,
    fixture_weight_sensitivity,
    ingest_instances,
    leaderboard_rows,
    load_leaderboard,
    load_taxonomy,
    read_lite_schemes,
    read_slice_scores,
    write_slice_scores,
    write_text,
    _data,
)
from lcscore.metrics import MetricInputError
from lcscore.montecarlo import DistributionMismatchError, mc_validate
from lcscore.ranks import (
    CorrelationError,
    aggregation_sensitivity,
    category_weight_sensitivity,
    compare_rankings,
    decay_report,
    holistic_sensitivity,
    layer_discrepancy,
    leave_one_dimension_out,
    lite_pareto,
    pairwise_dimension_correlation,
    rank_migration,
    weight_scheme_sensitivity,
)
from lcscore.uncertainty import InsufficientSampleError

MODES = ("decay", "migration", "layers", "loo", "weights", "aggregation", "holistic", "lite", "correlation", "mc")
WEIGHTS = {"uniform": UNIFORM, "log": LOGARITHMIC, "invlog": INVERSE_LOGARITHMIC}

# flags only meaningful for some modes; passing them elsewhere is a usage error
MODE_FLAGS = {
    "trials": {"mc"},
    "categories": {"mc"},
    "variances": {"mc"},
    "schemes": {"lite"},
    "costs": {"lite"},
    "drop": {"loo"},
    "threshold": {"layers"},
}

VALIDATION_ERRORS = (IngestError, ConfigError, AggregationError, MetricInputError, CorrelationError,
                     DistributionMismatchError, InsufficientSampleError, KeyError, ValueError)


class UsageError(ValueError):
    pass


# -- shared helpers ------------------------------------------------------------

def _scope(text: str, config=None) -> int:
    try:
        scope = parse_length(text)
    except ValueError:
        raise UsageError(f"unknown scope {text!r}") from None
    if config is not None and scope not in config.grid.slices:
        raise UsageError(f"scope {text!r} is not a slice of the grid")
    return scope


def _weights(text: str):
    if text in WEIGHTS:
        return WEIGHTS[text]
    path = Path(text)
    if not path.exists():
        raise UsageError(f"--weights must be uniform, log, invlog or a JSON file, got {text!r}")
    raw = json.loads(path.read_text(encoding="utf-8"))
    return custom_weights({parse_length(k): float(v) for k, v in raw.items()}, path.stem)


def _floats(text: Optional[str], n: int, flag: str) -> Optional[tuple[float, ...]]:
    if text is None:
        return None
    try:
        vals = tuple(float(x) for x in text.split(","))
    except ValueError:
        raise UsageError(f"{flag} expects {n} comma-separated numbers") from None
    if len(vals) != n:
        raise UsageError(f"{flag} expects {n} comma-separated numbers")
    return vals


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


def _csv(rows: Sequence[dict]) -> str:
    buf = io.StringIO()
    if rows:
        w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
    return buf.getvalue()


def _categories(rows: Sequence[LeaderboardRow]) -> dict[str, CategoryAggregate]:
    return {r.model: r.categories() for r in rows}


def _rows_from_categories(cats: dict[str, CategoryAggregate], aggregator: str, scope,
                          category_weights=None) -> list[LeaderboardRow]:
    results = {}
    for m, c in cats.items():
        results[m] = ModelResult(m, categories=c, overall=aggregate(c, aggregator, scope, category_weights))
    return leaderboard_rows(results)


def _stats_rows(table: dict) -> list[dict]:
    return [{"variant": k, **{f: v for f, v in st.as_dict().items() if f != "shifts"}} for k, st in table.items()]


# -- score -----------------------------------------------------------------------

def cmd_score(args) -> int:
    config = load_taxonomy(args.config)
    surface, diagnostics = ingest_instances(args.instances, config)
    for d in diagnostics:
        print(d, file=sys.stderr)
    out = Path(args.out)
    write_text(out, write_slice_scores(surface, config))
    config_bytes = Path(args.config).read_bytes() if args.config else _data("default_taxonomy.json").read_bytes()
    manifest = {
        "command": "score",
        "inputs": {"instances": str(args.instances), "config": args.config or "<default>"},
        "config_sha256": hashlib.sha256(config_bytes).hexdigest(),
        "seed": None,
        "version": __version__,
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
    }
    write_text(out.with_suffix(".manifest.json"), _dump(manifest))
    print(f"{len(surface)} cells for {len(surface.models)} models -> {out}")
    return 0


# -- aggregate -------------------------------------------------------------------

def cmd_aggregate(args) -> int:
    cat_w = _floats(args.category_weights, 3, "--category-weights")
    if args.slices:
        config = load_taxonomy(args.config)
        scope = _scope(args.scope, config)
        surface = read_slice_scores(args.slices, config)
        results = score_surface(surface, config, scope, _weights(args.weights), args.aggregator,
                                cat_w, workers=args.workers)
        bundle = ReportBundle()
        bundle.add_scope(scope, results)
        rows = bundle.leaderboards[format_length(scope)]
    else:
        if args.weights != "uniform":
            raise UsageError("--weights needs per-slice input (--slices)")
        scope = _scope(args.scope)
        rows = _rows_from_categories(_categories(load_leaderboard(args.leaderboard)), args.aggregator, scope, cat_w)
        bundle = ReportBundle(leaderboards={format_length(scope): rows})
    doc = emit_leaderboard(rows, args.format)
    if args.out:
        out = Path(args.out)
        write_text(out, doc)
        write_text(out.with_name(out.stem + ".bundle.json"), bundle.to_json())
    else:
        sys.stdout.write(doc)
    return 0


# -- analyze ---------------------------------------------------------------------

def _two_scopes(args):
    """(short, long) overall-score maps plus the category aggregates at each scope."""
    if args.slices:
        config = load_taxonomy(args.config)
        surface = read_slice_scores(args.slices, config)
        rs = score_surface(surface, config, _scope(args.short_scope, config), workers=args.workers)
        rl = score_surface(surface, config, _scope(args.long_scope, config), workers=args.workers)
        return ({m: r.categories for m, r in rs.items()}, {m: r.overall.mean for m, r in rs.items()},
                {m: r.categories for m, r in rl.items()}, {m: r.overall.mean for m, r in rl.items()})
    short = load_leaderboard(args.short) if args.short else fixture_leaderboard("128k")
    long = load_leaderboard(args.long) if args.long else fixture_leaderboard("1m")
    return (_categories(short), {r.model: r.overall for r in short},
            _categories(long), {r.model: r.overall for r in long})


def _needs_slices(args, mode):
    if not args.slices:
        raise UsageError(f"--mode {mode} needs --slices")
    config = load_taxonomy(args.config)
    return config, read_slice_scores(args.slices, config), _scope(args.scope, config)


def analyze_decay(args):
    if args.slices:
        config, surface, _ = _needs_slices(args, "decay")
        rep = decay_report(surface, config, _scope(args.short_scope, config), _scope(args.long_scope, config))
        rows = [{"model": m, **a, **rep.dimensions[m]} for m, a in rep.aggregates.items()]
        return {"mean_overall": rep.mean_overall(), "models": rep.aggregates, "dimensions": rep.dimensions}, rows
    cs, os_, cl, ol = _two_scopes(args)
    rows = [{"model": m,
             "B": decay_rate(cs[m].b, cl[m].b),
             "C": decay_rate(cs[m].c, cl[m].c),
             "S": decay_rate(cs[m].s, cl[m].s),
             "overall": decay_rate(os_[m], ol[m])} for m in os_]
    mean = sum(r["overall"] for r in rows) / len(rows)
    return {"mean_overall": mean, "models": {r["model"]: {k: v for k, v in r.items() if k != "model"} for r in rows}}, rows


def analyze_migration(args):
    _, os_, _, ol = _two_scopes(args)
    shifts = rank_migration(os_, ol)
    st = compare_rankings(os_, ol)
    rows = [{"model": m, "delta_rank": d} for m, d in shifts.items()]
    payload = {"rho": st.rho, "tau": st.tau, "p_rho": st.p_rho,
               "shifts_ge2": st.count_shifts(2), "moved": sum(d != 0 for d in shifts.values()),
               "shifts": shifts}
    return payload, rows


def _categories_at_scope(args) -> dict[str, CategoryAggregate]:
    if args.slices:
        config, surface, scope = _needs_slices(args, args.mode)
        return {m: r.categories for m, r in score_surface(surface, config, scope, workers=args.workers).items()}
    if args.leaderboard:
        return _categories(load_leaderboard(args.leaderboard))
    return _categories(fixture_leaderboard("1m" if _scope(args.scope) == parse_length("1M") else "128k"))


def analyze_layers(args):
    cats = _categories_at_scope(args)
    threshold = 4 if args.threshold is None else args.threshold
    ld = layer_discrepancy({m: c.b.mean for m, c in cats.items()}, {m: c.c.mean for m, c in cats.items()}, threshold)
    rows = [{"model": m, "gap": g} for m, g in ld.gaps.items()]
    return ld.as_dict(), rows


def analyze_loo(args):
    if not args.drop:
        raise UsageError("--mode loo needs --drop DIMENSION")
    config, surface, scope = _needs_slices(args, "loo")
    st = leave_one_dimension_out(surface, config, scope, args.drop)
    return {"dropped": args.drop, **st.as_dict()}, [{"model": m, "delta_rank": d} for m, d in st.shifts.items()]


def analyze_weights(args):
    if args.slices:
        config, surface, scope = _needs_slices(args, "weights")
        table = weight_scheme_sensitivity(surface, config, scope, [LOGARITHMIC, INVERSE_LOGARITHMIC])
        payload = {k: st.as_dict() for k, (_, st) in table.items()}
        return payload, [{"scheme": k, **{f: v for f, v in st.as_dict().items() if f != "shifts"}}
                         for k, (_, st) in table.items()]
    # published per-scheme table: the printed scores contain ties, so compare the printed ranks
    by: dict[tuple[int, str], dict[str, float]] = {}
    for r in fixture_weight_sensitivity():
        by.setdefault((r["scope"], r["scheme"]), {})[r["model"]] = -float(r["rank"])
    payload, rows = {}, []
    for scope in sorted({k[0] for k in by}):
        base = by[(scope, "uniform")]
        for scheme in ("logarithmic", "inverse-logarithmic"):
            st = compare_rankings(base, by[(scope, scheme)])
            payload.setdefault(format_length(scope), {})[scheme] = st.as_dict()
            rows.append({"scope": format_length(scope), "scheme": scheme, "rho": st.rho, "tau": st.tau,
                         "max_abs_rank_shift": st.max_abs_rank_shift, "shifts_ge2": st.count_shifts(2)})
    return payload, rows


def analyze_aggregation(args):
    table = aggregation_sensitivity(_categories_at_scope(args))
    return {k: st.as_dict() for k, st in table.items()}, _stats_rows(table)


def analyze_holistic(args):
    if args.slices:
        config, surface, scope = _needs_slices(args, "holistic")
        table = holistic_sensitivity(surface, config, scope)
    else:
        table = category_weight_sensitivity(_categories_at_scope(args))
    return {k: st.as_dict() for k, st in table.items()}, _stats_rows(table)


def analyze_lite(args):
    schemes = read_lite_schemes(Path(args.schemes).read_text(encoding="utf-8")) if args.schemes \
        else fixture_lite_schemes()
    if args.costs:
        costs = {r["name"]: float(r["relative_cost"])
                 for r in csv.DictReader(io.StringIO(Path(args.costs).read_text(encoding="utf-8")))}
        unknown = set(costs) - {s.name for s in schemes}
        if unknown:
            raise UsageError(f"--costs names unknown schemes: {sorted(unknown)}")
        from dataclasses import replace
        schemes = [replace(s, relative_cost=costs.get(s.name, s.relative_cost)) for s in schemes]
    surface = config = None
    if args.slices:
        config = load_taxonomy(args.config)
        surface = read_slice_scores(args.slices, config)
    evaluated, front = lite_pareto(schemes, surface, config)
    rows = [{"name": s.name, "slices": ";".join(format_length(x) for x in s.slices),
             "relative_cost": s.relative_cost, "rho": s.rho, "efficiency": s.efficiency,
             "pareto": s.name in front} for s in evaluated]
    return {"frontier": front, "schemes": rows}, rows


def analyze_correlation(args):
    config, surface, scope = _needs_slices(args, "correlation")
    cm = pairwise_dimension_correlation(surface, config, scope)
    rows = [{"a": a, "b": b, "rho": r, "p": p} for a, b, r, p in cm.long_form()]
    return {"dimensions": cm.names, "summary": cm.summary(), "rho": cm.rho.tolist(), "p": cm.p.tolist()}, rows


def analyze_mc(args):
    trials = 100_000 if args.trials is None else args.trials
    means = _floats(args.categories, 3, "--categories")
    variances = _floats(args.variances, 3, "--variances")
    if means is not None:
        targets = {"input": CategoryAggregate.from_values(means, variances or (0.0, 0.0, 0.0))}
    elif variances is not None:
        raise UsageError("--variances needs --categories")
    else:
        targets = _categories_at_scope(args)
    reports = {m: mc_validate(c, trials, args.seed, args.workers) for m, c in targets.items()}
    rows = [{"model": m, "point": r.point, "empirical_half_width": r.empirical_half_width,
             "delta_half_width": r.delta_half_width, "ratio": r.ratio, "rejected": r.rejected}
            for m, r in reports.items()]
    return {"trials": trials, "seed": args.seed, "reports": {m: json.loads(r.to_json()) for m, r in reports.items()}}, rows


ANALYSES = {
    "decay": analyze_decay, "migration": analyze_migration, "layers": analyze_layers, "loo": analyze_loo,
    "weights": analyze_weights, "aggregation": analyze_aggregation, "holistic": analyze_holistic,
    "lite": analyze_lite, "correlation": analyze_correlation, "mc": analyze_mc,
}


def cmd_analyze(args) -> int:
    for flag, modes in MODE_FLAGS.items():
        if getattr(args, flag) is not None and args.mode not in modes:
            raise UsageError(f"--{flag} does not apply to --mode {args.mode}")
    payload, rows = ANALYSES[args.mode](args)
    doc = _dump({"mode": args.mode, **payload})
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        write_text(out / f"{args.mode}.json", doc)
        write_text(out / f"{args.mode}.csv", _csv(rows))
    else:
        sys.stdout.write(doc)
    return 0


# -- parser ----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lcscore", description="Length-aware benchmark scoring and analysis.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("score", help="score instance records into a slice-score CSV")
    s.add_argument("--config", help="taxonomy JSON (default: shipped taxonomy)")
    s.add_argument("--instances", required=True, help="instance records, JSONL")
    s.add_argument("--out", required=True, help="slice-score CSV to write (manifest goes next to it)")
    s.set_defaults(func=cmd_score)

    a = sub.add_parser("aggregate", help="build a leaderboard at one reporting scope")
    src = a.add_mutually_exclusive_group(required=True)
    src.add_argument("--slices", help="slice-score CSV")
    src.add_argument("--leaderboard", help="category-level leaderboard (csv/json/md) to re-aggregate")
    a.add_argument("--config", help="taxonomy JSON (default: shipped taxonomy)")
    a.add_argument("--scope", default="128K", help="128K, 1M or a token count on the grid (default 128K)")
    a.add_argument("--weights", default="uniform", help="uniform, log, invlog or a JSON file {slice: weight}")
    a.add_argument("--aggregator", default="harmonic", choices=AGGREGATORS)
    a.add_argument("--category-weights", help="B,C,S weights for a weighted harmonic aggregate")
    a.add_argument("--format", default="markdown", choices=("markdown", "csv", "json"))
    a.add_argument("--out", help="leaderboard file; a .bundle.json is written beside it (default: stdout)")
    a.add_argument("--workers", type=int, default=1, help="worker threads (output is unaffected)")
    a.set_defaults(func=cmd_aggregate)

    z = sub.add_parser("analyze", help="ranking, decay, sensitivity, Lite and Monte Carlo analyses")
    z.add_argument("--mode", required=True, choices=MODES)
    z.add_argument("--slices", help="slice-score CSV (surface-level analyses)")
    z.add_argument("--config", help="taxonomy JSON (default: shipped taxonomy)")
    z.add_argument("--leaderboard", help="leaderboard at --scope (default: shipped published table)")
    z.add_argument("--short", help="short-scope leaderboard (default: shipped 128K table)")
    z.add_argument("--long", help="long-scope leaderboard (default: shipped 1M table)")
    z.add_argument("--scope", default="128K", help="scope for single-scope modes (default 128K)")
    z.add_argument("--short-scope", default="128K", help="short scope with --slices (default 128K)")
    z.add_argument("--long-scope", default="1M", help="long scope with --slices (default 1M)")
    z.add_argument("--trials", type=int, help="mc: number of trials (default 100000)")
    z.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    z.add_argument("--categories", help="mc: B,C,S means instead of a leaderboard")
    z.add_argument("--variances", help="mc: B,C,S variances to go with --categories")
    z.add_argument("--schemes", help="lite: scheme CSV (default: shipped table)")
    z.add_argument("--costs", help="lite: CSV name,relative_cost overriding scheme costs")
    z.add_argument("--drop", help="loo: dimension to remove")
    z.add_argument("--threshold", type=float, help="layers: rank-gap threshold (default 4)")
    z.add_argument("--out", help="directory for <mode>.json and <mode>.csv (default: JSON to stdout)")
    z.add_argument("--workers", type=int, default=1, help="worker threads (output is unaffected)")
    z.set_defaults(func=cmd_analyze)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "workers", 1) < 1:
        print("error: --workers must be >= 1", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except VALIDATION_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
