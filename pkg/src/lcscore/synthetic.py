"""Seeded synthetic surfaces and instance records for tests and demos."""
from __future__ import annotations

import json
import math

import numpy as np

from lcscore.core import ScoreSurface, SliceScore, TaxonomyConfig


def synthetic_surface(config: TaxonomyConfig, n_models: int = 12, seed: int = 0,
                      with_variance: bool = True) -> ScoreSurface:
    """Each model gets a base ability and a per-doubling decay; slice scores follow
    that curve plus noise, variances follow the binomial rate at the configured counts."""
    rng = np.random.default_rng(seed)
    cells = {}
    l0 = config.grid.slices[0]
    for i in range(n_models):
        model = f"model-{i:02d}"
        base, decay = rng.uniform(40, 95), rng.uniform(0.0, 0.09)
        for comp in config.components:
            offset = rng.normal(0, 8)
            if comp.length_sliced:
                keys = comp.slices
            else:
                keys = (None,)
            for sl in keys:
                doublings = 0.0 if sl is None else math.log2(sl / l0)
                m = base + offset - 100 * decay * doublings + rng.normal(0, 2)
                m = float(np.clip(m, 1.0, 99.0))
                n = comp.counts.get(sl, 100) if comp.counts else 100
                v = m * (100 - m) / n if with_variance else 0.0
                cells[(model, comp.name, sl)] = SliceScore(m, v, n, comp.estimator)
    return ScoreSurface(cells)


def synthetic_instances(config: TaxonomyConfig, models=("alpha", "beta"), per_cell: int = 6,
                        seed: int = 0, slices=None) -> list[dict]:
    """JSONL-ready records covering every component (restricted to ``slices`` if given)."""
    rng = np.random.default_rng(seed)
    out = []
    for model in models:
        for comp in config.components:
            keys = [s for s in comp.slices if slices is None or s in slices] if comp.length_sliced else [None]
            for sl in keys:
                for j in range(per_cell):
                    hit = bool(rng.random() < 0.6)
                    rec = {"model": model, "component": comp.name, "slice": sl,
                           "instance_id": f"{comp.name}-{sl}-{j}", "cluster_id": f"ctx{j // 2}"}
                    rec.update(_payload(comp, j, hit))
                    out.append(rec)
    return out


def _payload(comp, j: int, hit: bool) -> dict:
    kind = comp.metric
    if kind == "composite":
        sub = sorted(comp.subcomponents)[j % len(comp.subcomponents)]
        kind = comp.subcomponents[sub]
        return {"subcomponent": sub, **_payload_for(kind, hit)}
    return _payload_for(kind, hit)


def _payload_for(kind: str, hit: bool) -> dict:
    if kind == "em":
        return {"kind": kind, "prediction": "blue whale" if hit else "orca", "gold": "blue whale"}
    if kind == "acc":
        return {"kind": kind, "prediction": "B" if hit else "C", "gold": "B"}
    if kind == "binary":
        return {"kind": kind, "prediction": int(hit), "gold": None}
    if kind == "f1":
        return {"kind": kind, "prediction": ["a", "b"] if hit else ["a", "z"], "gold": ["a", "b"]}
    if kind == "mrecall":
        return {"kind": kind, "prediction": ["d1", "d2"] if hit else ["d9"], "gold": {"ids": ["d1", "d2"], "k": 2}}
    if kind == "qpem":
        return {"kind": kind, "prediction": "Paris, France" if hit else "Lyon", "gold": ["Paris"]}
    if kind == "answer_level":
        return {"kind": kind, "prediction": "12" if hit else "15", "gold": {"type": "numeric", "value": 12}}
    raise ValueError(kind)


def write_jsonl(records, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for r in records:
            f.write(json.dumps(r) + "\n")
