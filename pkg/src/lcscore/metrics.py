"""Per-instance scorers. Every scorer returns a float in [0, 1]."""
from __future__ import annotations

import math
import re
import statistics
import unicodedata
from dataclasses import dataclass
from datetime import date, datetime
from typing import Iterable, Mapping, Optional, Sequence


class MetricInputError(ValueError):
    pass


@dataclass(frozen=True)
class InstanceScore:
    value: float
    instance_id: str = ""
    cluster_id: Optional[str] = None
    subcomponent: Optional[str] = None
    diagnostic: Optional[str] = None


_WS = re.compile(r"\s+")


def normalize_text(raw: str) -> str:
    """Lowercase, drop every Unicode punctuation codepoint, collapse whitespace."""
    lowered = raw.lower()
    kept = "".join(ch for ch in lowered if not unicodedata.category(ch).startswith("P"))
    return _WS.sub(" ", kept).strip()


def score_exact_match(pred: str, gold: str) -> float:
    return 1.0 if pred.strip() == gold.strip() else 0.0


def score_accuracy(pred: str, gold: str) -> float:
    """Classification accuracy: label equality after text normalization."""
    return 1.0 if normalize_text(str(pred)) == normalize_text(str(gold)) else 0.0


def score_qpem(pred: str, golds: Sequence[str], exact_mode: bool = False) -> float:
    """Quasi-prefix exact match against any gold answer unit.

    ``exact_mode`` switches to normalized equality, used for fixed output
    mappings where one option is a prefix of another.
    """
    if not golds:
        raise MetricInputError("qpem needs at least one gold answer")
    p = normalize_text(pred)
    for g in golds:
        g = normalize_text(g)
        if (p == g) if exact_mode else p.startswith(g):
            return 1.0
    return 0.0


def score_set_f1(pred: Iterable, gold: Iterable) -> float:
    pred, gold = set(pred), set(gold)
    if not pred and not gold:
        return 1.0
    if not pred or not gold:
        return 0.0
    hit = len(pred & gold)
    if hit == 0:
        return 0.0
    p, r = hit / len(pred), hit / len(gold)
    return 2 * p * r / (p + r)


def score_mrecall_at_k(pred: Sequence, gold: Iterable, k: int) -> float:
    """1 iff the top-k distinct predicted ids hold min(k, |gold|) distinct gold ids."""
    if k < 1:
        raise MetricInputError(f"k must be positive, got {k}")
    gold = set(gold)
    if not gold:
        raise MetricInputError("mrecall needs a nonempty gold set")
    top = list(dict.fromkeys(pred))[:k]
    found = len(gold.intersection(top))
    return 1.0 if found >= min(k, len(gold)) else 0.0


# -- answer-level scoring ---------------------------------------------------

ANSWER_KINDS = ("categorical", "date", "numeric", "frequency")

_MONTHS = {
    m.lower(): i
    for i, names in enumerate(
        [("january", "jan"), ("february", "feb"), ("march", "mar"), ("april", "apr"),
         ("may",), ("june", "jun"), ("july", "jul"), ("august", "aug"),
         ("september", "sep", "sept"), ("october", "oct"), ("november", "nov"),
         ("december", "dec")],
        start=1,
    )
    for m in names
}
_NUM_STRIP = re.compile(r"[,$€£¥%\s]")
_NUM = re.compile(r"^[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?$")
_ISO = re.compile(r"^(\d{4})-(\d{1,2})-(\d{1,2})$")
_MDY = re.compile(r"^([a-z]+)\.? (\d{1,2}),? (\d{4})$")
_DMY = re.compile(r"^(\d{1,2}) ([a-z]+)\.?,? (\d{4})$")


def parse_number(raw) -> float:
    if isinstance(raw, (int, float)) and not isinstance(raw, bool):
        return float(raw)
    s = _NUM_STRIP.sub("", str(raw))
    if not _NUM.match(s):
        raise MetricInputError(f"unparseable number: {raw!r}")
    return float(s)


def parse_date(raw) -> str:
    """Canonical ISO-8601 form of YYYY-MM-DD, 'Month D, YYYY' or 'D Month YYYY'."""
    if isinstance(raw, (date, datetime)):
        return raw.strftime("%Y-%m-%d")
    s = _WS.sub(" ", str(raw).strip().lower())
    if m := _ISO.match(s):
        y, mo, d = int(m[1]), int(m[2]), int(m[3])
    elif (m := _MDY.match(s)) and m[1] in _MONTHS:
        y, mo, d = int(m[3]), _MONTHS[m[1]], int(m[2])
    elif (m := _DMY.match(s)) and m[2] in _MONTHS:
        y, mo, d = int(m[3]), _MONTHS[m[2]], int(m[1])
    else:
        raise MetricInputError(f"unparseable date: {raw!r}")
    try:
        return date(y, mo, d).isoformat()
    except ValueError as exc:
        raise MetricInputError(f"invalid date: {raw!r}") from exc


def answer_level(pred, gold, kind: str, tau: float = 1.0) -> tuple[float, Optional[str]]:
    """Score plus an optional parse diagnostic; malformed predictions score 0."""
    if kind not in ANSWER_KINDS:
        raise MetricInputError(f"unknown answer kind {kind!r}")
    if kind == "numeric":
        if tau <= 0:
            raise MetricInputError("tau must be positive")
        g = parse_number(gold)
        try:
            p = parse_number(pred)
        except MetricInputError as exc:
            return 0.0, str(exc)
        return math.exp(-abs(p - g) / tau), None
    if kind == "date":
        g = parse_date(gold)
        try:
            p = parse_date(pred)
        except MetricInputError as exc:
            return 0.0, str(exc)
        return float(p == g), None
    return float(normalize_text(str(pred)) == normalize_text(str(gold))), None


def score_answer_level(pred, gold, kind: str, tau: float = 1.0) -> float:
    return answer_level(pred, gold, kind, tau)[0]


# -- composite --------------------------------------------------------------

def weighted_composite(
    summaries: Mapping[str, tuple[float, float, int]],
    weights: Mapping[str, float] | str = "count",
) -> tuple[float, float]:
    """Combine independent subcomponents given ``(mean, sample_variance, n)`` each.

    ``weights`` maps subcomponent -> nonnegative weight, or is ``"count"``
    (instance-count weights) or ``"equal"``. Returns the weighted mean and
    sum(lambda_m**2 * var_m / n_m).
    """
    if not summaries:
        raise MetricInputError("composite needs at least one subcomponent")
    if weights == "count":
        weights = {m: float(n) for m, (_, _, n) in summaries.items()}
    elif weights == "equal":
        weights = {m: 1.0 for m in summaries}
    elif isinstance(weights, str):
        raise MetricInputError(f"unknown weights mode {weights!r}")
    total = sum(weights[m] for m in summaries)
    if total <= 0 or any(weights[m] < 0 for m in summaries):
        raise MetricInputError("composite weights must be nonnegative and not all zero")
    mean = var = 0.0
    for m, (mu, s2, n) in summaries.items():
        lam = weights[m] / total
        mean += lam * mu
        var += lam**2 * s2 / n
    return mean, var


def score_weighted_binary_composite(
    scores: Mapping[str, Sequence[float]],
    weights: Mapping[str, float] | str = "count",
) -> tuple[float, float]:
    """Weighted composite of per-subcomponent instance scores (Bessel-corrected)."""
    if not scores:
        raise MetricInputError("composite needs at least one subcomponent")
    summaries = {}
    for name, xs in scores.items():
        if len(xs) < 2:
            raise MetricInputError(
                f"subcomponent {name!r} has {len(xs)} instance(s); variance undefined"
            )
        summaries[name] = (statistics.fmean(xs), statistics.variance(xs), len(xs))
    return weighted_composite(summaries, weights)
