"""Length-aware benchmark scoring: slice AUCs, category aggregates, uncertainty and rank analytics."""
from __future__ import annotations

__version__ = "0.1.0"

from lcscore.aggregation import (  # noqa: E402
    CategoryAggregate,
    OverallScore,
    aggregate,
    harmonic_aggregate,
    score_surface,
)
from lcscore.auc import alpha_weights, auc, decay_rate, weighted_auc  # noqa: E402
from lcscore.core import LengthGrid, ScoreSurface, SliceScore, TaxonomyConfig  # noqa: E402
from lcscore.uncertainty import CiEstimate  # noqa: E402

__all__ = [
    "CategoryAggregate", "CiEstimate", "LengthGrid", "OverallScore", "ScoreSurface", "SliceScore",
    "TaxonomyConfig", "aggregate", "alpha_weights", "auc", "decay_rate", "harmonic_aggregate",
    "score_surface", "weighted_auc",
]
