"""Pixel-overlap scoring of predicted masks against annotations."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError
from .imaging import BinaryMask

__all__ = ["ConfusionCounts", "MetricSet", "AggregateMetrics", "confusion", "metric_set", "aggregate"]


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    fn: int
    tn: int

    def __post_init__(self):
        if min(self.tp, self.fp, self.fn, self.tn) < 0:
            raise ValueError("confusion counts must be nonnegative")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn

    def __add__(self, other: "ConfusionCounts") -> "ConfusionCounts":
        return ConfusionCounts(
            self.tp + other.tp, self.fp + other.fp, self.fn + other.fn, self.tn + other.tn
        )


@dataclass(frozen=True)
class MetricSet:
    """The six overlap ratios; 0/0 cases score 0 and are listed in ``degenerate``."""

    jaccard: float
    dice: float
    sensitivity: float
    specificity: float
    accuracy: float
    precision: float
    degenerate: tuple = ()

    def to_dict(self) -> dict:
        return {
            "jaccard": self.jaccard,
            "dice": self.dice,
            "sensitivity": self.sensitivity,
            "specificity": self.specificity,
            "accuracy": self.accuracy,
            "precision": self.precision,
            "degenerate": list(self.degenerate),
        }


@dataclass(frozen=True)
class AggregateMetrics:
    """Pooled (summed confusion) is the headline; the per-slice mean rides along."""

    pooled: MetricSet
    mean: MetricSet
    n_slices: int

    def to_dict(self) -> dict:
        return {
            "pooled": self.pooled.to_dict(),
            "mean": self.mean.to_dict(),
            "n_slices": self.n_slices,
        }


def confusion(pred: BinaryMask, truth: BinaryMask) -> ConfusionCounts:
    if pred.bits.shape != truth.bits.shape:
        raise DimensionError(
            f"mask shapes differ: {pred.bits.shape} vs {truth.bits.shape}"
        )
    p, t = pred.bits, truth.bits
    return ConfusionCounts(
        tp=int(np.sum(p & t)),
        fp=int(np.sum(p & ~t)),
        fn=int(np.sum(~p & t)),
        tn=int(np.sum(~p & ~t)),
    )


def _ratio(num: int, den: int, name: str, degenerate: list) -> float:
    if den == 0:
        degenerate.append(name)
        return 0.0
    return num / den


def metric_set(c: ConfusionCounts) -> MetricSet:
    degenerate: list = []
    return MetricSet(
        jaccard=_ratio(c.tp, c.tp + c.fp + c.fn, "jaccard", degenerate),
        dice=_ratio(2 * c.tp, 2 * c.tp + c.fp + c.fn, "dice", degenerate),
        sensitivity=_ratio(c.tp, c.tp + c.fn, "sensitivity", degenerate),
        specificity=_ratio(c.tn, c.tn + c.fp, "specificity", degenerate),
        accuracy=_ratio(c.tp + c.tn, c.total, "accuracy", degenerate),
        precision=_ratio(c.tp, c.tp + c.fp, "precision", degenerate),
        degenerate=tuple(degenerate),
    )


def aggregate(per_slice: list) -> AggregateMetrics:
    """Combine per-slice ConfusionCounts into pooled and mean metric sets.

    Pooling sums the confusion tables first (pixel counts weight slices
    naturally); the mean averages each per-slice ratio unweighted.
    """
    if not per_slice:
        raise ValueError("cannot aggregate an empty slice sequence")
    pooled_counts = per_slice[0]
    for c in per_slice[1:]:
        pooled_counts = pooled_counts + c
    sets = [metric_set(c) for c in per_slice]
    names = ("jaccard", "dice", "sensitivity", "specificity", "accuracy", "precision")
    means = {n: float(np.mean([getattr(s, n) for s in sets])) for n in names}
    return AggregateMetrics(
        pooled=metric_set(pooled_counts),
        mean=MetricSet(**means),
        n_slices=len(per_slice),
    )
