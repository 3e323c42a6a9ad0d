"""Rank-agreement metrics for effort scores: Pearson, Spearman, MAE.

Spearman is computed as Pearson over fractional (average) ranks, which
handles the heavy story-point ties correctly and reduces to the classic
1 - 6*sum(d^2)/(n*(n^2-1)) closed form when no ties are present.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class UndefinedCorrelationError(ValueError):
    """Raised when a correlation is undefined (zero variance input)."""


@dataclass(frozen=True)
class EvaluationResult:
    """Metric bundle for one model evaluation on one test split.

    mae is None for comparative models, whose scores are unitless and not
    in story-point units.
    """

    pearson: float
    spearman: float
    mae: float | None
    n: int


def fractional_ranks(values) -> np.ndarray:
    """Average ranks, 1-based, smallest value gets rank 1.

    Tied values receive the mean of the rank positions they span.
    """
    a = np.asarray(values, dtype=np.float64).reshape(-1)
    if a.size == 0:
        raise ValueError("fractional_ranks requires a non-empty list")
    order = np.argsort(a, kind="mergesort")
    ranks = np.empty(a.size, dtype=np.float64)
    i = 0
    while i < a.size:
        j = i
        while j + 1 < a.size and a[order[j + 1]] == a[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def pearson(pred, truth) -> float:
    """Pearson correlation: centered dot product over product of centered norms."""
    p = np.asarray(pred, dtype=np.float64).reshape(-1)
    t = np.asarray(truth, dtype=np.float64).reshape(-1)
    if p.size != t.size:
        raise ValueError(f"length mismatch: {p.size} vs {t.size}")
    if p.size < 2:
        raise ValueError("pearson requires at least 2 points")
    pc = p - p.mean()
    tc = t - t.mean()
    denom = np.sqrt(np.sum(pc * pc) * np.sum(tc * tc))
    if denom == 0.0:
        raise UndefinedCorrelationError("zero variance input, correlation undefined")
    return float(np.sum(pc * tc) / denom)


def spearman(pred, truth) -> float:
    """Rank correlation: Pearson of the fractional ranks of both lists."""
    p = np.asarray(pred, dtype=np.float64).reshape(-1)
    t = np.asarray(truth, dtype=np.float64).reshape(-1)
    if p.size != t.size:
        raise ValueError(f"length mismatch: {p.size} vs {t.size}")
    if p.size < 2:
        raise ValueError("spearman requires at least 2 points")
    return pearson(fractional_ranks(p), fractional_ranks(t))


def mae(pred, truth) -> float:
    """Mean absolute difference between predicted and actual values."""
    p = np.asarray(pred, dtype=np.float64).reshape(-1)
    t = np.asarray(truth, dtype=np.float64).reshape(-1)
    if p.size != t.size:
        raise ValueError(f"length mismatch: {p.size} vs {t.size}")
    if p.size == 0:
        raise ValueError("mae requires at least 1 point")
    return float(np.mean(np.abs(t - p)))
