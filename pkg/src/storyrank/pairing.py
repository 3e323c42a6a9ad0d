"""Comparative-judgment pair construction.

Each backlog item in turn is the anchor and draws k distinct partners
uniformly at random (without replacement) from the other items. For
simulated judgments the label is the sign of the story point difference;
partners tied with the anchor are rejected and redrawn from the remaining
untried candidates, and any shortfall is accounted in `dropped`.

Randomness comes from NumPy's PCG64 generator so a given (items, k, seed)
always yields the same pair set, element order included.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .dataset import BacklogItem


@dataclass(frozen=True)
class ComparativePair:
    """One judged pair: y=+1 when the anchor needs more effort, else -1."""

    id_a: str
    id_b: str
    y: int

    def __post_init__(self):
        if self.id_a == self.id_b:
            raise ValueError(f"self-pair on item {self.id_a!r}")
        if self.y not in (+1, -1):
            raise ValueError(f"judgment must be +1 or -1, got {self.y}")


@dataclass(frozen=True)
class PairSet:
    """Ordered pair collection; dropped counts pairs lost to tie exhaustion."""

    pairs: tuple[ComparativePair, ...]
    k: int
    dropped: int


def _check_inputs(items: Sequence[BacklogItem], k: int) -> None:
    if len(items) < 2:
        raise ValueError(f"need at least 2 items to form pairs, got {len(items)}")
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")


def simulate_pairs(items: Sequence[BacklogItem], k: int, seed: int) -> PairSet:
    """Simulate judgments from ground-truth story points.

    Pairs are grouped by anchor in item order: with no shortfall, pair
    i*k+j has the i-th item as the anchor.
    """
    _check_inputs(items, k)
    unlabeled = [it.id for it in items if it.story_point is None]
    if unlabeled:
        raise ValueError(f"items without story points cannot be simulated: {unlabeled[:5]}")
    rng = np.random.default_rng(seed)
    sps = [it.story_point for it in items]
    pairs: list[ComparativePair] = []
    dropped = 0
    for i, anchor in enumerate(items):
        taken = 0
        for j in rng.permutation(len(items)):
            if taken == k:
                break
            if j == i or sps[j] == sps[i]:
                continue
            y = +1 if sps[i] > sps[j] else -1
            pairs.append(ComparativePair(id_a=anchor.id, id_b=items[j].id, y=y))
            taken += 1
        dropped += k - taken
    return PairSet(pairs=tuple(pairs), k=k, dropped=dropped)


def generate_annotation_pairs(items: Sequence[BacklogItem], k: int, seed: int) -> list[tuple[str, str]]:
    """Unlabeled pairs for human judgment: same sampling, no tie rejection."""
    _check_inputs(items, k)
    rng = np.random.default_rng(seed)
    pairs: list[tuple[str, str]] = []
    for i, anchor in enumerate(items):
        taken = 0
        for j in rng.permutation(len(items)):
            if taken == k:
                break
            if j == i:
                continue
            pairs.append((anchor.id, items[j].id))
            taken += 1
    return pairs


def save_pairs(pairs, path) -> None:
    """Persist pairs as JSON lines; labeled pairs carry a "y" key."""
    rows = pairs.pairs if isinstance(pairs, PairSet) else pairs
    with open(path, "w", encoding="utf-8") as fh:
        for p in rows:
            if isinstance(p, ComparativePair):
                fh.write(json.dumps({"a": p.id_a, "b": p.id_b, "y": p.y}) + "\n")
            else:
                a, b = p
                fh.write(json.dumps({"a": a, "b": b}) + "\n")


def load_pairs(path) -> list[ComparativePair]:
    """Load labeled pairs written by save_pairs."""
    out = []
    with open(Path(path), encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            obj = json.loads(line)
            out.append(ComparativePair(id_a=obj["a"], id_b=obj["b"], y=int(obj["y"])))
    return out
