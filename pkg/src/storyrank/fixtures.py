"""Synthetic backlog fixtures.

Real issue-tracker text is not bundled, so two generators stand in:

* make_project: a backlog shaped like one of the 16 benchmark projects
  (same item count and story point range as in reference.PROJECT_STATS),
  with template-generated titles/descriptions whose wording correlates
  with effort so that text features carry signal. 60/20/20
  train/validation/test splits by position.
* make_ranking_fixture: items with random unit feature vectors and story
  points obtained by quantizing a known linear score, used to verify that
  comparative training recovers the planted ranking.

Both are fully deterministic: per-project seeds derive from the project
name via the same seed-free hash used by the featurizer.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from . import dataset as ds
from .features import EmbeddingMatrix, fnv1a64
from .reference import PROJECT_STATS

SP_LADDER = (1, 2, 3, 5, 8, 13, 21, 34, 55, 89)

_VERBS = ("add", "fix", "update", "refactor", "remove", "improve",
          "investigate", "support", "migrate", "document")
_COMPONENTS = ("login", "search", "export", "dashboard", "api", "scheduler",
               "parser", "cache", "billing", "editor", "notifications", "reports")
_OBJECTS = ("flow", "endpoint", "widget", "module", "pipeline", "screen",
            "handler", "config", "index", "layout")
_MAGNITUDE = ("trivial", "minor", "small", "moderate", "notable", "substantial",
              "major", "complex", "sweeping", "massive", "enormous", "colossal")
_FILLER = ("users", "report", "that", "the", "behaviour", "fails", "when",
           "after", "upgrade", "environment", "intermittently", "reproduce",
           "steps", "expected", "actual", "version", "regression", "cleanup")


def _sp_levels(min_sp: int, max_sp: int) -> list[int]:
    levels = [v for v in SP_LADDER if min_sp < v < max_sp]
    return sorted({min_sp, *levels, max_sp})


def _split_for(i: int, n: int) -> str:
    if i < round(0.6 * n):
        return "train"
    if i < round(0.8 * n):
        return "validation"
    return "test"


def make_project(name: str, size: int | None = None, min_sp: int | None = None,
                 max_sp: int | None = None, seed: int | None = None) -> ds.ProjectDataset:
    """Generate a synthetic backlog; defaults come from the benchmark stats."""
    if size is None or min_sp is None or max_sp is None:
        try:
            stats = PROJECT_STATS[name]
        except KeyError:
            raise ValueError(f"unknown project {name!r}; pass size/min_sp/max_sp explicitly") from None
        size, min_sp, max_sp = stats
    if seed is None:
        seed = fnv1a64(name) % 2**32
    rng = np.random.default_rng(seed)

    levels = _sp_levels(min_sp, max_sp)
    if size < 2 and len(levels) > 1:
        raise ValueError("need at least 2 items to realize a story point range")
    # small story points dominate real backlogs
    weights = 0.55 ** np.arange(len(levels))
    weights /= weights.sum()
    level_idx = rng.choice(len(levels), size=size, p=weights)
    # the range endpoints must actually occur
    if len(levels) > 1:
        pos_min = int(rng.integers(size))
        pos_max = int(rng.integers(size - 1))
        if pos_max >= pos_min:
            pos_max += 1
        level_idx[pos_min] = 0
        level_idx[pos_max] = len(levels) - 1

    prefix = "".join(c for c in name.upper() if c.isalnum())[:4] or "PROJ"
    items = []
    for i in range(size):
        li = int(level_idx[i])
        sp = levels[li]
        magnitude = _MAGNITUDE[min(li, len(_MAGNITUDE) - 1)]
        title = f"{rng.choice(_VERBS)} {magnitude} {rng.choice(_COMPONENTS)} {rng.choice(_OBJECTS)}"
        body = " ".join(rng.choice(_FILLER, size=int(4 + 2 * li)))
        description = f"{magnitude} change to the {rng.choice(_COMPONENTS)} {rng.choice(_OBJECTS)}: {body}"
        items.append(ds.BacklogItem(
            id=f"{prefix}-{i + 1}",
            title=title,
            description=description,
            story_point=float(sp),
            split=_split_for(i, size),
        ))
    return ds.ProjectDataset(name=name, items=tuple(items))


def write_project(name: str, outdir, format: str = ds.FORMAT_CSV) -> Path:
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    suffix = ".csv" if format == ds.FORMAT_CSV else ".jsonl"
    path = outdir / f"{name}{suffix}"
    ds.save_project(make_project(name), path, format)
    return path


RANKING_FIXTURE_SEED = 6
RANKING_FIXTURE_NAME = "planted-ranking"


def make_ranking_fixture(n: int = 500, dim: int = 16, levels: int = 8,
                         seed: int = RANKING_FIXTURE_SEED):
    """Backlog with unit feature vectors and a planted linear ranking.

    Each item's true score is w_star.x; story points are the true scores
    quantized into `levels` equal-count bins (1-based), giving balanced
    labels across the range. Returns (dataset, embeddings, w_star).
    """
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, dim))
    X /= np.linalg.norm(X, axis=1, keepdims=True)
    w_star = rng.standard_normal(dim)
    w_star /= np.linalg.norm(w_star)
    s = X @ w_star

    cuts = np.quantile(s, np.linspace(0.0, 1.0, levels + 1)[1:-1])
    level_idx = np.searchsorted(cuts, s)

    items = []
    vectors = {}
    for i in range(n):
        item_id = f"S{i:03d}"
        items.append(ds.BacklogItem(
            id=item_id,
            title=f"synthetic item {i}",
            description="",
            story_point=float(level_idx[i] + 1),
            split=_split_for(i, n),
        ))
        vectors[item_id] = X[i]
    dataset = ds.ProjectDataset(name=RANKING_FIXTURE_NAME, items=tuple(items))
    return dataset, EmbeddingMatrix(dim=dim, vectors=vectors), w_star


def write_ranking_fixture(outdir, **kwargs) -> tuple[Path, Path]:
    """Write the planted-ranking fixture as dataset + embedding files."""
    from .features import save_embeddings

    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    dataset, emb, _ = make_ranking_fixture(**kwargs)
    data_path = outdir / f"{dataset.name}.csv"
    emb_path = outdir / f"{dataset.name}.embeddings.jsonl"
    ds.save_project(dataset, data_path, ds.FORMAT_CSV)
    save_embeddings(emb, emb_path)
    return data_path, emb_path
