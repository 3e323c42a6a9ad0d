"""Per-item feature vectors for the scoring head.

Two sources: precomputed sentence-embedding files (JSON lines of
{"id": ..., "vector": [...]}), or a built-in deterministic hashed TF-IDF
featurizer. The featurizer tokenizes by lowercasing and splitting on
non-alphanumeric runs, hashes tokens with seed-free 64-bit FNV-1a into
`dim` buckets, and weights buckets by tf * (ln((1+N)/(1+df)) + 1).
Hash collisions are accepted: colliding tokens add into a shared bucket.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

import numpy as np

DEFAULT_DIM = 384

_TOKEN_RE = re.compile(r"[^\W_]+")

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK64 = 0xFFFFFFFFFFFFFFFF


def fnv1a64(token: str) -> int:
    """Seed-free FNV-1a 64-bit hash of the token's UTF-8 bytes."""
    h = _FNV_OFFSET
    for byte in token.encode("utf-8"):
        h ^= byte
        h = (h * _FNV_PRIME) & _MASK64
    return h


def tokenize(text: str) -> list[str]:
    """Lowercase, split on non-alphanumeric runs, drop empty tokens."""
    return _TOKEN_RE.findall(text.lower())


@dataclass(frozen=True)
class EmbeddingMatrix:
    """Dense feature vectors keyed by item id, all of one dimension."""

    dim: int
    vectors: dict[str, np.ndarray]

    def __contains__(self, item_id: str) -> bool:
        return item_id in self.vectors

    def get(self, item_id: str) -> np.ndarray:
        try:
            return self.vectors[item_id]
        except KeyError:
            raise KeyError(f"no embedding for item id {item_id!r}") from None

    def stack(self, ids: Iterable[str]) -> np.ndarray:
        """Row-stack the vectors for the given ids, order preserved."""
        ids = list(ids)
        if not ids:
            return np.zeros((0, self.dim), dtype=np.float64)
        return np.stack([self.get(i) for i in ids])

    def covers(self, ids: Iterable[str]) -> bool:
        return all(i in self.vectors for i in ids)


def load_embeddings(path) -> EmbeddingMatrix:
    """Load a JSON-lines embedding file; dim is inferred from the first line."""
    path = Path(path)
    vectors: dict[str, np.ndarray] = {}
    dim = None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            obj = json.loads(line)
            item_id = str(obj["id"])
            vec = np.asarray(obj["vector"], dtype=np.float64)
            if vec.ndim != 1:
                raise ValueError(f"item {item_id!r}: vector must be one-dimensional")
            if dim is None:
                dim = int(vec.size)
            elif vec.size != dim:
                raise ValueError(
                    f"item {item_id!r}: vector length {vec.size} differs from {dim} (line {lineno})"
                )
            if not np.all(np.isfinite(vec)):
                raise ValueError(f"item {item_id!r}: vector contains a non-finite value")
            vectors[item_id] = vec
    if dim is None:
        raise ValueError(f"embedding file {path} is empty")
    return EmbeddingMatrix(dim=dim, vectors=vectors)


def save_embeddings(emb: EmbeddingMatrix, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for item_id, vec in emb.vectors.items():
            fh.write(json.dumps({"id": item_id, "vector": [float(v) for v in vec]}) + "\n")


@dataclass(frozen=True)
class HashedTfidfModel:
    """Fitted hashed TF-IDF featurizer (bucket document frequencies)."""

    dim: int
    doc_count: int
    bucket_df: np.ndarray = field(repr=False)
    normalize: bool = True

    def buckets(self, text: str) -> list[int]:
        return [fnv1a64(tok) % self.dim for tok in tokenize(text)]


def fit_hashed_tfidf(corpus: Iterable[str], dim: int = DEFAULT_DIM, normalize: bool = True) -> HashedTfidfModel:
    """Fit bucket document frequencies over a corpus of texts."""
    if dim < 1:
        raise ValueError(f"dim must be >= 1, got {dim}")
    df = np.zeros(dim, dtype=np.int64)
    doc_count = 0
    for text in corpus:
        doc_count += 1
        touched = {fnv1a64(tok) % dim for tok in set(tokenize(text))}
        for bucket in touched:
            df[bucket] += 1
    if doc_count == 0:
        raise ValueError("cannot fit featurizer on an empty corpus")
    return HashedTfidfModel(dim=dim, doc_count=doc_count, bucket_df=df, normalize=normalize)


def embed(model: HashedTfidfModel, text: str) -> np.ndarray:
    """Feature vector for one text: per-bucket tf * idf, optionally unit-norm."""
    vec = np.zeros(model.dim, dtype=np.float64)
    for bucket in model.buckets(text):
        vec[bucket] += 1.0
    nonzero = vec > 0
    if np.any(nonzero):
        idf = np.log((1.0 + model.doc_count) / (1.0 + model.bucket_df[nonzero])) + 1.0
        vec[nonzero] *= idf
        if model.normalize:
            vec /= math.sqrt(float(np.sum(vec * vec)))
    return vec


def embed_items(model: HashedTfidfModel, texts_by_id: dict[str, str]) -> EmbeddingMatrix:
    """Featurize a whole backlog into an EmbeddingMatrix."""
    return EmbeddingMatrix(
        dim=model.dim,
        vectors={item_id: embed(model, text) for item_id, text in texts_by_id.items()},
    )


def save_tfidf(model: HashedTfidfModel, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump({
            "dim": model.dim,
            "doc_count": model.doc_count,
            "bucket_df": [int(x) for x in model.bucket_df],
            "normalize": model.normalize,
        }, fh)


def load_tfidf(path) -> HashedTfidfModel:
    with open(path, encoding="utf-8") as fh:
        obj = json.load(fh)
    return HashedTfidfModel(
        dim=int(obj["dim"]),
        doc_count=int(obj["doc_count"]),
        bucket_df=np.asarray(obj["bucket_df"], dtype=np.int64),
        normalize=bool(obj["normalize"]),
    )
