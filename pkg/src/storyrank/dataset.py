"""Backlog loading and validation.

A project backlog is a list of items (id, title, description, optional
story point, split tag) with predefined train/validation/test splits.
Two on-disk formats are supported: a delimited table (CSV, RFC 4180
quoting, header row names the five fields in any order) and JSON lines
(one object per line with the same five keys).
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, Iterator

SPLITS = ("train", "validation", "test", "unassigned")
FIELDS = ("id", "title", "description", "story_point", "split")

FORMAT_CSV = "delimited-table"
FORMAT_JSONL = "json-lines"


class FormatError(ValueError):
    """Malformed input file; carries the offending 1-based line number."""

    def __init__(self, message: str, line: int | None = None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


class ValidationError(ValueError):
    """Parsed file violates a backlog invariant."""


@dataclass(frozen=True)
class BacklogItem:
    id: str
    title: str
    description: str
    story_point: float | None
    split: str

    def __post_init__(self):
        if not self.id:
            raise ValidationError("item id must be non-empty")
        if self.story_point is not None and not self.story_point > 0:
            raise ValidationError(f"item {self.id!r}: story point must be > 0, got {self.story_point}")
        if self.split not in SPLITS:
            raise ValidationError(f"item {self.id!r}: unknown split {self.split!r}")


def item_text(item: BacklogItem) -> str:
    """Title and description joined by a single space, no dangling separator."""
    if not item.title:
        return item.description
    if not item.description:
        return item.title
    return item.title + " " + item.description


@dataclass(frozen=True)
class ProjectDataset:
    name: str
    items: tuple[BacklogItem, ...]

    def __post_init__(self):
        seen = set()
        for it in self.items:
            if it.id in seen:
                raise ValidationError(f"duplicate item id {it.id!r}")
            seen.add(it.id)

    @property
    def n(self) -> int:
        return len(self.items)

    def by_id(self, item_id: str) -> BacklogItem:
        for it in self.items:
            if it.id == item_id:
                return it
        raise KeyError(item_id)

    def split_items(self, *splits: str) -> list[BacklogItem]:
        return [it for it in self.items if it.split in splits]

    def labeled_items(self, *splits: str) -> list[BacklogItem]:
        """Items with a story point, optionally restricted to given splits."""
        pool = self.split_items(*splits) if splits else list(self.items)
        return [it for it in pool if it.story_point is not None]


@dataclass(frozen=True)
class DatasetSummary:
    n: int
    min_sp: float
    max_sp: float
    split_counts: dict[str, int]


def summarize(dataset: ProjectDataset) -> DatasetSummary:
    """Item count, story point range over labeled items, and per-split counts."""
    sps = [it.story_point for it in dataset.items if it.story_point is not None]
    if not sps:
        raise ValidationError(f"project {dataset.name!r} has no items with story points")
    counts = {s: 0 for s in SPLITS}
    for it in dataset.items:
        counts[it.split] += 1
    return DatasetSummary(n=dataset.n, min_sp=min(sps), max_sp=max(sps), split_counts=counts)


def _parse_story_point(raw, item_id: str) -> float | None:
    if raw is None or raw == "":
        return None
    try:
        sp = float(raw)
    except (TypeError, ValueError):
        raise ValidationError(f"item {item_id!r}: story point {raw!r} is not a number") from None
    return sp


def _items_from_csv(path: Path) -> Iterator[BacklogItem]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise FormatError("empty file, expected a header row", line=1)
        missing = [f for f in FIELDS if f not in reader.fieldnames]
        if missing:
            raise FormatError(f"header is missing fields {missing}", line=1)
        for row in reader:
            if None in row:
                raise FormatError("row has more fields than the header", line=reader.line_num)
            if any(row.get(f) is None for f in FIELDS):
                raise FormatError("row has fewer fields than the header", line=reader.line_num)
            yield BacklogItem(
                id=row["id"],
                title=row["title"],
                description=row["description"],
                story_point=_parse_story_point(row["story_point"], row["id"]),
                split=row["split"],
            )


def _items_from_jsonl(path: Path) -> Iterator[BacklogItem]:
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise FormatError(f"invalid JSON: {exc.msg}", line=lineno) from None
            missing = [f for f in FIELDS if f not in obj]
            if missing:
                raise FormatError(f"object is missing keys {missing}", line=lineno)
            for key in ("id", "title", "description", "split"):
                if not isinstance(obj[key], str):
                    raise FormatError(f"field {key!r} must be a string", line=lineno)
            yield BacklogItem(
                id=obj["id"],
                title=obj["title"],
                description=obj["description"],
                story_point=_parse_story_point(obj["story_point"], obj["id"]),
                split=obj["split"],
            )


def load_project(path, format: str, name: str | None = None) -> ProjectDataset:
    """Load a backlog file, preserving file order and validating invariants."""
    path = Path(path)
    if format == FORMAT_CSV:
        items = tuple(_items_from_csv(path))
    elif format == FORMAT_JSONL:
        items = tuple(_items_from_jsonl(path))
    else:
        raise ValueError(f"unknown format {format!r}")
    return ProjectDataset(name=name or path.stem, items=items)


def guess_format(path) -> str:
    """Pick the format from the file extension (.jsonl/.ndjson vs anything else)."""
    suffix = Path(path).suffix.lower()
    return FORMAT_JSONL if suffix in (".jsonl", ".ndjson") else FORMAT_CSV


def save_project(dataset: ProjectDataset, path, format: str) -> None:
    """Write a backlog back to disk; round-trips every field exactly."""
    path = Path(path)
    if format == FORMAT_CSV:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(FIELDS)
            for it in dataset.items:
                sp = "" if it.story_point is None else repr(it.story_point)
                writer.writerow([it.id, it.title, it.description, sp, it.split])
    elif format == FORMAT_JSONL:
        with open(path, "w", encoding="utf-8") as fh:
            for it in dataset.items:
                fh.write(json.dumps({
                    "id": it.id,
                    "title": it.title,
                    "description": it.description,
                    "story_point": it.story_point,
                    "split": it.split,
                }, ensure_ascii=False) + "\n")
    else:
        raise ValueError(f"unknown format {format!r}")


def with_items(dataset: ProjectDataset, items: Iterable[BacklogItem]) -> ProjectDataset:
    return replace(dataset, items=tuple(items))
