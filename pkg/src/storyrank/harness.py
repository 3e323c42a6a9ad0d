"""Within-project experiment runner.

For each project the four models train on their respective regimes and
are scored on the test split against ground-truth story points:

* regression          - MAE training on train+validation items
* comparative-noval   - hinge training on pairs simulated from
                        train+validation, no early stopping
* comparative-val     - pairs from train only, early stopping on pairs
                        simulated from the validation split
* svm-comparative     - difference-feature SVM on train+validation pairs

Repeat r uses seed base_seed + r for both pair sampling and epoch
shuffling; validation pairs use an independent offset seed. Per-metric
means skip repeats whose correlation is undefined (zero-variance
predictions) and report how many were skipped. Reports can be rendered
as CSV or markdown with bundled reference numbers alongside.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

from . import dataset as ds
from . import models as md
from . import reference as ref
from .features import EmbeddingMatrix, embed_items, fit_hashed_tfidf, load_embeddings
from .metrics import UndefinedCorrelationError, mae, pearson, spearman
from .pairing import simulate_pairs

# keeps validation pair draws decorrelated from training pair draws
VAL_SEED_OFFSET = 1_000_003

FORMAT_CSV = "delimited-table"
FORMAT_MARKDOWN = "markdown"


@dataclass(frozen=True)
class ExperimentConfig:
    projects: tuple[str, ...]
    feature_source: str = "built-in-tfidf"  # or "embedding-files"
    models: tuple[str, ...] = ref.EXPERIMENT_MODELS
    k_values: tuple[int, ...] = (1,)
    repeats_regression: int = 20
    repeats_comparative: int = 10
    base_seed: int = 0
    tfidf_dim: int = 384
    embedding_files: dict[str, str] = field(default_factory=dict)
    train_overrides: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "projects", tuple(self.projects))
        object.__setattr__(self, "models", tuple(self.models))
        object.__setattr__(self, "k_values", tuple(self.k_values))
        unknown = [m for m in self.models if m not in ref.EXPERIMENT_MODELS]
        if unknown:
            raise ValueError(f"unknown models {unknown}; pick from {ref.EXPERIMENT_MODELS}")
        if self.feature_source not in ("built-in-tfidf", "embedding-files"):
            raise ValueError(f"unknown feature source {self.feature_source!r}")
        comparative = [m for m in self.models if m != ref.MODEL_REGRESSION]
        if comparative and not self.k_values:
            raise ValueError("k_values must be non-empty when a comparative model is selected")

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        with open(path, encoding="utf-8") as fh:
            return cls(**json.load(fh))


@dataclass(frozen=True)
class RepeatResult:
    repeat: int
    seed: int
    pearson: float | None
    spearman: float | None
    mae: float | None


def _mean(values: list[float | None]) -> float | None:
    defined = [v for v in values if v is not None]
    return sum(defined) / len(defined) if defined else None


@dataclass(frozen=True)
class CellResult:
    """Aggregate for one (project, model, k); k is None for regression."""

    project: str
    model: str
    k: int | None
    n_test: int
    repeats: tuple[RepeatResult, ...]

    @property
    def mean_pearson(self) -> float | None:
        return _mean([r.pearson for r in self.repeats])

    @property
    def mean_spearman(self) -> float | None:
        return _mean([r.spearman for r in self.repeats])

    @property
    def mean_mae(self) -> float | None:
        return _mean([r.mae for r in self.repeats])

    @property
    def undefined_count(self) -> int:
        return sum(1 for r in self.repeats if r.pearson is None or r.spearman is None)


@dataclass(frozen=True)
class ExperimentReport:
    cells: tuple[CellResult, ...]
    errors: tuple[dict, ...]
    config: dict

    def cells_for(self, model: str, k: int | None = None) -> list[CellResult]:
        return [c for c in self.cells if c.model == model and c.k == k]

    def overall_average(self, model: str, k: int | None, metric: str) -> float | None:
        """Across-project mean of the per-project repeat means."""
        values = [getattr(c, f"mean_{metric}") for c in self.cells_for(model, k)]
        return _mean(values)

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "errors": list(self.errors),
            "cells": [
                {
                    "project": c.project,
                    "model": c.model,
                    "k": c.k,
                    "n_test": c.n_test,
                    "repeats": [asdict(r) for r in c.repeats],
                }
                for c in self.cells
            ],
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "ExperimentReport":
        cells = tuple(
            CellResult(
                project=c["project"],
                model=c["model"],
                k=c["k"],
                n_test=c["n_test"],
                repeats=tuple(RepeatResult(**r) for r in c["repeats"]),
            )
            for c in obj["cells"]
        )
        return cls(cells=cells, errors=tuple(obj["errors"]), config=obj["config"])


def load_report(path) -> ExperimentReport:
    with open(path, encoding="utf-8") as fh:
        return ExperimentReport.from_dict(json.load(fh))


def _assert_split_hygiene(train_ids: set[str], test_ids: set[str], context: str) -> None:
    leaked = train_ids & test_ids
    if leaked:
        raise RuntimeError(f"{context}: test items leaked into training: {sorted(leaked)[:5]}")


def evaluate_once(dataset: ds.ProjectDataset, emb: EmbeddingMatrix, model: str,
                  k: int | None, seed: int, train_overrides: dict | None = None) -> RepeatResult:
    """Train one model once and score it on the project's test split."""
    overrides = dict(train_overrides or {})
    overrides["seed"] = seed
    test_items = dataset.labeled_items("test")
    if len(test_items) < 2:
        raise ValueError(f"project {dataset.name!r}: need at least 2 labeled test items")
    test_ids = [it.id for it in test_items]
    truth = [it.story_point for it in test_items]

    if model == ref.MODEL_REGRESSION:
        train_items = dataset.labeled_items("train", "validation")
        _assert_split_hygiene({it.id for it in train_items}, set(test_ids), dataset.name)
        cfg = md.default_config(md.LOSS_REGRESSION, **overrides)
        trained = md.train_regression(train_items, emb, cfg)
    elif model == ref.MODEL_COMPARATIVE_NOVAL:
        pool = dataset.labeled_items("train", "validation")
        pairs = simulate_pairs(pool, k, seed)
        _assert_split_hygiene({p.id_a for p in pairs.pairs} | {p.id_b for p in pairs.pairs},
                              set(test_ids), dataset.name)
        cfg = md.default_config(md.LOSS_COMPARATIVE, **overrides)
        trained = md.train_comparative(pairs, emb, None, cfg)
    elif model == ref.MODEL_COMPARATIVE_VAL:
        train_pool = dataset.labeled_items("train")
        val_pool = dataset.labeled_items("validation")
        pairs = simulate_pairs(train_pool, k, seed)
        val_pairs = simulate_pairs(val_pool, k, seed + VAL_SEED_OFFSET)
        _assert_split_hygiene({p.id_a for p in pairs.pairs} | {p.id_b for p in pairs.pairs},
                              set(test_ids), dataset.name)
        cfg = md.default_config(md.LOSS_COMPARATIVE, with_validation=True, **overrides)
        trained = md.train_comparative(pairs, emb, val_pairs, cfg)
    elif model == ref.MODEL_SVM_COMPARATIVE:
        pool = dataset.labeled_items("train", "validation")
        pairs = simulate_pairs(pool, k, seed)
        _assert_split_hygiene({p.id_a for p in pairs.pairs} | {p.id_b for p in pairs.pairs},
                              set(test_ids), dataset.name)
        cfg = md.default_config(md.LOSS_SVM, **overrides)
        trained = md.train_svm_comparative(pairs, emb, cfg)
    else:
        raise ValueError(f"unknown model {model!r}")

    scores = md.predict_scores(trained, emb, test_ids)
    try:
        rho = pearson(scores, truth)
    except UndefinedCorrelationError:
        rho = None
    try:
        rs = spearman(scores, truth)
    except UndefinedCorrelationError:
        rs = None
    err = mae(scores, truth) if model in ref.MODELS_WITH_MAE else None
    return RepeatResult(repeat=0, seed=seed, pearson=rho, spearman=rs, mae=err)


def _features_for(dataset: ds.ProjectDataset, config: ExperimentConfig, path: Path) -> EmbeddingMatrix:
    if config.feature_source == "embedding-files":
        emb_path = config.embedding_files.get(dataset.name)
        if emb_path is None:
            emb_path = path.with_name(f"{path.stem}.embeddings.jsonl")
        emb = load_embeddings(emb_path)
        missing = [it.id for it in dataset.items if it.id not in emb]
        if missing:
            raise ValueError(f"embedding file {emb_path} is missing ids {missing[:5]} "
                             f"({len(missing)} total)")
        return emb
    texts = {it.id: ds.item_text(it) for it in dataset.items}
    model = fit_hashed_tfidf(texts.values(), dim=config.tfidf_dim)
    return embed_items(model, texts)


def run_experiment(config: ExperimentConfig, projects: list[str] | None = None) -> ExperimentReport:
    """Run every selected (project, model, k) cell with seeded repeats.

    A project failing its preconditions is recorded under errors and
    skipped; the rest of the run proceeds.
    """
    cells: list[CellResult] = []
    errors: list[dict] = []
    for path_str in config.projects:
        path = Path(path_str)
        name = path.stem
        if projects is not None and name not in projects:
            continue
        try:
            dataset = ds.load_project(path, ds.guess_format(path))
            emb = _features_for(dataset, config, path)
            n_test = len(dataset.labeled_items("test"))
            for model in config.models:
                if model == ref.MODEL_REGRESSION:
                    plan = [(None, config.repeats_regression)]
                else:
                    plan = [(k, config.repeats_comparative) for k in config.k_values]
                for k, n_repeats in plan:
                    repeats = []
                    for r in range(n_repeats):
                        result = evaluate_once(dataset, emb, model, k,
                                               seed=config.base_seed + r,
                                               train_overrides=config.train_overrides)
                        repeats.append(RepeatResult(repeat=r, seed=result.seed,
                                                    pearson=result.pearson,
                                                    spearman=result.spearman,
                                                    mae=result.mae))
                    cells.append(CellResult(project=name, model=model, k=k,
                                            n_test=n_test, repeats=tuple(repeats)))
        except (OSError, ValueError, KeyError, RuntimeError) as exc:
            errors.append({"project": name, "error": str(exc)})
    cfg_dict = asdict(config)
    cfg_dict["projects"] = list(cfg_dict["projects"])
    cfg_dict["models"] = list(cfg_dict["models"])
    cfg_dict["k_values"] = list(cfg_dict["k_values"])
    return ExperimentReport(cells=tuple(cells), errors=tuple(errors), config=cfg_dict)


def sweep_k(config: ExperimentConfig, projects: list[str] | None = None):
    """Average test Spearman per (comparative model, k) for curve plotting.

    Returns (report, curves) where curves maps model name to a list of
    (k, mean r_s) points, the mean taken across projects of per-project
    repeat means.
    """
    comparative = tuple(m for m in config.models if m != ref.MODEL_REGRESSION)
    if not comparative:
        raise ValueError("sweep_k needs at least one comparative model selected")
    report = run_experiment(
        ExperimentConfig(**{**asdict(config), "models": comparative}), projects
    )
    curves = {
        model: [(k, report.overall_average(model, k, "spearman")) for k in config.k_values]
        for model in comparative
    }
    return report, curves


def _fmt(value: float | None, digits: int = 4) -> str:
    return "" if value is None else f"{value:.{digits}f}"


def emit_report(report: ExperimentReport, format: str, path=None,
                include_reference: bool = True) -> str:
    """Render a report as CSV or markdown; optionally write it to path."""
    if not report.cells:
        raise ValueError("report is empty, nothing to emit")
    if format == FORMAT_CSV:
        text = _emit_csv(report, include_reference)
    elif format == FORMAT_MARKDOWN:
        text = _emit_markdown(report, include_reference)
    else:
        raise ValueError(f"unknown report format {format!r}")
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text


def _model_groups(report: ExperimentReport) -> list[tuple[str, int | None]]:
    groups = []
    for c in report.cells:
        if (c.model, c.k) not in groups:
            groups.append((c.model, c.k))
    return groups


def _emit_csv(report: ExperimentReport, include_reference: bool) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    header = ["project", "model", "k", "n_test", "repeats", "undefined",
              "pearson", "spearman", "mae"]
    if include_reference:
        header += ["reference_pearson", "reference_spearman", "reference_mae"]
    writer.writerow(header)

    def reference_cols(model: str, k: int | None, project: str) -> list[str]:
        if not include_reference or (k is not None and k != 1):
            return ["", "", ""]
        values = ref.reference_for(model, project)
        if values is None:
            return ["", "", ""]
        return [_fmt(values[0]), _fmt(values[1]), _fmt(values[2])]

    for c in report.cells:
        row = [c.project, c.model, "" if c.k is None else c.k, c.n_test,
               len(c.repeats), c.undefined_count,
               _fmt(c.mean_pearson), _fmt(c.mean_spearman), _fmt(c.mean_mae)]
        if include_reference:
            row += reference_cols(c.model, c.k, c.project)
        writer.writerow(row)
    for model, k in _model_groups(report):
        row = ["average", model, "" if k is None else k, "",
               "", "",
               _fmt(report.overall_average(model, k, "pearson")),
               _fmt(report.overall_average(model, k, "spearman")),
               _fmt(report.overall_average(model, k, "mae"))]
        if include_reference:
            row += reference_cols(model, k, "average")
        writer.writerow(row)
    return buf.getvalue()


def _emit_markdown(report: ExperimentReport, include_reference: bool) -> str:
    groups = _model_groups(report)
    projects = []
    for c in report.cells:
        if c.project not in projects:
            projects.append(c.project)

    def label(model: str, k: int | None) -> str:
        name = ref.DISPLAY_NAMES.get(model, model)
        return name if k is None else f"{name} k={k}"

    lines = ["# Within-project results", ""]
    lines.append("Scores from comparative models are unitless, so MAE applies "
                 "to regression only. Spearman uses average ranks for ties. "
                 "Means skip repeats with undefined correlations.")
    lines.append("")

    header = ["Project"]
    for model, k in groups:
        header += [f"{label(model, k)} ρ", f"{label(model, k)} r_s"]
        if model in ref.MODELS_WITH_MAE:
            header.append(f"{label(model, k)} MAE")
    lines.append("| " + " | ".join(header) + " |")
    lines.append("|" + "---|" * len(header))

    by_key = {(c.project, c.model, c.k): c for c in report.cells}
    for project in projects + ["average"]:
        row = [project]
        for model, k in groups:
            if project == "average":
                rho = report.overall_average(model, k, "pearson")
                rs = report.overall_average(model, k, "spearman")
                err = report.overall_average(model, k, "mae")
            else:
                cell = by_key.get((project, model, k))
                rho = cell.mean_pearson if cell else None
                rs = cell.mean_spearman if cell else None
                err = cell.mean_mae if cell else None
            row += [_fmt(rho), _fmt(rs)]
            if model in ref.MODELS_WITH_MAE:
                row.append(_fmt(err))
        lines.append("| " + " | ".join(row) + " |")
    lines.append("")

    if include_reference:
        with_refs = [(m, k) for m, k in groups
                     if ref.reference_for(m, "average") is not None and k in (None, 1)]
        if with_refs:
            lines.append("## Reference comparison")
            lines.append("")
            lines.append("Previously reported benchmark values for the same models "
                         "(16-project averages) next to this run's averages.")
            lines.append("")
            lines.append("| Model | computed ρ | computed r_s | computed MAE | "
                         "reference ρ | reference r_s | reference MAE |")
            lines.append("|---|---|---|---|---|---|---|")
            for model, k in with_refs:
                ref_vals = ref.reference_for(model, "average")
                lines.append("| " + " | ".join([
                    label(model, k),
                    _fmt(report.overall_average(model, k, "pearson")),
                    _fmt(report.overall_average(model, k, "spearman")),
                    _fmt(report.overall_average(model, k, "mae")),
                    _fmt(ref_vals[0]), _fmt(ref_vals[1]), _fmt(ref_vals[2]),
                ]) + " |")
            lines.append("")
        if (ref.MODEL_COMPARATIVE_NOVAL, 1) in groups:
            avg_rs = report.overall_average(ref.MODEL_COMPARATIVE_NOVAL, 1, "spearman")
            n_proj = len(report.cells_for(ref.MODEL_COMPARATIVE_NOVAL, 1))
            band = ref.REFERENCE_AVERAGE_BAND
            target = ref.REFERENCE_AVERAGE_SPEARMAN
            if avg_rs is not None:
                verdict = "within" if abs(avg_rs - target) <= band else "outside"
                scope = "" if n_proj == len(ref.PROJECT_NAMES) else \
                    f" (computed on {n_proj} of {len(ref.PROJECT_NAMES)} benchmark projects)"
                lines.append(
                    f"Overall average r_s for {label(ref.MODEL_COMPARATIVE_NOVAL, 1)}: "
                    f"{avg_rs:.4f}, {verdict} the reference benchmark average "
                    f"{target:.2f} ± {band:.2f}{scope}. Exact replication requires the "
                    f"original sentence-embedding files; with built-in text features "
                    f"this comparison is informational.")
                lines.append("")

    if report.errors:
        lines.append("## Errors")
        lines.append("")
        for err in report.errors:
            lines.append(f"- {err['project']}: {err['error']}")
        lines.append("")
    return "\n".join(lines)


def emit_sweep(curves: dict, path=None) -> str:
    """Render sweep_k curve data as a delimited table (model, k, mean r_s)."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["model", "k", "spearman"])
    for model, points in curves.items():
        for k, rs in points:
            writer.writerow([model, k, _fmt(rs)])
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text
