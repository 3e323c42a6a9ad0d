"""Linear scoring head and its three training procedures.

The head maps an item's feature vector x to an effort score w.x + b.
Training variants:

* hinge-comparative: minibatch SGD/Adam on mean hinge loss over pairwise
  score differences. The bias cancels in the difference, so its gradient
  is identically zero and it never moves from initialization.
* mae-regression: mean absolute error against story points.
* hinge-svm-difference: linear classifier on difference features
  d = x_a - x_b with hinge loss and an L2 penalty, bias fixed at zero.
  At inference the per-item score is w.x, since w.(x_a - x_b) factors.

All objectives are convex in (w, b) for fixed features, so heads start
at zero for reproducibility. Subgradients at kinks are taken as zero.
Epoch shuffling uses NumPy's PCG64 seeded from the config.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from .dataset import BacklogItem
from .features import EmbeddingMatrix
from .optim import SGD, Adam
from .pairing import ComparativePair, PairSet

LOSS_COMPARATIVE = "hinge-comparative"
LOSS_REGRESSION = "mae-regression"
LOSS_SVM = "hinge-svm-difference"


@dataclass(frozen=True)
class ScoringHead:
    w: np.ndarray
    b: float

    @property
    def dim(self) -> int:
        return int(self.w.size)


def score(head: ScoringHead, x) -> float:
    """Effort score w.x + b for one item."""
    x = np.asarray(x, dtype=np.float64)
    if x.size != head.w.size:
        raise ValueError(f"dimension mismatch: head is {head.w.size}, input is {x.size}")
    return float(head.w @ x + head.b)


def score_many(head: ScoringHead, X: np.ndarray) -> np.ndarray:
    if X.shape[1] != head.w.size:
        raise ValueError(f"dimension mismatch: head is {head.w.size}, input is {X.shape[1]}")
    return X @ head.w + head.b


def comparative_forward(head: ScoringHead, x_a, x_b) -> float:
    """Predicted pairwise relationship: score(x_a) - score(x_b); bias cancels."""
    return score(head, x_a) - score(head, x_b)


def hinge_loss(y: int, y_hat: float) -> float:
    """max(0, 1 - y*y_hat); zero iff the direction is right with margin >= 1."""
    if y not in (+1, -1):
        raise ValueError(f"judgment must be +1 or -1, got {y}")
    return max(0.0, 1.0 - y * y_hat)


def comparative_batch(w: np.ndarray, d: np.ndarray, y: np.ndarray, l2: float = 0.0):
    """Mean hinge loss over difference features and its subgradient in w.

    d rows are x_a - x_b; non-zero l2 adds the penalty l2*||w||^2 used by
    the SVM-on-differences baseline.
    """
    margins = 1.0 - y * (d @ w)
    active = margins > 0.0
    loss = float(np.where(active, margins, 0.0).mean())
    grad = -(d * (y * active)[:, None]).sum(axis=0) / y.size
    if l2:
        loss += l2 * float(w @ w)
        grad = grad + 2.0 * l2 * w
    return loss, grad


def regression_batch(w: np.ndarray, b: float, X: np.ndarray, sp: np.ndarray):
    """Mean absolute error and its subgradients in (w, b)."""
    residual = sp - (X @ w + b)
    loss = float(np.abs(residual).mean())
    s = np.sign(residual)
    grad_w = -(X * s[:, None]).mean(axis=0)
    grad_b = -float(s.mean())
    return loss, grad_w, grad_b


@dataclass(frozen=True)
class TrainConfig:
    loss: str
    max_epochs: int
    lr_start: float = 1e-3
    lr_end: float = 1e-6
    batch_size: int = 32
    optimizer: str = "adam"
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_epsilon: float = 1e-8
    l2_penalty: float = 0.0
    patience: int | None = None
    seed: int = 0

    def __post_init__(self):
        if self.loss not in (LOSS_COMPARATIVE, LOSS_REGRESSION, LOSS_SVM):
            raise ValueError(f"unknown loss {self.loss!r}")
        if self.max_epochs < 0:
            raise ValueError("max_epochs must be >= 0")
        if not self.lr_end <= self.lr_start:
            raise ValueError(f"lr_end {self.lr_end} must not exceed lr_start {self.lr_start}")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.optimizer not in ("adam", "sgd"):
            raise ValueError(f"unknown optimizer {self.optimizer!r}")
        if self.l2_penalty < 0:
            raise ValueError("l2_penalty must be >= 0")
        if self.patience is not None and self.patience < 1:
            raise ValueError("patience must be >= 1")


def default_config(loss: str, with_validation: bool = False, **overrides) -> TrainConfig:
    """Stock hyperparameters: 600 epochs for regression, 100/300 for
    comparative training without/with validation-based early stopping,
    learning rate decayed from 1e-3 to 1e-6, Adam, batch 32."""
    if loss == LOSS_REGRESSION:
        cfg = TrainConfig(loss=loss, max_epochs=600)
    elif loss == LOSS_COMPARATIVE and with_validation:
        cfg = TrainConfig(loss=loss, max_epochs=300, patience=20)
    elif loss == LOSS_COMPARATIVE:
        cfg = TrainConfig(loss=loss, max_epochs=100)
    elif loss == LOSS_SVM:
        cfg = TrainConfig(loss=loss, max_epochs=100, l2_penalty=1e-4)
    else:
        raise ValueError(f"unknown loss {loss!r}")
    return replace(cfg, **overrides) if overrides else cfg


def lr_for_epoch(config: TrainConfig, epoch: int) -> float:
    """Per-epoch exponential interpolation from lr_start down to lr_end."""
    if config.max_epochs <= 1:
        return config.lr_start
    frac = epoch / (config.max_epochs - 1)
    return config.lr_start * (config.lr_end / config.lr_start) ** frac


@dataclass(frozen=True)
class TrainingHistory:
    train_loss: tuple[float, ...]
    val_loss: tuple[float, ...] | None = None

    def __len__(self) -> int:
        return len(self.train_loss)


@dataclass(frozen=True)
class TrainedModel:
    head: ScoringHead
    config: TrainConfig
    history: TrainingHistory
    best_epoch: int

    def to_dict(self) -> dict:
        return {
            "dim": self.head.dim,
            "w": [float(v) for v in self.head.w],
            "b": self.head.b,
            "config": asdict(self.config),
            "best_epoch": self.best_epoch,
            "history": {
                "train_loss": list(self.history.train_loss),
                "val_loss": None if self.history.val_loss is None else list(self.history.val_loss),
            },
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "TrainedModel":
        head = ScoringHead(w=np.asarray(obj["w"], dtype=np.float64), b=float(obj["b"]))
        val = obj["history"]["val_loss"]
        return cls(
            head=head,
            config=TrainConfig(**obj["config"]),
            history=TrainingHistory(
                train_loss=tuple(obj["history"]["train_loss"]),
                val_loss=None if val is None else tuple(val),
            ),
            best_epoch=int(obj["best_epoch"]),
        )


def save_model(model: TrainedModel, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model.to_dict(), fh)


def load_model(path) -> TrainedModel:
    with open(Path(path), encoding="utf-8") as fh:
        return TrainedModel.from_dict(json.load(fh))


def _make_optimizer(config: TrainConfig, params: list[np.ndarray]):
    if config.optimizer == "adam":
        return Adam(params, beta1=config.adam_beta1, beta2=config.adam_beta2,
                    epsilon=config.adam_epsilon)
    return SGD(params)


def _pair_features(pairs: Sequence[ComparativePair], emb: EmbeddingMatrix):
    if not pairs:
        raise ValueError("cannot train on an empty pair set")
    xa = emb.stack(p.id_a for p in pairs)
    xb = emb.stack(p.id_b for p in pairs)
    y = np.asarray([p.y for p in pairs], dtype=np.float64)
    return xa - xb, y


def _pairs_of(pairs) -> tuple[ComparativePair, ...]:
    return pairs.pairs if isinstance(pairs, PairSet) else tuple(pairs)


def train_comparative(pairs, emb: EmbeddingMatrix, val_pairs=None,
                      config: TrainConfig | None = None) -> TrainedModel:
    """Minibatch training on pairwise hinge loss.

    With early stopping configured, mean hinge loss on val_pairs is
    monitored each epoch; training stops after `patience` epochs without
    improvement and the best-epoch head is restored.
    """
    if config is None:
        config = default_config(LOSS_COMPARATIVE, with_validation=val_pairs is not None)
    if config.loss != LOSS_COMPARATIVE:
        raise ValueError(f"train_comparative requires loss {LOSS_COMPARATIVE!r}, got {config.loss!r}")
    if config.patience is not None and val_pairs is None:
        raise ValueError("early stopping requires validation pairs")
    d, y = _pair_features(_pairs_of(pairs), emb)
    d_val = y_val = None
    if val_pairs is not None:
        d_val, y_val = _pair_features(_pairs_of(val_pairs), emb)

    w = np.zeros(emb.dim, dtype=np.float64)
    b = np.zeros(1, dtype=np.float64)
    params = [w, b]
    opt = _make_optimizer(config, params)
    rng = np.random.default_rng(config.seed)
    zero_b_grad = np.zeros(1, dtype=np.float64)

    train_losses: list[float] = []
    val_losses: list[float] = []
    best_val = np.inf
    best_epoch = -1
    best_w = w.copy()
    for epoch in range(config.max_epochs):
        lr = lr_for_epoch(config, epoch)
        epoch_loss = 0.0
        for idx in _epoch_batches(y.size, config.batch_size, rng):
            loss, grad_w = comparative_batch(w, d[idx], y[idx])
            opt.step(params, [grad_w, zero_b_grad], lr)
            epoch_loss += loss * idx.size
        train_losses.append(epoch_loss / y.size)
        if d_val is not None:
            val_loss, _ = comparative_batch(w, d_val, y_val)
            val_losses.append(val_loss)
            if val_loss < best_val:
                best_val = val_loss
                best_epoch = epoch
                best_w = w.copy()
            if config.patience is not None and epoch - best_epoch >= config.patience:
                break

    if d_val is not None:
        # best_epoch tracks the best validation epoch; restore only under
        # early stopping
        if config.patience is not None and best_epoch >= 0:
            w = best_w
    elif train_losses:
        best_epoch = int(np.argmin(train_losses))
    head = ScoringHead(w=w, b=float(b[0]))
    history = TrainingHistory(train_loss=tuple(train_losses),
                              val_loss=tuple(val_losses) if d_val is not None else None)
    return TrainedModel(head=head, config=config, history=history, best_epoch=best_epoch)


def train_regression(items: Sequence[BacklogItem], emb: EmbeddingMatrix,
                     config: TrainConfig | None = None) -> TrainedModel:
    """Minibatch training on mean absolute error against story points."""
    if config is None:
        config = default_config(LOSS_REGRESSION)
    if config.loss != LOSS_REGRESSION:
        raise ValueError(f"train_regression requires loss {LOSS_REGRESSION!r}, got {config.loss!r}")
    if not items:
        raise ValueError("cannot train on an empty item list")
    unlabeled = [it.id for it in items if it.story_point is None]
    if unlabeled:
        raise ValueError(f"regression training requires story points; missing on {unlabeled[:5]}")
    X = emb.stack(it.id for it in items)
    sp = np.asarray([it.story_point for it in items], dtype=np.float64)

    w = np.zeros(emb.dim, dtype=np.float64)
    b = np.zeros(1, dtype=np.float64)
    params = [w, b]
    opt = _make_optimizer(config, params)
    rng = np.random.default_rng(config.seed)

    train_losses: list[float] = []
    for epoch in range(config.max_epochs):
        lr = lr_for_epoch(config, epoch)
        epoch_loss = 0.0
        for idx in _epoch_batches(sp.size, config.batch_size, rng):
            loss, grad_w, grad_b = regression_batch(w, float(b[0]), X[idx], sp[idx])
            opt.step(params, [grad_w, np.asarray([grad_b])], lr)
            epoch_loss += loss * idx.size
        train_losses.append(epoch_loss / sp.size)

    best_epoch = int(np.argmin(train_losses)) if train_losses else -1
    head = ScoringHead(w=w, b=float(b[0]))
    return TrainedModel(head=head, config=config,
                        history=TrainingHistory(train_loss=tuple(train_losses)),
                        best_epoch=best_epoch)


def train_svm_comparative(pairs, emb: EmbeddingMatrix,
                          config: TrainConfig | None = None) -> TrainedModel:
    """Linear classifier on pair difference features, hinge + L2, zero bias."""
    if config is None:
        config = default_config(LOSS_SVM)
    if config.loss != LOSS_SVM:
        raise ValueError(f"train_svm_comparative requires loss {LOSS_SVM!r}, got {config.loss!r}")
    d, y = _pair_features(_pairs_of(pairs), emb)

    w = np.zeros(emb.dim, dtype=np.float64)
    params = [w]
    opt = _make_optimizer(config, params)
    rng = np.random.default_rng(config.seed)

    train_losses: list[float] = []
    for epoch in range(config.max_epochs):
        lr = lr_for_epoch(config, epoch)
        epoch_loss = 0.0
        for idx in _epoch_batches(y.size, config.batch_size, rng):
            loss, grad_w = comparative_batch(w, d[idx], y[idx], l2=config.l2_penalty)
            opt.step(params, [grad_w], lr)
            epoch_loss += loss * idx.size
        train_losses.append(epoch_loss / y.size)

    best_epoch = int(np.argmin(train_losses)) if train_losses else -1
    head = ScoringHead(w=w, b=0.0)
    return TrainedModel(head=head, config=config,
                        history=TrainingHistory(train_loss=tuple(train_losses)),
                        best_epoch=best_epoch)


def predict_scores(model: TrainedModel, emb: EmbeddingMatrix, ids: Sequence[str]) -> list[float]:
    """Score each id in order."""
    return [score(model.head, emb.get(i)) for i in ids]


def _epoch_batches(n: int, batch_size: int, rng: np.random.Generator):
    perm = rng.permutation(n)
    for start in range(0, n, batch_size):
        yield perm[start : start + batch_size]
