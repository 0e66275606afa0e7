"""Probability-of-mental classifier: a logistic head, optionally with one
tanh hidden layer, trained by mini-batch gradient descent.

Training follows a fixed schedule: stratified 80/20 train/dev split, the
learning rate divided by a drop factor partway through, weight decay on the
weight matrices (never biases), and the epoch snapshot with the best dev
accuracy returned as the winner (ties keep the earlier epoch).
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .labels import MENTAL, PHYSICAL

log = logging.getLogger(__name__)

CHECKPOINT_FORMAT = "lexloop-classifier/1"


@dataclass
class ClassifierModel:
    input_dim: int
    hidden_dim: int  # 0 = plain logistic head
    params: dict[str, np.ndarray]
    threshold: float = 0.5

    def __post_init__(self):
        if not 0.0 < self.threshold < 1.0:
            raise ValueError(f"threshold must be in (0,1), got {self.threshold}")
        for name, value in self.params.items():
            if not np.all(np.isfinite(value)):
                raise ValueError(f"non-finite values in parameter {name!r}")

    def copy(self) -> "ClassifierModel":
        return ClassifierModel(
            input_dim=self.input_dim,
            hidden_dim=self.hidden_dim,
            params={k: v.copy() for k, v in self.params.items()},
            threshold=self.threshold,
        )


@dataclass
class TrainConfig:
    epochs: int = 20
    lr: float = 0.1
    lr_drop_epoch: int = 10
    lr_drop_factor: float = 10.0
    batch_size: int = 32
    weight_decay: float = 0.001
    dev_fraction: float = 0.2
    seed: int = 0
    hidden_dim: int = 0
    dropout_prob: float = 0.3  # only applies when hidden_dim > 0

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if not 0.0 < self.dev_fraction < 1.0:
            raise ValueError("dev_fraction must be in (0,1)")
        if self.lr_drop_epoch > self.epochs:
            raise ValueError("lr_drop_epoch must be <= epochs")
        if self.lr <= 0:
            raise ValueError("lr must be positive")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.weight_decay < 0:
            raise ValueError("weight_decay must be nonnegative")
        if not 0.0 <= self.dropout_prob < 1.0:
            raise ValueError("dropout_prob must be in [0,1)")


@dataclass(frozen=True)
class LabeledExample:
    word: str
    features: np.ndarray
    label: int

    def __post_init__(self):
        if self.label not in (MENTAL, PHYSICAL):
            raise ValueError(f"label must be 0 or 1, got {self.label}")


@dataclass
class EpochStats:
    epoch: int
    train_loss: float
    dev_accuracy: float


@dataclass
class TrainHistory:
    epochs: list[EpochStats] = field(default_factory=list)
    best_epoch: int = 0
    train_size: int = 0
    dev_size: int = 0
    dev_fallback: bool = False  # dev set was empty, accuracy measured on train


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z, dtype=np.float64)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def init_model(
    input_dim: int, hidden_dim: int, rng: np.random.Generator, threshold: float = 0.5
) -> ClassifierModel:
    """Fresh parameters: zeros for the logistic head, scaled normal draws for
    the hidden variant (symmetry breaking)."""
    if hidden_dim == 0:
        params = {"w_out": np.zeros(input_dim), "b_out": np.zeros(1)}
    else:
        params = {
            "w_hidden": rng.normal(0.0, 1.0 / np.sqrt(input_dim), size=(hidden_dim, input_dim)),
            "b_hidden": np.zeros(hidden_dim),
            "w_out": rng.normal(0.0, 1.0 / np.sqrt(hidden_dim), size=hidden_dim),
            "b_out": np.zeros(1),
        }
    return ClassifierModel(input_dim, hidden_dim, params, threshold)


def _logits(
    model: ClassifierModel, X: np.ndarray, dropout_mask: np.ndarray | None = None,
    keep_prob: float = 1.0,
) -> tuple[np.ndarray, np.ndarray | None, np.ndarray | None]:
    """Returns (logits, pre-dropout hidden activations, post-dropout hidden)."""
    p = model.params
    if model.hidden_dim == 0:
        return X @ p["w_out"] + p["b_out"][0], None, None
    hidden_raw = np.tanh(X @ p["w_hidden"].T + p["b_hidden"])
    hidden = hidden_raw
    if dropout_mask is not None:
        hidden = hidden_raw * dropout_mask / keep_prob
    return hidden @ p["w_out"] + p["b_out"][0], hidden_raw, hidden


def forward_batch(model: ClassifierModel, X: np.ndarray) -> np.ndarray:
    """Probabilities for a feature matrix; dropout is never applied here."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != model.input_dim:
        raise ValueError(f"feature matrix shape {X.shape} does not match input_dim {model.input_dim}")
    z, _, _ = _logits(model, X)
    return _sigmoid(z)


def forward(model: ClassifierModel, x: np.ndarray) -> float:
    """Probability that a single feature vector is mental."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (model.input_dim,):
        raise ValueError(f"feature shape {x.shape} does not match input_dim {model.input_dim}")
    return float(forward_batch(model, x[None, :])[0])


def predict_class(model: ClassifierModel, x: np.ndarray) -> int:
    """MENTAL iff the probability strictly exceeds the threshold."""
    return MENTAL if forward(model, x) > model.threshold else PHYSICAL


def _batch_arrays(batch: Sequence[LabeledExample]) -> tuple[np.ndarray, np.ndarray]:
    X = np.stack([np.asarray(ex.features, dtype=np.float64) for ex in batch])
    y = np.array([ex.label for ex in batch], dtype=np.float64)
    return X, y


def loss_and_gradient(
    model: ClassifierModel,
    batch: Sequence[LabeledExample],
    weight_decay: float = 0.0,
    dropout_mask: np.ndarray | None = None,
    keep_prob: float = 1.0,
) -> tuple[float, dict[str, np.ndarray]]:
    """Mean binary cross-entropy plus 0.5*weight_decay*||W||^2 and its exact
    gradient (same keys and shapes as model.params). Biases are not decayed.

    With dropout_mask=None the loss is deterministic; the training loop passes
    a sampled mask per batch for the hidden variant.
    """
    if not batch:
        raise ValueError("batch must be non-empty")
    X, y = _batch_arrays(batch)
    n = len(batch)
    p = model.params
    z, hidden_raw, hidden = _logits(model, X, dropout_mask, keep_prob)
    probs = _sigmoid(z)
    # BCE via the softplus form: log(1+e^z) - y*z, stable at large |z|
    loss = float(np.mean(np.logaddexp(0.0, z) - y * z))
    dz = (probs - y) / n

    grads: dict[str, np.ndarray] = {}
    if model.hidden_dim == 0:
        grads["w_out"] = X.T @ dz + weight_decay * p["w_out"]
        grads["b_out"] = np.array([np.sum(dz)])
        loss += 0.5 * weight_decay * float(np.sum(p["w_out"] ** 2))
    else:
        grads["w_out"] = hidden.T @ dz + weight_decay * p["w_out"]
        grads["b_out"] = np.array([np.sum(dz)])
        d_hidden = np.outer(dz, p["w_out"])
        if dropout_mask is not None:
            d_hidden = d_hidden * dropout_mask / keep_prob
        d_act = d_hidden * (1.0 - hidden_raw**2)
        grads["w_hidden"] = d_act.T @ X + weight_decay * p["w_hidden"]
        grads["b_hidden"] = d_act.sum(axis=0)
        loss += 0.5 * weight_decay * float(
            np.sum(p["w_out"] ** 2) + np.sum(p["w_hidden"] ** 2)
        )
    return loss, grads


def _stratified_split(
    data: Sequence[LabeledExample], dev_fraction: float, rng: np.random.Generator
) -> tuple[list[LabeledExample], list[LabeledExample]]:
    """Per-class shuffle and split. A class with fewer than 2 members goes
    entirely to train so dev never eats a singleton class."""
    train: list[LabeledExample] = []
    dev: list[LabeledExample] = []
    for cls in (PHYSICAL, MENTAL):
        members = [ex for ex in data if ex.label == cls]
        if len(members) < 2:
            train.extend(members)
            continue
        order = rng.permutation(len(members))
        n_dev = max(1, int(len(members) * dev_fraction + 0.5))
        for pos, idx in enumerate(order):
            (dev if pos < n_dev else train).append(members[idx])
    return train, dev


def _accuracy(model: ClassifierModel, examples: Sequence[LabeledExample]) -> float:
    X, y = _batch_arrays(examples)
    preds = (forward_batch(model, X) > model.threshold).astype(np.float64)
    return float(np.mean(preds == y))


def train(
    data: Sequence[LabeledExample],
    cfg: TrainConfig,
    warm_from: ClassifierModel | None = None,
) -> tuple[ClassifierModel, TrainHistory]:
    """Mini-batch gradient descent with an lr drop and dev-accuracy snapshots.

    Deterministic: (data, cfg.seed, warm_from) fully determine the winner.
    Raises ValueError when the data does not contain both classes.
    """
    labels = {ex.label for ex in data}
    if labels != {MENTAL, PHYSICAL}:
        raise ValueError("training data needs both classes")

    rng = np.random.default_rng(cfg.seed)
    train_set, dev_set = _stratified_split(data, cfg.dev_fraction, rng)
    input_dim = data[0].features.shape[0]
    if warm_from is not None:
        if warm_from.input_dim != input_dim or warm_from.hidden_dim != cfg.hidden_dim:
            raise ValueError("warm-start model shape does not match the data/config")
        model = warm_from.copy()
        init_model(input_dim, cfg.hidden_dim, rng)  # keep the rng stream aligned
    else:
        model = init_model(input_dim, cfg.hidden_dim, rng)

    history = TrainHistory(train_size=len(train_set), dev_size=len(dev_set))
    if not dev_set:
        history.dev_fallback = True
        log.warning("dev split is empty; selecting epochs by train accuracy")
    eval_set = dev_set if dev_set else train_set

    keep_prob = 1.0 - cfg.dropout_prob
    use_dropout = cfg.hidden_dim > 0 and cfg.dropout_prob > 0.0
    best: ClassifierModel | None = None
    best_acc = -1.0

    for epoch in range(cfg.epochs):
        lr = cfg.lr / cfg.lr_drop_factor if epoch >= cfg.lr_drop_epoch else cfg.lr
        order = rng.permutation(len(train_set))
        total_loss = 0.0
        for start in range(0, len(train_set), cfg.batch_size):
            batch = [train_set[i] for i in order[start : start + cfg.batch_size]]
            mask = None
            if use_dropout:
                mask = (
                    rng.random((len(batch), cfg.hidden_dim)) >= cfg.dropout_prob
                ).astype(np.float64)
            loss, grads = loss_and_gradient(
                model, batch, cfg.weight_decay, dropout_mask=mask, keep_prob=keep_prob
            )
            total_loss += loss * len(batch)
            for name, grad in grads.items():
                model.params[name] -= lr * grad
        dev_acc = _accuracy(model, eval_set)
        history.epochs.append(
            EpochStats(epoch=epoch, train_loss=total_loss / len(train_set), dev_accuracy=dev_acc)
        )
        if dev_acc > best_acc:
            best_acc = dev_acc
            best = model.copy()
            history.best_epoch = epoch

    assert best is not None
    return best, history


def save_model(model: ClassifierModel, path: str | Path) -> None:
    """JSON checkpoint; float repr round-trips doubles exactly."""
    payload = {
        "format": CHECKPOINT_FORMAT,
        "input_dim": model.input_dim,
        "hidden_dim": model.hidden_dim,
        "threshold": model.threshold,
        "params": {k: v.tolist() for k, v in model.params.items()},
    }
    Path(path).write_text(json.dumps(payload, sort_keys=True), encoding="utf-8")


def load_model(path: str | Path) -> ClassifierModel:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    if payload.get("format") != CHECKPOINT_FORMAT:
        raise ValueError(f"unsupported checkpoint format {payload.get('format')!r}")
    params = {k: np.array(v, dtype=np.float64) for k, v in payload["params"].items()}
    return ClassifierModel(
        input_dim=payload["input_dim"],
        hidden_dim=payload["hidden_dim"],
        params=params,
        threshold=payload["threshold"],
    )
