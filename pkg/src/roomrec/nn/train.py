"""Plain SGD training with periodic validation and early stopping."""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigurationError, TrainingError
from ..store import RoomLabel
from .arch import CnnArch
from .model import ModelBundle, _as_batch, forward, init_params, loss_and_grads


@dataclass(frozen=True)
class TrainConfig:
    batch: int = 100
    lr: float = 0.001
    max_steps: int = 10000
    eval_every: int = 100
    patience: int = 10
    seed: int = 0
    dtype: type = np.float32  # 64-bit is used by the gradient-check suites

    def __post_init__(self):
        if self.batch < 1:
            raise ConfigurationError("batch must be >= 1")
        if self.lr <= 0:
            raise ConfigurationError("learning rate must be positive")


@dataclass
class TrainHistory:
    steps: list[int] = field(default_factory=list)
    train_loss: list[float] = field(default_factory=list)
    val_loss: list[float] = field(default_factory=list)
    val_acc: list[float] = field(default_factory=list)
    best_step: int = 0
    wall_seconds: float = 0.0

    def to_csv(self) -> str:
        lines = ["step,train_loss,val_loss,val_acc"]
        for s, tl, vl, va in zip(self.steps, self.train_loss, self.val_loss, self.val_acc):
            lines.append(f"{s},{tl:.6f},{vl:.6f},{va:.6f}")
        return "\n".join(lines) + "\n"


def evaluate(bundle: ModelBundle, x: np.ndarray, y: np.ndarray, batch: int = 500):
    """(mean cross-entropy, accuracy) on a held-out set, inference mode."""
    from .ops import softmax_xent

    x = bundle.normalize(x)
    losses, correct = [], 0
    for i in range(0, len(x), batch):
        logits, _ = forward(bundle.arch, bundle.params, x[i:i + batch])
        loss, _ = softmax_xent(logits, y[i:i + batch])
        losses.append(loss * len(logits))
        correct += int((logits.argmax(axis=1) == y[i:i + batch]).sum())
    return float(np.sum(losses) / len(x)), correct / len(x)


def confusion_matrix(bundle: ModelBundle, x: np.ndarray, y: np.ndarray,
                     batch: int = 500) -> np.ndarray:
    k = bundle.arch.num_classes
    cm = np.zeros((k, k), dtype=int)
    x = bundle.normalize(x)
    for i in range(0, len(x), batch):
        logits, _ = forward(bundle.arch, bundle.params, x[i:i + batch])
        pred = logits.argmax(axis=1)
        for t, p in zip(y[i:i + batch], pred):
            cm[int(t), int(p)] += 1
    return cm


def train(arch: CnnArch, train_x: np.ndarray, train_y: np.ndarray,
          val_x: np.ndarray, val_y: np.ndarray,
          labels: list[RoomLabel] | None = None,
          cfg: TrainConfig = TrainConfig(), version: int = 1):
    """SGD (param <- param - lr * grad) over random minibatches.

    Inputs are z-scored per cell with training-split statistics, which are
    stored in the returned bundle. Validation runs every `eval_every` steps;
    training stops at max_steps or after `patience` evaluations without a
    validation-loss improvement, and the best-validation snapshot is returned.
    """
    if len(train_x) == 0 or len(val_x) == 0:
        raise ConfigurationError("training and validation splits must be non-empty")
    if labels is None:
        labels = [RoomLabel(f"class-{i}", i) for i in range(arch.num_classes)]

    t0 = time.perf_counter()
    rng = np.random.default_rng(cfg.seed)
    params = init_params(arch, rng, dtype=cfg.dtype)

    xb = _as_batch(arch, train_x).astype(cfg.dtype)
    mean = xb.mean(axis=0, keepdims=True)
    std = np.maximum(xb.std(axis=0, keepdims=True), 1e-6)
    xb = (xb - mean) / std
    yb = np.asarray(train_y, dtype=int)

    bundle = ModelBundle(arch=arch, params=params, labels=labels,
                         version=version, norm_mean=mean, norm_std=std)
    history = TrainHistory()
    best_loss = np.inf
    best_params = {k: v.copy() for k, v in params.items()}
    bad_evals = 0
    running_loss = []

    for step in range(1, cfg.max_steps + 1):
        idx = rng.integers(0, len(xb), cfg.batch)
        loss, grads = loss_and_grads(arch, params, xb[idx], yb[idx], rng=rng)
        if not np.isfinite(loss):
            raise TrainingError(f"non-finite loss at step {step}")
        running_loss.append(loss)
        for name, g in grads.items():
            params[name] -= cfg.lr * g.astype(cfg.dtype, copy=False)

        if step % cfg.eval_every == 0:
            val_loss, val_acc = evaluate(bundle, val_x, val_y)
            history.steps.append(step)
            history.train_loss.append(float(np.mean(running_loss)))
            history.val_loss.append(val_loss)
            history.val_acc.append(val_acc)
            running_loss = []
            if val_loss < best_loss - 1e-6:
                best_loss = val_loss
                best_params = {k: v.copy() for k, v in params.items()}
                history.best_step = step
                bad_evals = 0
            else:
                bad_evals += 1
                if bad_evals >= cfg.patience:
                    break

    bundle.params = best_params
    history.wall_seconds = time.perf_counter() - t0
    return bundle, history
