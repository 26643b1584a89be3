"""Multiclass SVM via one-vs-one SMO, for the MFCC baselines.

Kernels: RBF (default gamma = 1/num_features) or linear; C defaults to 1.
Each binary machine is trained with sequential minimal optimization to a KKT
tolerance of 1e-3; multiclass prediction is majority voting with ties broken
toward the lower class index.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, ShapeError

KKT_TOL = 1e-3


@dataclass(frozen=True)
class KernelConfig:
    kind: str = "rbf"  # "rbf" or "linear"
    gamma: float | None = None  # None: 1/num_features
    C: float = 1.0

    def __post_init__(self):
        if self.kind not in ("rbf", "linear"):
            raise ConfigurationError(f"unknown kernel {self.kind!r}")
        if self.C <= 0:
            raise ConfigurationError("C must be positive")


def kernel_matrix(a: np.ndarray, b: np.ndarray, cfg: KernelConfig) -> np.ndarray:
    if cfg.kind == "linear":
        return a @ b.T
    gamma = cfg.gamma if cfg.gamma is not None else 1.0 / a.shape[1]
    sq = (
        np.sum(a * a, axis=1)[:, None]
        - 2.0 * (a @ b.T)
        + np.sum(b * b, axis=1)[None, :]
    )
    return np.exp(-gamma * np.maximum(sq, 0.0))


@dataclass
class BinaryMachine:
    """One pairwise machine: f(x) = sum a_i y_i K(sv_i, x) + b."""

    support_vectors: np.ndarray
    sv_labels: np.ndarray  # +/-1
    alphas: np.ndarray
    bias: float
    class_pair: tuple[int, int]  # (negative class, positive class)

    def decision(self, x: np.ndarray, cfg: KernelConfig) -> np.ndarray:
        k = kernel_matrix(np.atleast_2d(x), self.support_vectors, cfg)
        return k @ (self.alphas * self.sv_labels) + self.bias


@dataclass
class SvmModel:
    kernel: KernelConfig
    machines: list[BinaryMachine]
    num_classes: int
    num_features: int

    def to_json(self) -> str:
        return json.dumps({
            "kernel": {"kind": self.kernel.kind, "gamma": self.kernel.gamma,
                       "C": self.kernel.C},
            "num_classes": self.num_classes,
            "num_features": self.num_features,
            "machines": [
                {
                    "class_pair": list(m.class_pair),
                    "bias": m.bias,
                    "alphas": m.alphas.tolist(),
                    "sv_labels": m.sv_labels.tolist(),
                    "support_vectors": m.support_vectors.tolist(),
                }
                for m in self.machines
            ],
        })

    @classmethod
    def from_json(cls, text: str) -> "SvmModel":
        doc = json.loads(text)
        machines = [
            BinaryMachine(
                support_vectors=np.asarray(m["support_vectors"]),
                sv_labels=np.asarray(m["sv_labels"], dtype=np.float64),
                alphas=np.asarray(m["alphas"], dtype=np.float64),
                bias=m["bias"],
                class_pair=tuple(m["class_pair"]),
            )
            for m in doc["machines"]
        ]
        return cls(kernel=KernelConfig(**doc["kernel"]), machines=machines,
                   num_classes=doc["num_classes"], num_features=doc["num_features"])


def _smo(k: np.ndarray, y: np.ndarray, c: float, tol: float = KKT_TOL,
         max_passes: int = 10, max_iter: int = 20000,
         rng: np.random.Generator | None = None):
    """Simplified SMO on a precomputed kernel matrix; returns (alphas, bias)."""
    rng = rng or np.random.default_rng(0)
    n = len(y)
    alphas = np.zeros(n)
    b = 0.0
    passes = 0
    it = 0
    while passes < max_passes and it < max_iter:
        changed = 0
        for i in range(n):
            it += 1
            ei = (alphas * y) @ k[i] + b - y[i]
            if (y[i] * ei < -tol and alphas[i] < c) or (y[i] * ei > tol and alphas[i] > 0):
                j = int(rng.integers(0, n - 1))
                if j >= i:
                    j += 1
                ej = (alphas * y) @ k[j] + b - y[j]
                ai_old, aj_old = alphas[i], alphas[j]
                if y[i] != y[j]:
                    low, high = max(0.0, aj_old - ai_old), min(c, c + aj_old - ai_old)
                else:
                    low, high = max(0.0, ai_old + aj_old - c), min(c, ai_old + aj_old)
                if high - low < 1e-12:
                    continue
                eta = 2.0 * k[i, j] - k[i, i] - k[j, j]
                if eta >= 0:
                    continue
                aj = np.clip(aj_old - y[j] * (ei - ej) / eta, low, high)
                if abs(aj - aj_old) < 1e-7:
                    continue
                ai = ai_old + y[i] * y[j] * (aj_old - aj)
                alphas[i], alphas[j] = ai, aj
                b1 = b - ei - y[i] * (ai - ai_old) * k[i, i] - y[j] * (aj - aj_old) * k[i, j]
                b2 = b - ej - y[i] * (ai - ai_old) * k[i, j] - y[j] * (aj - aj_old) * k[j, j]
                if 0 < ai < c:
                    b = b1
                elif 0 < aj < c:
                    b = b2
                else:
                    b = (b1 + b2) / 2.0
                changed += 1
        passes = passes + 1 if changed == 0 else 0
    return alphas, b


def svm_train(features: np.ndarray, labels: np.ndarray,
              kernel: KernelConfig = KernelConfig(), seed: int = 0) -> SvmModel:
    """One-vs-one training over all class pairs."""
    x = np.asarray(features, dtype=np.float64)
    y = np.asarray(labels, dtype=int)
    classes = np.unique(y)
    if len(classes) < 2:
        raise ConfigurationError("need at least 2 classes")
    machines = []
    for a_idx in range(len(classes)):
        for b_idx in range(a_idx + 1, len(classes)):
            neg, pos = int(classes[a_idx]), int(classes[b_idx])
            mask = (y == neg) | (y == pos)
            xs = x[mask]
            ys = np.where(y[mask] == pos, 1.0, -1.0)
            k = kernel_matrix(xs, xs, kernel)
            rng = np.random.default_rng([seed, neg, pos])
            alphas, bias = _smo(k, ys, kernel.C, rng=rng)
            sv = alphas > 1e-8
            machines.append(BinaryMachine(
                support_vectors=xs[sv],
                sv_labels=ys[sv],
                alphas=alphas[sv],
                bias=bias,
                class_pair=(neg, pos),
            ))
    return SvmModel(kernel=kernel, machines=machines,
                    num_classes=len(classes), num_features=x.shape[1])


def svm_predict(model: SvmModel, features: np.ndarray) -> np.ndarray:
    """Majority vote over pairwise machines; ties go to the lower class index."""
    features = np.asarray(features, dtype=np.float64)
    x = np.atleast_2d(features)
    if x.shape[1] != model.num_features:
        raise ShapeError(
            f"feature length {x.shape[1]} != trained length {model.num_features}")
    max_class = max(max(m.class_pair) for m in model.machines) + 1
    votes = np.zeros((x.shape[0], max_class), dtype=int)
    for m in model.machines:
        d = m.decision(x, model.kernel)
        neg, pos = m.class_pair
        votes[:, pos] += d > 0
        votes[:, neg] += d <= 0
    preds = votes.argmax(axis=1)  # argmax takes the lowest index on ties
    return preds if features.ndim > 1 else int(preds[0])
