"""Parameter handling, forward/backward through a CnnArch, and the model
bundle file format.

Model file layout: magic "RRM1", uint32 little-endian header length, a JSON
header (arch, labels, version, normalization stats, parameter manifest), then
the raw little-endian float32 parameter blobs in manifest order.
"""
from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field, asdict

import numpy as np

from ..errors import FormatError, ShapeError
from ..store import RoomLabel
from .arch import CnnArch, LayerSpec
from . import ops

MAGIC = b"RRM1"


def init_params(arch: CnnArch, rng: np.random.Generator,
                dtype=np.float64) -> dict[str, np.ndarray]:
    """Glorot-uniform weights (+/- sqrt(6/(fan_in+fan_out))), zero biases."""
    params: dict[str, np.ndarray] = {}
    shape = arch.input_shape
    for li, layer in enumerate(arch.layers):
        if layer.kind == "conv":
            fh, fw = layer.filter_size
            fan_in = fh * fw * shape[2]
            fan_out = fh * fw * layer.filters
            bound = np.sqrt(6.0 / (fan_in + fan_out))
            params[f"l{li}.w"] = rng.uniform(
                -bound, bound, (fh, fw, shape[2], layer.filters)).astype(dtype)
            params[f"l{li}.b"] = np.zeros(layer.filters, dtype=dtype)
            shape = (shape[0], shape[1], layer.filters)
        elif layer.kind == "maxpool":
            shape = (shape[0] // layer.window[0], shape[1] // layer.window[1], shape[2])
        elif layer.kind == "flatten":
            shape = (int(np.prod(shape)),)
        elif layer.kind == "dense":
            bound = np.sqrt(6.0 / (shape[0] + layer.units))
            params[f"l{li}.w"] = rng.uniform(
                -bound, bound, (layer.units, shape[0])).astype(dtype)
            params[f"l{li}.b"] = np.zeros(layer.units, dtype=dtype)
            shape = (layer.units,)
    return params


def _as_batch(arch: CnnArch, x: np.ndarray) -> np.ndarray:
    """Coerce input to (N,) + arch.input_shape."""
    x = np.asarray(x)
    want = arch.input_shape
    size = int(np.prod(want))
    if x.size == size:  # one sample in any layout
        return x.reshape((1,) + want)
    if x.ndim >= 2 and int(np.prod(x.shape[1:])) == size:  # leading batch axis
        return x.reshape((x.shape[0],) + want)
    raise ShapeError(f"input shape {x.shape} does not match {want}")


def forward(arch: CnnArch, params: dict, x: np.ndarray, training: bool = False,
            rng: np.random.Generator | None = None):
    """Run the network; returns (logits, caches) for the backward pass."""
    x = _as_batch(arch, x).astype(next(iter(params.values())).dtype, copy=False)
    caches = []
    for li, layer in enumerate(arch.layers):
        if layer.kind == "conv":
            pre, cache = ops.conv2d_forward(x, params[f"l{li}.w"], params[f"l{li}.b"])
            if layer.activation == "relu":
                x = ops.relu(pre)
                caches.append(("conv_relu", cache, pre))
            else:
                x = pre
                caches.append(("conv", cache, None))
        elif layer.kind == "maxpool":
            x, cache = ops.maxpool_forward(x, layer.window)
            caches.append(("maxpool", cache, None))
        elif layer.kind == "flatten":
            caches.append(("flatten", x.shape, None))
            x = x.reshape(x.shape[0], -1)
        elif layer.kind == "dense":
            pre = ops.dense(x, params[f"l{li}.w"], params[f"l{li}.b"])
            if layer.activation == "relu":
                caches.append(("dense_relu", x, pre))
                x = ops.relu(pre)
            else:
                caches.append(("dense", x, None))
                x = pre
        elif layer.kind == "dropout":
            x, mask = ops.dropout_forward(x, layer.rate, training, rng)
            caches.append(("dropout", mask, None))
        elif layer.kind == "softmax":
            caches.append(("softmax", None, None))  # loss head; logits pass through
    return x, caches


def loss_and_grads(arch: CnnArch, params: dict, x: np.ndarray, labels,
                   rng: np.random.Generator | None = None, training: bool = True):
    """Mean cross-entropy and gradients for every parameter tensor."""
    logits, caches = forward(arch, params, x, training=training, rng=rng)
    loss, probs = ops.softmax_xent(logits, labels)
    grad = ops.softmax_xent_backward(probs, labels).astype(logits.dtype)
    grads: dict[str, np.ndarray] = {}
    for li in range(len(arch.layers) - 1, -1, -1):
        kind, cache, pre = caches[li]
        name = f"l{li}"
        if kind == "softmax":
            continue
        if kind in ("dense", "dense_relu"):
            if kind == "dense_relu":
                grad = ops.relu_backward(grad, pre)
            grad, grads[f"{name}.w"], grads[f"{name}.b"] = ops.dense_backward(
                grad, cache, params[f"{name}.w"])
        elif kind == "dropout":
            grad = ops.dropout_backward(grad, cache)
        elif kind == "flatten":
            grad = grad.reshape(cache)
        elif kind == "maxpool":
            grad = ops.maxpool_backward(grad, cache)
        elif kind in ("conv", "conv_relu"):
            if kind == "conv_relu":
                grad = ops.relu_backward(grad, pre)
            grad, grads[f"{name}.w"], grads[f"{name}.b"] = ops.conv2d_backward(
                grad, cache, params[f"{name}.w"])
    return loss, grads


@dataclass
class ModelBundle:
    """A served classifier: architecture, parameters, label table, and the
    training-split normalization statistics baked in at train time."""

    arch: CnnArch
    params: dict[str, np.ndarray]
    labels: list[RoomLabel]
    version: int = 1
    norm_mean: np.ndarray | None = None
    norm_std: np.ndarray | None = None

    def normalize(self, x: np.ndarray) -> np.ndarray:
        x = _as_batch(self.arch, x)
        if self.norm_mean is None:
            return x
        return (x - self.norm_mean) / self.norm_std

    def scores(self, x: np.ndarray) -> np.ndarray:
        """Inference-mode class scores (final dense layer output)."""
        logits, _ = forward(self.arch, self.params, self.normalize(x))
        return logits


def predict_topk(bundle: ModelBundle, x: np.ndarray, k: int = 1):
    """Top-k (RoomLabel, score) per descending score; ties break toward the
    lower class index. For a batch, scores are averaged across records first."""
    if k < 1:
        raise ShapeError("k must be >= 1")
    scores = bundle.scores(x).mean(axis=0)
    order = np.lexsort((np.arange(len(scores)), -scores))
    by_index = {l.class_index: l for l in bundle.labels}
    return [(by_index[int(i)], float(scores[i])) for i in order[: min(k, len(scores))]]


def _arch_to_dict(arch: CnnArch) -> dict:
    return {
        "name": arch.name,
        "input_shape": list(arch.input_shape),
        "num_classes": arch.num_classes,
        "layers": [asdict(l) for l in arch.layers],
    }


def _arch_from_dict(doc: dict) -> CnnArch:
    layers = []
    for l in doc["layers"]:
        l = dict(l)
        l["filter_size"] = tuple(l["filter_size"])
        l["window"] = tuple(l["window"])
        layers.append(LayerSpec(**l))
    return CnnArch(name=doc["name"], input_shape=tuple(doc["input_shape"]),
                   layers=tuple(layers), num_classes=doc["num_classes"])


def save_model(bundle: ModelBundle, path) -> None:
    names = sorted(bundle.params)
    header = {
        "arch": _arch_to_dict(bundle.arch),
        "labels": [[l.label_id, l.class_index] for l in bundle.labels],
        "version": bundle.version,
        "params": [[n, list(bundle.params[n].shape)] for n in names],
        "norm_mean": None if bundle.norm_mean is None else bundle.norm_mean.ravel().tolist(),
        "norm_std": None if bundle.norm_std is None else bundle.norm_std.ravel().tolist(),
    }
    blob = json.dumps(header).encode()
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<I", len(blob)))
        f.write(blob)
        for n in names:
            f.write(bundle.params[n].astype("<f4").tobytes())


def load_model(path) -> ModelBundle:
    with open(path, "rb") as f:
        data = f.read()
    if data[:4] != MAGIC:
        raise FormatError("bad magic; not a model bundle file")
    if len(data) < 8:
        raise FormatError("truncated model file")
    hlen = struct.unpack("<I", data[4:8])[0]
    try:
        header = json.loads(data[8:8 + hlen])
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise FormatError(f"unreadable model header: {exc}") from exc
    arch = _arch_from_dict(header["arch"])
    params = {}
    offset = 8 + hlen
    for name, shape in header["params"]:
        count = int(np.prod(shape))
        end = offset + 4 * count
        if end > len(data):
            raise FormatError("truncated parameter blob")
        params[name] = np.frombuffer(data[offset:end], dtype="<f4").reshape(shape).astype(np.float32)
        offset = end
    mean = header.get("norm_mean")
    std = header.get("norm_std")
    shape = (1,) + arch.input_shape
    return ModelBundle(
        arch=arch,
        params=params,
        labels=[RoomLabel(lid, idx) for lid, idx in header["labels"]],
        version=header["version"],
        norm_mean=None if mean is None else np.asarray(mean).reshape(shape),
        norm_std=None if std is None else np.asarray(std).reshape(shape),
    )
