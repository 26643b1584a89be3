"""Architecture descriptors and the named model zoo (CNN-A..G, DNNs, 1-D CNN)."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigurationError, ShapeError

NAMED_ARCHS = ("A", "B", "C", "D", "E", "F", "G", "DNN-psd", "DNN-spec", "CNN-psd")

SPECTROGRAM_SHAPE = (32, 5, 1)
PSD_SHAPE = (1, 147, 1)


@dataclass(frozen=True)
class LayerSpec:
    kind: str  # conv | maxpool | flatten | dense | dropout | softmax
    filters: int = 0
    filter_size: tuple[int, int] = (4, 4)
    units: int = 0
    rate: float = 0.0
    window: tuple[int, int] = (2, 2)
    activation: str = "linear"  # conv/dense: "relu" or "linear"

    def __post_init__(self):
        if self.kind == "conv" and self.filters <= 0:
            raise ConfigurationError("conv layer needs a positive filter count")
        if self.kind == "dense" and self.units <= 0:
            raise ConfigurationError("dense layer needs positive units")
        if self.kind == "dropout" and not (0 <= self.rate < 1):
            raise ConfigurationError("dropout rate must be in [0, 1)")


@dataclass(frozen=True)
class CnnArch:
    name: str
    input_shape: tuple[int, ...]
    layers: tuple[LayerSpec, ...]
    num_classes: int

    def __post_init__(self):
        shapes = self.shape_chain()  # validates chaining
        last_dense = [l for l in self.layers if l.kind == "dense"]
        if not last_dense or last_dense[-1].units != self.num_classes:
            raise ConfigurationError("final dense layer must have num_classes units")
        if shapes[-1] != (self.num_classes,):
            raise ConfigurationError("network output must be the class-score vector")

    def shape_chain(self) -> list[tuple[int, ...]]:
        """Per-layer output shapes, starting from the input shape."""
        shape = self.input_shape
        chain = [shape]
        for layer in self.layers:
            if layer.kind == "conv":
                if len(shape) != 3:
                    raise ShapeError("conv expects an image input")
                shape = (shape[0], shape[1], layer.filters)
            elif layer.kind == "maxpool":
                h2 = shape[0] // layer.window[0]
                w2 = shape[1] // layer.window[1]
                if h2 == 0 or w2 == 0:
                    raise ShapeError(f"pool window {layer.window} larger than {shape}")
                shape = (h2, w2, shape[2])
            elif layer.kind == "flatten":
                shape = (int(np.prod(shape)),)
            elif layer.kind == "dense":
                if len(shape) != 1:
                    raise ShapeError("dense expects a flat input")
                shape = (layer.units,)
            elif layer.kind in ("dropout", "softmax"):
                pass
            else:
                raise ConfigurationError(f"unknown layer kind {layer.kind!r}")
            chain.append(shape)
        return chain


def count_params(arch: CnnArch) -> int:
    """Total weight + bias count, layer by layer."""
    total = 0
    shape = arch.input_shape
    for layer in arch.layers:
        if layer.kind == "conv":
            fh, fw = layer.filter_size
            total += fh * fw * shape[2] * layer.filters + layer.filters
            shape = (shape[0], shape[1], layer.filters)
        elif layer.kind == "maxpool":
            shape = (shape[0] // layer.window[0], shape[1] // layer.window[1], shape[2])
        elif layer.kind == "flatten":
            shape = (int(np.prod(shape)),)
        elif layer.kind == "dense":
            total += shape[0] * layer.units + layer.units
            shape = (layer.units,)
    return total


def _conv_stack(filter_counts, filter_size, pool_window, pool_after):
    layers = []
    for i, f in enumerate(filter_counts):
        layers.append(LayerSpec(kind="conv", filters=f, filter_size=filter_size,
                                activation="relu"))
        if i in pool_after:
            layers.append(LayerSpec(kind="maxpool", window=pool_window))
    return layers


def _head(num_classes, dropout_rate=0.4):
    return [
        LayerSpec(kind="flatten"),
        LayerSpec(kind="dense", units=1024, activation="relu"),
        LayerSpec(kind="dropout", rate=dropout_rate),
        LayerSpec(kind="dense", units=num_classes),
        LayerSpec(kind="softmax"),
    ]


def build_named_arch(name: str, num_classes: int, dropout_rate: float = 0.4) -> CnnArch:
    """The studied architectures.

    A..G are the spectrogram CNNs with one to five conv layers (conv4-n,
    max pooling after conv1 and, where present, conv2). DNN-spec/DNN-psd are
    the two-hidden-layer 256-ReLU dense models; CNN-psd is the 1-D CNN-C
    variant with 1x4 filters and 1x2 pooling.
    """
    if num_classes < 2:
        raise ConfigurationError("need at least 2 classes")
    if name.startswith("CNN-") and len(name) == 5:  # accept "CNN-C" for "C"
        name = name[4:]
    conv_plans = {
        "A": [16],
        "B": [16, 16],
        "C": [16, 32],
        "D": [32, 32],
        "E": [16, 32, 64],
        "F": [16, 32, 64, 128],
        "G": [16, 32, 64, 128, 256],
    }
    if name in conv_plans:
        counts = conv_plans[name]
        pool_after = {0} if len(counts) == 1 else {0, 1}
        layers = _conv_stack(counts, (4, 4), (2, 2), pool_after)
        layers += _head(num_classes, dropout_rate)
        return CnnArch(name=f"CNN-{name}", input_shape=SPECTROGRAM_SHAPE,
                       layers=tuple(layers), num_classes=num_classes)
    if name == "CNN-psd":
        layers = _conv_stack([16, 32], (1, 4), (1, 2), {0, 1})
        layers += _head(num_classes, dropout_rate)
        return CnnArch(name=name, input_shape=PSD_SHAPE,
                       layers=tuple(layers), num_classes=num_classes)
    if name in ("DNN-psd", "DNN-spec"):
        in_len = 147 if name == "DNN-psd" else 160
        layers = [
            LayerSpec(kind="flatten"),
            LayerSpec(kind="dense", units=256, activation="relu"),
            LayerSpec(kind="dropout", rate=dropout_rate),
            LayerSpec(kind="dense", units=256, activation="relu"),
            LayerSpec(kind="dropout", rate=dropout_rate),
            LayerSpec(kind="dense", units=num_classes),
            LayerSpec(kind="softmax"),
        ]
        shape = PSD_SHAPE if name == "DNN-psd" else SPECTROGRAM_SHAPE
        assert int(np.prod(shape)) == in_len
        return CnnArch(name=name, input_shape=shape,
                       layers=tuple(layers), num_classes=num_classes)
    raise ConfigurationError(f"unknown architecture {name!r}; known: {NAMED_ARCHS}")
