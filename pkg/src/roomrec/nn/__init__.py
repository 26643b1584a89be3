from .ops import conv2d, relu, maxpool, flatten, dense, dropout, softmax_xent
from .arch import LayerSpec, CnnArch, build_named_arch, count_params
from .model import ModelBundle, init_params, forward, loss_and_grads, predict_topk, save_model, load_model
from .train import TrainConfig, train, evaluate

__all__ = [
    "conv2d", "relu", "maxpool", "flatten", "dense", "dropout", "softmax_xent",
    "LayerSpec", "CnnArch", "build_named_arch", "count_params",
    "ModelBundle", "init_params", "forward", "loss_and_grads", "predict_topk",
    "save_model", "load_model", "TrainConfig", "train", "evaluate",
]
