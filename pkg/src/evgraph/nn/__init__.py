from evgraph.nn.data import Dataset
from evgraph.nn.layers import LayerSpec, init_filter, layer_backward, layer_forward, relu
from evgraph.nn.model import Model, build_model, cross_entropy, model_forward, softmax
from evgraph.nn.optim import AdamConfig, AdamState, adam_step
from evgraph.nn.training import EpochRecord, evaluate, predict, train, write_trace

__all__ = [
    "AdamConfig",
    "AdamState",
    "Dataset",
    "EpochRecord",
    "LayerSpec",
    "Model",
    "adam_step",
    "build_model",
    "cross_entropy",
    "evaluate",
    "init_filter",
    "layer_backward",
    "layer_forward",
    "model_forward",
    "predict",
    "relu",
    "softmax",
    "train",
    "write_trace",
]
