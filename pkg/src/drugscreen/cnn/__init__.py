from .estimator import TextCNNClassifier
from .model import (
    Adam,
    CnnConfig,
    backward,
    forward,
    init_params,
    loss_and_grad,
    param_names,
    weighted_cross_entropy,
)
from .training import (
    EpochStats,
    TrainingError,
    TrainResult,
    load_checkpoint,
    predict,
    predict_texts,
    save_checkpoint,
    train,
)

__all__ = [
    "Adam",
    "CnnConfig",
    "EpochStats",
    "TextCNNClassifier",
    "TrainResult",
    "TrainingError",
    "backward",
    "forward",
    "init_params",
    "load_checkpoint",
    "loss_and_grad",
    "param_names",
    "predict",
    "predict_texts",
    "save_checkpoint",
    "train",
    "weighted_cross_entropy",
]
