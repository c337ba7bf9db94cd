"""Four classifier families behind one train/predict/persist contract."""

from .model import (
    DEFAULT_HYPERPARAMETERS,
    LearnerKind,
    MODEL_FORMAT_VERSION,
    Model,
    Prediction,
    checksum,
    explain,
    load,
    predict,
    predict_many,
    predict_scores,
    save,
    train,
)

__all__ = [
    "DEFAULT_HYPERPARAMETERS",
    "LearnerKind",
    "MODEL_FORMAT_VERSION",
    "Model",
    "Prediction",
    "checksum",
    "explain",
    "load",
    "predict",
    "predict_many",
    "predict_scores",
    "save",
    "train",
]
