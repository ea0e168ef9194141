"""The four classifiers, splitting utilities and model configuration."""

from .base import BaseEstimator, ClassifierMixin, clone
from .boosting import GradientBoostingClassifier
from .config import (
    MODEL_KINDS,
    AdamConfig,
    GradientBoostingConfig,
    KNNConfig,
    ModelConfig,
    NeuralNetConfig,
    RandomForestConfig,
    make_model,
)
from .forest import RandomForestClassifier
from .io import load_model, model_from_document, model_to_document, save_model
from .neighbors import KNeighborsClassifier, predict_knn
from .network import (
    AdamOptimizer,
    FeedForwardClassifier,
    NNParams,
    he_init,
    nn_forward,
    nn_gradient,
    nn_loss,
)
from .selection import (
    Dataset,
    kfold,
    stratified_kfold_indices,
    stratified_split,
    stratified_split_indices,
)

__all__ = [
    "AdamConfig",
    "AdamOptimizer",
    "BaseEstimator",
    "ClassifierMixin",
    "Dataset",
    "FeedForwardClassifier",
    "GradientBoostingClassifier",
    "GradientBoostingConfig",
    "KNNConfig",
    "KNeighborsClassifier",
    "MODEL_KINDS",
    "ModelConfig",
    "NNParams",
    "NeuralNetConfig",
    "RandomForestClassifier",
    "RandomForestConfig",
    "clone",
    "he_init",
    "kfold",
    "load_model",
    "make_model",
    "model_from_document",
    "model_to_document",
    "nn_forward",
    "nn_gradient",
    "nn_loss",
    "predict_knn",
    "save_model",
    "stratified_kfold_indices",
    "stratified_split",
    "stratified_split_indices",
]
