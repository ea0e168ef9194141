"""Hyperparameter bundles for the four classifiers.

The documented defaults follow the study setup: RF with 100 unlimited-depth
trees and sqrt feature sampling, 5-NN with uniform weights, gradient boosting
with 100 estimators at learning rate 0.1 (depth-3 base learners), and a
128-unit single-hidden-layer network trained 10 epochs with Adam. Values the
study left open (GB tree depth, Adam constants, batch size) are pinned here
so every experiment is reproducible from its config.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

from ..errors import ValidationError

MODEL_KINDS = ("rf", "knn", "gb", "nn")


@dataclass(frozen=True)
class RandomForestConfig:
    n_trees: int = 100
    max_depth: int | None = None  # None = grow until pure
    max_features: str = "sqrt"

    def __post_init__(self):
        if self.n_trees < 1:
            raise ValidationError("n_trees must be positive")
        if self.max_depth is not None and self.max_depth < 1:
            raise ValidationError("max_depth must be positive or None")
        if self.max_features != "sqrt":
            raise ValidationError("only max_features='sqrt' is supported")


@dataclass(frozen=True)
class KNNConfig:
    k: int = 5
    weights: str = "uniform"

    def __post_init__(self):
        if self.k < 1:
            raise ValidationError("k must be positive")
        if self.weights != "uniform":
            raise ValidationError("only weights='uniform' is supported")


@dataclass(frozen=True)
class GradientBoostingConfig:
    n_estimators: int = 100
    learning_rate: float = 0.1
    tree_depth: int = 3

    def __post_init__(self):
        if self.n_estimators < 1:
            raise ValidationError("n_estimators must be positive")
        if self.learning_rate <= 0:
            raise ValidationError("learning_rate must be positive")
        if self.tree_depth < 1:
            raise ValidationError("tree_depth must be positive")


@dataclass(frozen=True)
class AdamConfig:
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8

    def __post_init__(self):
        if self.learning_rate < 0:
            raise ValidationError("learning_rate must be >= 0")
        if not (0 <= self.beta1 < 1 and 0 <= self.beta2 < 1):
            raise ValidationError("betas must lie in [0, 1)")
        if self.epsilon <= 0:
            raise ValidationError("epsilon must be positive")


@dataclass(frozen=True)
class NeuralNetConfig:
    hidden: int = 128
    epochs: int = 10
    batch_size: int = 32
    adam: AdamConfig = field(default_factory=AdamConfig)

    def __post_init__(self):
        if self.hidden < 1 or self.epochs < 1 or self.batch_size < 1:
            raise ValidationError("hidden, epochs and batch_size must be positive")


@dataclass(frozen=True)
class ModelConfig:
    """Configuration of all four classifiers plus the master seed."""

    rf: RandomForestConfig = field(default_factory=RandomForestConfig)
    knn: KNNConfig = field(default_factory=KNNConfig)
    gb: GradientBoostingConfig = field(default_factory=GradientBoostingConfig)
    nn: NeuralNetConfig = field(default_factory=NeuralNetConfig)
    seed: int = 0

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ModelConfig":
        nn = d.get("nn", {})
        return cls(
            rf=RandomForestConfig(**d.get("rf", {})),
            knn=KNNConfig(**d.get("knn", {})),
            gb=GradientBoostingConfig(**d.get("gb", {})),
            nn=NeuralNetConfig(
                **{k: v for k, v in nn.items() if k != "adam"},
                adam=AdamConfig(**nn.get("adam", {})),
            ),
            seed=d.get("seed", 0),
        )


def make_model(kind: str, config: ModelConfig):
    """Instantiate an unfitted estimator of the given kind from the config."""
    from .boosting import GradientBoostingClassifier
    from .forest import RandomForestClassifier
    from .neighbors import KNeighborsClassifier
    from .network import FeedForwardClassifier

    if kind == "rf":
        return RandomForestClassifier(
            n_trees=config.rf.n_trees,
            max_depth=config.rf.max_depth,
            seed=config.seed,
        )
    if kind == "knn":
        return KNeighborsClassifier(k=config.knn.k)
    if kind == "gb":
        return GradientBoostingClassifier(
            n_estimators=config.gb.n_estimators,
            learning_rate=config.gb.learning_rate,
            max_depth=config.gb.tree_depth,
        )
    if kind == "nn":
        return FeedForwardClassifier(
            hidden=config.nn.hidden,
            epochs=config.nn.epochs,
            batch_size=config.nn.batch_size,
            learning_rate=config.nn.adam.learning_rate,
            beta1=config.nn.adam.beta1,
            beta2=config.nn.adam.beta2,
            epsilon=config.nn.adam.epsilon,
            seed=config.seed,
        )
    raise ValidationError(f"unknown model kind {kind!r} (expected one of {MODEL_KINDS})")
