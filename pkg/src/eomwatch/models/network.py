"""Feed-forward network: one ReLU hidden layer, softmax output, Adam training."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ValidationError
from ..validation import check_array, check_is_fitted, check_X_y
from .base import BaseEstimator, ClassifierMixin

N_CLASSES = 2


@dataclass
class NNParams:
    """Weights and biases of the two layers."""

    w1: np.ndarray  # (d, hidden)
    b1: np.ndarray  # (hidden,)
    w2: np.ndarray  # (hidden, 2)
    b2: np.ndarray  # (2,)

    def copy(self) -> "NNParams":
        return NNParams(self.w1.copy(), self.b1.copy(), self.w2.copy(), self.b2.copy())

    def arrays(self) -> list[np.ndarray]:
        return [self.w1, self.b1, self.w2, self.b2]


def he_init(n_inputs: int, hidden: int, rng: np.random.Generator) -> NNParams:
    """He-normal weights, zero biases."""
    return NNParams(
        w1=rng.normal(0.0, np.sqrt(2.0 / n_inputs), size=(n_inputs, hidden)),
        b1=np.zeros(hidden),
        w2=rng.normal(0.0, np.sqrt(2.0 / hidden), size=(hidden, N_CLASSES)),
        b2=np.zeros(N_CLASSES),
    )


def _softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)  # stability
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def nn_forward(params: NNParams, X: np.ndarray) -> np.ndarray:
    """Class probabilities, shape (batch, 2)."""
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X.reshape(1, -1)
    if X.shape[1] != params.w1.shape[0]:
        raise ValidationError(
            f"input width {X.shape[1]} does not match first layer ({params.w1.shape[0]})"
        )
    hidden = np.maximum(X @ params.w1 + params.b1, 0.0)
    return _softmax(hidden @ params.w2 + params.b2)


def nn_loss(params: NNParams, X: np.ndarray, y: np.ndarray) -> float:
    """Mean cross-entropy of the batch."""
    probs = nn_forward(params, X)
    picked = probs[np.arange(len(y)), np.asarray(y, dtype=int)]
    return float(-np.mean(np.log(np.clip(picked, 1e-300, None))))


def nn_gradient(params: NNParams, X: np.ndarray, y: np.ndarray) -> NNParams:
    """Analytic gradient of the mean cross-entropy w.r.t. all parameters.

    ReLU uses the zero subgradient at exactly 0. Duplicating every batch row
    leaves the gradient unchanged (it is a mean, not a sum).
    """
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X.reshape(1, -1)
    y = np.asarray(y, dtype=int)
    n = X.shape[0]
    if n == 0:
        raise ValidationError("gradient of an empty batch is undefined")

    z1 = X @ params.w1 + params.b1
    hidden = np.maximum(z1, 0.0)
    probs = _softmax(hidden @ params.w2 + params.b2)

    delta2 = probs.copy()
    delta2[np.arange(n), y] -= 1.0
    delta2 /= n
    grad_w2 = hidden.T @ delta2
    grad_b2 = delta2.sum(axis=0)

    delta1 = (delta2 @ params.w2.T) * (z1 > 0)
    grad_w1 = X.T @ delta1
    grad_b1 = delta1.sum(axis=0)
    return NNParams(grad_w1, grad_b1, grad_w2, grad_b2)


class AdamOptimizer:
    """Adam with bias-corrected first and second moments."""

    def __init__(self, learning_rate=1e-3, beta1=0.9, beta2=0.999, epsilon=1e-8):
        self.learning_rate = learning_rate
        self.beta1 = beta1
        self.beta2 = beta2
        self.epsilon = epsilon
        self.t = 0
        self.m: list[np.ndarray] | None = None
        self.v: list[np.ndarray] | None = None

    def step(self, params: NNParams, grads: NNParams) -> None:
        arrays = params.arrays()
        gradients = grads.arrays()
        if self.m is None:
            self.m = [np.zeros_like(a) for a in arrays]
            self.v = [np.zeros_like(a) for a in arrays]
        self.t += 1
        for i, (value, grad) in enumerate(zip(arrays, gradients)):
            self.m[i] = self.beta1 * self.m[i] + (1 - self.beta1) * grad
            self.v[i] = self.beta2 * self.v[i] + (1 - self.beta2) * grad * grad
            m_hat = self.m[i] / (1 - self.beta1**self.t)
            v_hat = self.v[i] / (1 - self.beta2**self.t)
            value -= self.learning_rate * m_hat / (np.sqrt(v_hat) + self.epsilon)


class FeedForwardClassifier(BaseEstimator, ClassifierMixin):
    """128-unit hidden layer, softmax output, cross-entropy, Adam, 10 epochs.

    Expects standardized inputs. Training is bit-reproducible under a fixed
    seed: He initialization, batch shuffling and the update order are all
    driven by one seeded generator, and reductions run in fixed index order.
    """

    def __init__(
        self,
        hidden: int = 128,
        epochs: int = 10,
        batch_size: int = 32,
        learning_rate: float = 1e-3,
        beta1: float = 0.9,
        beta2: float = 0.999,
        epsilon: float = 1e-8,
        seed: int = 0,
    ):
        self.hidden = hidden
        self.epochs = epochs
        self.batch_size = batch_size
        self.learning_rate = learning_rate
        self.beta1 = beta1
        self.beta2 = beta2
        self.epsilon = epsilon
        self.seed = seed

    def fit(self, X, y) -> "FeedForwardClassifier":
        X, y = check_X_y(X, y)
        rng = np.random.default_rng(np.random.SeedSequence([self.seed, 0]))
        params = he_init(X.shape[1], self.hidden, rng)
        optimizer = AdamOptimizer(self.learning_rate, self.beta1, self.beta2, self.epsilon)
        n = X.shape[0]
        for _ in range(self.epochs):
            order = rng.permutation(n)
            for start in range(0, n, self.batch_size):
                batch = order[start : start + self.batch_size]
                grads = nn_gradient(params, X[batch], y[batch])
                optimizer.step(params, grads)
        self.params_ = params
        self.n_features_ = X.shape[1]
        return self

    def predict_proba(self, X) -> np.ndarray:
        check_is_fitted(self, "params_")
        return nn_forward(self.params_, check_array(X))

    def predict(self, X) -> np.ndarray:
        proba = self.predict_proba(X)
        return (proba[:, 1] > proba[:, 0]).astype(np.int64)  # tie -> class 0

    def to_dict(self) -> dict:
        check_is_fitted(self, "params_")
        return {
            "hidden": self.hidden,
            "epochs": self.epochs,
            "batch_size": self.batch_size,
            "learning_rate": self.learning_rate,
            "beta1": self.beta1,
            "beta2": self.beta2,
            "epsilon": self.epsilon,
            "seed": self.seed,
            "n_features": self.n_features_,
            "w1": self.params_.w1.tolist(),
            "b1": self.params_.b1.tolist(),
            "w2": self.params_.w2.tolist(),
            "b2": self.params_.b2.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FeedForwardClassifier":
        model = cls(
            hidden=d["hidden"],
            epochs=d["epochs"],
            batch_size=d["batch_size"],
            learning_rate=d["learning_rate"],
            beta1=d["beta1"],
            beta2=d["beta2"],
            epsilon=d["epsilon"],
            seed=d["seed"],
        )
        model.params_ = NNParams(
            w1=np.asarray(d["w1"], dtype=float),
            b1=np.asarray(d["b1"], dtype=float),
            w2=np.asarray(d["w2"], dtype=float),
            b2=np.asarray(d["b2"], dtype=float),
        )
        model.n_features_ = d["n_features"]
        return model
