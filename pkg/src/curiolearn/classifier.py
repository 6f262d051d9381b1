"""Shallow classifier: one linear layer trained with softmax cross-entropy.

Written from scratch on numpy. Zero-initialized parameters, plain mini-batch
SGD with a per-epoch seeded shuffle, deterministic end to end. One output
row per class actually present in the training data; ``class_ids`` maps row
index back to the class label, growing as new classes appear.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dataset import Dataset
from .errors import DivergenceError, ValidationError
from .rehearsal import LabeledExample


@dataclass
class TrainConfig:
    epochs: int = 40
    learning_rate: float = 0.01
    batch_size: int = 64
    seed: int = 0

    def validate(self) -> None:
        if self.epochs < 1:
            raise ValidationError(f"epochs must be >= 1, got {self.epochs}")
        if self.learning_rate <= 0:
            raise ValidationError(f"learning_rate must be > 0, got {self.learning_rate}")
        if self.batch_size < 1:
            raise ValidationError(f"batch_size must be >= 1, got {self.batch_size}")


@dataclass
class LinearClassifier:
    weights: np.ndarray          # (num_rows, dimension)
    biases: np.ndarray           # (num_rows,)
    class_ids: list[int]         # row index -> class label
    epoch_mean_losses: list[float] = field(default_factory=list)

    @property
    def dimension(self) -> int:
        return self.weights.shape[1]

    def logits(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.shape[-1] != self.dimension:
            raise ValidationError(
                f"input dimension {x.shape[-1]} != classifier dimension {self.dimension}")
        return x @ self.weights.T + self.biases


def _stable_softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - np.max(logits, axis=-1, keepdims=True)
    exp = np.exp(shifted)
    return exp / np.sum(exp, axis=-1, keepdims=True)


def softmax_xent_loss_and_grad(
    weights: np.ndarray, biases: np.ndarray, x: np.ndarray, rows: np.ndarray,
) -> tuple[float, np.ndarray, np.ndarray]:
    """Mean softmax cross-entropy over a batch and its analytic gradient.

    ``rows`` holds the target row index for each example. Also serves as the
    single source the finite-difference check differentiates against.
    """
    n = x.shape[0]
    logits = x @ weights.T + biases
    probs = _stable_softmax(logits)
    picked = probs[np.arange(n), rows]
    loss = float(-np.mean(np.log(picked)))
    dlogits = probs
    dlogits[np.arange(n), rows] -= 1.0
    dlogits /= n
    grad_w = dlogits.T @ x
    grad_b = dlogits.sum(axis=0)
    return loss, grad_w, grad_b


def train(data: list[LabeledExample], num_classes: int, cfg: TrainConfig) -> LinearClassifier:
    """Mini-batch SGD on mean softmax cross-entropy, from zero parameters.

    Output rows correspond to the distinct labels in ``data`` (ascending);
    ``num_classes`` is only the validation bound for labels. A non-finite
    loss aborts with DivergenceError rather than being clamped.
    """
    cfg.validate()
    if not data:
        raise ValidationError("training data is empty")
    labels = sorted({ex.label for ex in data})
    for label in labels:
        if not 0 <= label < num_classes:
            raise ValidationError(f"label {label} outside [0, {num_classes})")
    row_of = {label: row for row, label in enumerate(labels)}

    x = np.stack([np.asarray(ex.features, dtype=np.float64) for ex in data])
    rows = np.array([row_of[ex.label] for ex in data])
    dimension = x.shape[1]

    weights = np.zeros((len(labels), dimension))
    biases = np.zeros(len(labels))
    rng = np.random.default_rng(cfg.seed)
    epoch_losses: list[float] = []
    for _ in range(cfg.epochs):
        order = rng.permutation(len(data))
        batch_losses = []
        batch_sizes = []
        for start in range(0, len(data), cfg.batch_size):
            idx = order[start:start + cfg.batch_size]
            loss, grad_w, grad_b = softmax_xent_loss_and_grad(
                weights, biases, x[idx], rows[idx])
            if not np.isfinite(loss):
                raise DivergenceError(f"non-finite training loss {loss}")
            weights -= cfg.learning_rate * grad_w
            biases -= cfg.learning_rate * grad_b
            batch_losses.append(loss)
            batch_sizes.append(len(idx))
        epoch_losses.append(
            float(np.average(batch_losses, weights=batch_sizes)))
    return LinearClassifier(weights, biases, labels, epoch_losses)


def predict(clf: LinearClassifier, x: np.ndarray) -> int:
    """Class label of the highest logit; ties break to the lowest row."""
    logits = clf.logits(np.asarray(x, dtype=np.float64))
    return clf.class_ids[int(np.argmax(logits))]


def softmax_probs(clf: LinearClassifier, x: np.ndarray) -> np.ndarray:
    """Numerically stable softmax over the logit vector for one input."""
    return _stable_softmax(clf.logits(np.asarray(x, dtype=np.float64)))


def evaluate(clf: LinearClassifier, test: Dataset) -> float:
    """Fraction of all test images predicted correctly.

    Every view of every object counts; classes the classifier has not
    learned yet can only be misclassified.
    """
    if not test.objects:
        raise ValidationError("test set is empty")
    x = np.concatenate([obj.views for obj in test.objects]).astype(np.float64)
    labels = np.concatenate([
        np.full(obj.num_views, obj.class_id) for obj in test.objects])
    rows = np.argmax(clf.logits(x), axis=1)
    predicted = np.array(clf.class_ids)[rows]
    return float(np.mean(predicted == labels))
