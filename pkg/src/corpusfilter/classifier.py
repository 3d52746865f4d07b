"""Binary quality classifier: L2-regularized logistic regression.

Trained once on English-only labeled seed embeddings, then applied to
score documents in any language the embedding provider covers. Training
is full-batch gradient descent with backtracking line search by default
(deterministic given the seed); minibatch SGD is available for seed sets
that do not fit the full-batch path comfortably.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

from .errors import (
    DataError,
    DimensionMismatchError,
    EmptyDataError,
    ScoreOutOfRangeError,
    SingleClassDataError,
)

VERSION = "0.1.0"


@dataclass
class LabeledExample:
    x: np.ndarray
    y: int
    origin: str = ""


@dataclass
class LinearClassifier:
    w: np.ndarray
    b: float
    dim: int
    normalize_inputs: bool = True
    trained_on: str = ""
    seed: int = 0
    version: str = VERSION
    l2_lambda: float = 0.0
    train_loss: float | None = None

    def __post_init__(self) -> None:
        self.w = np.asarray(self.w, dtype=np.float64)
        if self.w.shape != (self.dim,):
            raise DimensionMismatchError(
                f"weight length {self.w.shape} does not match dim {self.dim}"
            )
        if not np.all(np.isfinite(self.w)) or not np.isfinite(self.b):
            raise DataError("classifier weights contain NaN/Inf")


@dataclass
class TrainConfig:
    l2_lambda: float = 1e-4
    max_epochs: int = 500
    learning_rate: float = 1.0
    tolerance: float = 1e-6
    batch_size: int | None = None  # None = full batch
    seed: int = 0
    normalize_inputs: bool = True

    def __post_init__(self) -> None:
        if self.l2_lambda < 0 or self.max_epochs <= 0 or self.learning_rate <= 0:
            raise DataError("invalid training configuration")
        if self.tolerance <= 0:
            raise DataError("tolerance must be positive")


def sigmoid(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=np.float64)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def stack_examples(data: list[LabeledExample]) -> tuple[np.ndarray, np.ndarray]:
    if not data:
        raise EmptyDataError("no labeled examples")
    dims = {len(ex.x) for ex in data}
    if len(dims) != 1:
        raise DimensionMismatchError(f"mixed example dimensions {sorted(dims)}")
    X = np.stack([np.asarray(ex.x, dtype=np.float64) for ex in data])
    y = np.array([ex.y for ex in data], dtype=np.float64)
    if not np.all(np.isin(y, (0.0, 1.0))):
        raise DataError("labels must be 0 or 1")
    return X, y


def _loss_grad(
    w: np.ndarray, b: float, X: np.ndarray, y: np.ndarray, l2_lambda: float
) -> tuple[float, np.ndarray, float]:
    n = X.shape[0]
    z = X @ w + b
    # mean BCE, numerically stable: log(1+e^z) - y z
    loss = float(np.mean(np.logaddexp(0.0, z) - y * z)) + 0.5 * l2_lambda * float(w @ w)
    resid = sigmoid(z) - y
    grad_w = X.T @ resid / n + l2_lambda * w
    grad_b = float(np.mean(resid))
    return loss, grad_w, grad_b


def loss_and_gradient(
    clf: LinearClassifier, data: list[LabeledExample], l2_lambda: float
) -> tuple[float, np.ndarray, float]:
    X, y = stack_examples(data)
    if X.shape[1] != clf.dim:
        raise DimensionMismatchError(f"examples have dim {X.shape[1]}, classifier {clf.dim}")
    return _loss_grad(clf.w, clf.b, X, y, l2_lambda)


def train_logistic(data: list[LabeledExample], config: TrainConfig) -> LinearClassifier:
    X, y = stack_examples(data)
    if len(np.unique(y)) < 2:
        raise SingleClassDataError("training data contains a single class")
    if config.normalize_inputs:
        X = _normalize_rows(X)
    dim = X.shape[1]
    rng = np.random.default_rng(config.seed)
    w = rng.normal(0.0, 0.01, size=dim)
    b = 0.0

    if config.batch_size is not None:
        w, b = _train_minibatch(X, y, w, b, config, rng)
    else:
        w, b = _train_full_batch(X, y, w, b, config)

    loss, _, _ = _loss_grad(w, b, X, y, config.l2_lambda)
    return LinearClassifier(
        w=w,
        b=b,
        dim=dim,
        normalize_inputs=config.normalize_inputs,
        seed=config.seed,
        l2_lambda=config.l2_lambda,
        train_loss=loss,
    )


def _train_full_batch(X, y, w, b, config: TrainConfig):
    step = config.learning_rate
    loss, grad_w, grad_b = _loss_grad(w, b, X, y, config.l2_lambda)
    for _ in range(config.max_epochs):
        gnorm = float(np.sqrt(grad_w @ grad_w + grad_b * grad_b))
        if gnorm < config.tolerance:
            break
        # backtracking line search with Armijo condition
        step = min(step * 2.0, 1e6)
        while True:
            w_new = w - step * grad_w
            b_new = b - step * grad_b
            loss_new, gw_new, gb_new = _loss_grad(w_new, b_new, X, y, config.l2_lambda)
            if loss_new <= loss - 1e-4 * step * gnorm * gnorm:
                break
            step *= 0.5
            if step < 1e-12:
                return w, b
        w, b, loss, grad_w, grad_b = w_new, b_new, loss_new, gw_new, gb_new
    return w, b


def _train_minibatch(X, y, w, b, config: TrainConfig, rng):
    n = X.shape[0]
    bs = config.batch_size
    for epoch in range(config.max_epochs):
        order = rng.permutation(n)
        # decaying step keeps late epochs from oscillating
        step = config.learning_rate / (1.0 + 0.1 * epoch)
        for start in range(0, n, bs):
            idx = order[start : start + bs]
            _, grad_w, grad_b = _loss_grad(w, b, X[idx], y[idx], config.l2_lambda)
            w = w - step * grad_w
            b = b - step * grad_b
        _, grad_w, grad_b = _loss_grad(w, b, X, y, config.l2_lambda)
        if float(np.sqrt(grad_w @ grad_w + grad_b * grad_b)) < config.tolerance:
            break
    return w, b


def _normalize_rows(X: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(X, axis=1, keepdims=True)
    norms[norms == 0.0] = 1.0
    return X / norms


def _prepare_inputs(clf: LinearClassifier, X: np.ndarray) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if X.shape[1] != clf.dim:
        raise DimensionMismatchError(f"input dim {X.shape[1]} != classifier dim {clf.dim}")
    if clf.normalize_inputs:
        X = _normalize_rows(X)
    return X


def score(clf: LinearClassifier, x: np.ndarray) -> float:
    return float(score_batch(clf, np.atleast_2d(x))[0])


def score_batch(clf: LinearClassifier, X: np.ndarray) -> np.ndarray:
    X = _prepare_inputs(clf, X)
    return sigmoid(X @ clf.w + clf.b)


def evaluate(clf: LinearClassifier, data: list[LabeledExample]) -> dict:
    X, y = stack_examples(data)
    scores = score_batch(clf, X)
    accuracy = float(np.mean((scores > 0.5) == (y == 1.0)))
    result = {"accuracy": accuracy, "n": int(len(y)), "auc": None}
    n_pos = int(np.sum(y == 1.0))
    n_neg = int(len(y)) - n_pos
    if n_pos and n_neg:
        # Mann-Whitney rank statistic; ties share average rank
        ranks = rankdata(scores)
        auc = (float(np.sum(ranks[y == 1.0])) - n_pos * (n_pos + 1) / 2) / (n_pos * n_neg)
        result["auc"] = auc
    return result


def binarize_fwe_annotations(records: list[dict]) -> list[tuple[str, int]]:
    """Convert 0..5 educational-quality annotations to binary labels.

    A record is high quality when its annotation score is 2 or above.
    """
    out = []
    for rec in records:
        s = rec["score"]
        if not isinstance(s, int) or not 0 <= s <= 5:
            raise ScoreOutOfRangeError(f"annotation score {s!r} outside 0..5")
        out.append((rec["text"], 1 if s >= 2 else 0))
    return out


def save_classifier(clf: LinearClassifier, path: str) -> None:
    rec = {
        "version": clf.version,
        "dim": clf.dim,
        "normalize_inputs": clf.normalize_inputs,
        "w": clf.w.tolist(),
        "b": clf.b,
        "trained_on": clf.trained_on,
        "seed": clf.seed,
        "l2_lambda": clf.l2_lambda,
        "train_loss": clf.train_loss,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(rec, fh, ensure_ascii=False, sort_keys=True)
        fh.write("\n")


def load_classifier(path: str) -> LinearClassifier:
    with open(path, encoding="utf-8") as fh:
        rec = json.load(fh)
    return LinearClassifier(
        w=np.array(rec["w"], dtype=np.float64),
        b=float(rec["b"]),
        dim=int(rec["dim"]),
        normalize_inputs=bool(rec["normalize_inputs"]),
        trained_on=rec.get("trained_on", ""),
        seed=int(rec.get("seed", 0)),
        version=rec.get("version", VERSION),
        l2_lambda=float(rec.get("l2_lambda", 0.0)),
        train_loss=rec.get("train_loss"),
    )
