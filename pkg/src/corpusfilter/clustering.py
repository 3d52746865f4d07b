"""Balanced K-means diagnostics over document embeddings.

Fits K centroids with a hard per-cluster capacity cap of ceil(N/K), then
compares how different datasets distribute over the fitted clusters via
total variation distance between their cluster histograms. Two corpora
drawn from the same underlying distribution land in the same clusters
even when they are in different languages, which is what makes an
English-trained filter usable elsewhere.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .errors import (
    DimensionMismatchError,
    EmptyDatasetError,
    EmptyHistogramError,
    LengthMismatchError,
    TooFewPointsError,
)


@dataclass
class ClusterModel:
    centroids: np.ndarray  # K x d
    K: int
    dim: int
    capacity: int
    seed: int
    labels_: np.ndarray | None = field(default=None, repr=False)
    wcss_history_: list[float] | None = field(default=None, repr=False)

    def __post_init__(self) -> None:
        self.centroids = np.asarray(self.centroids, dtype=np.float64)
        if self.centroids.shape != (self.K, self.dim):
            raise DimensionMismatchError(
                f"centroid matrix {self.centroids.shape} != ({self.K}, {self.dim})"
            )


@dataclass
class ClusterHistogram:
    dataset_name: str
    counts: np.ndarray

    def __post_init__(self) -> None:
        self.counts = np.asarray(self.counts, dtype=np.int64)

    @property
    def total(self) -> int:
        return int(self.counts.sum())


def _as_matrix(points) -> np.ndarray:
    X = np.asarray(points, dtype=np.float64)
    if X.ndim != 2:
        X = np.stack([np.asarray(p, dtype=np.float64) for p in points])
    return X


def _kmeans_pp_init(X: np.ndarray, K: int, rng: np.random.Generator) -> np.ndarray:
    n = X.shape[0]
    centroids = np.empty((K, X.shape[1]))
    centroids[0] = X[rng.integers(n)]
    d2 = np.sum((X - centroids[0]) ** 2, axis=1)
    for k in range(1, K):
        total = d2.sum()
        if total <= 0:
            centroids[k] = X[rng.integers(n)]
        else:
            centroids[k] = X[rng.choice(n, p=d2 / total)]
        d2 = np.minimum(d2, np.sum((X - centroids[k]) ** 2, axis=1))
    return centroids


def _balanced_assign(D: np.ndarray, capacity: int) -> np.ndarray:
    """Greedy capacity-constrained assignment.

    Points are processed in ascending order of their distance to the
    nearest centroid, each going to its closest cluster that still has
    room. Early (confident) points almost always get their first choice;
    only boundary points get bumped.
    """
    n, K = D.shape
    order = np.argsort(np.min(D, axis=1), kind="stable")
    ranked = np.argsort(D, axis=1, kind="stable")
    sizes = np.zeros(K, dtype=np.int64)
    labels = np.full(n, -1, dtype=np.int64)
    for i in order:
        for k in ranked[i]:
            if sizes[k] < capacity:
                labels[i] = k
                sizes[k] += 1
                break
    return labels


def _wcss(X: np.ndarray, centroids: np.ndarray, labels: np.ndarray) -> float:
    return float(np.sum((X - centroids[labels]) ** 2))


def fit_balanced_kmeans(
    points, K: int, seed: int = 0, max_iters: int = 50
) -> ClusterModel:
    X = _as_matrix(points)
    n, dim = X.shape
    if n < K:
        raise TooFewPointsError(f"{n} points cannot fill {K} clusters")
    capacity = math.ceil(n / K)
    rng = np.random.default_rng(seed)
    centroids = _kmeans_pp_init(X, K, rng)

    labels = None
    best_wcss = np.inf
    history: list[float] = []
    for _ in range(max_iters):
        D = ((X[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
        new_labels = _balanced_assign(D, capacity)
        new_centroids = centroids.copy()
        for k in range(K):
            members = X[new_labels == k]
            if len(members):
                new_centroids[k] = members.mean(axis=0)
        wcss = _wcss(X, new_centroids, new_labels)
        # greedy assignment is not globally optimal, so keep the best state
        # seen and stop as soon as the objective fails to improve
        if labels is not None and wcss >= best_wcss - 1e-12:
            break
        converged = labels is not None and np.array_equal(new_labels, labels)
        labels, centroids, best_wcss = new_labels, new_centroids, wcss
        history.append(wcss)
        if converged:
            break

    model = ClusterModel(centroids=centroids, K=K, dim=dim, capacity=capacity, seed=seed)
    model.labels_ = labels
    model.wcss_history_ = history
    return model


def assign(model: ClusterModel, x) -> int:
    return int(assign_batch(model, np.atleast_2d(np.asarray(x, dtype=np.float64)))[0])


def assign_batch(model: ClusterModel, X) -> np.ndarray:
    """Nearest-centroid assignment; capacity is a fit-time constraint only.
    Ties go to the lowest cluster id."""
    X = _as_matrix(X)
    if X.shape[1] != model.dim:
        raise DimensionMismatchError(f"point dim {X.shape[1]} != model dim {model.dim}")
    D = ((X[:, None, :] - model.centroids[None, :, :]) ** 2).sum(axis=2)
    return np.argmin(D, axis=1)


def histogram_over_clusters(
    model: ClusterModel, dataset: Iterable, name: str
) -> ClusterHistogram:
    counts = np.zeros(model.K, dtype=np.int64)
    batch: list[np.ndarray] = []
    total = 0

    def flush():
        nonlocal total
        if batch:
            ids = assign_batch(model, np.stack(batch))
            np.add.at(counts, ids, 1)
            total += len(batch)
            batch.clear()

    for x in dataset:
        batch.append(np.asarray(x, dtype=np.float64))
        if len(batch) >= 4096:
            flush()
    flush()
    if total == 0:
        raise EmptyDatasetError(f"dataset {name!r} is empty")
    return ClusterHistogram(dataset_name=name, counts=counts)


def histogram_distance(a: ClusterHistogram, b: ClusterHistogram) -> float:
    """Total variation distance between the two normalized histograms."""
    if len(a.counts) != len(b.counts):
        raise LengthMismatchError(f"K mismatch: {len(a.counts)} vs {len(b.counts)}")
    if a.total == 0 or b.total == 0:
        raise EmptyHistogramError("cannot compare an empty histogram")
    pa = a.counts / a.total
    pb = b.counts / b.total
    return 0.5 * float(np.abs(pa - pb).sum())


def save_cluster_model(model: ClusterModel, path: str) -> None:
    rec = {
        "K": model.K,
        "dim": model.dim,
        "seed": model.seed,
        "capacity": model.capacity,
        "centroids": model.centroids.ravel().tolist(),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(rec, fh, sort_keys=True)
        fh.write("\n")


def load_cluster_model(path: str) -> ClusterModel:
    with open(path, encoding="utf-8") as fh:
        rec = json.load(fh)
    K, dim = int(rec["K"]), int(rec["dim"])
    return ClusterModel(
        centroids=np.array(rec["centroids"], dtype=np.float64).reshape(K, dim),
        K=K,
        dim=dim,
        capacity=int(rec["capacity"]),
        seed=int(rec["seed"]),
    )
