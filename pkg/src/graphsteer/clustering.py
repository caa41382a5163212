"""k-means over standardized attributes, for datasets that ship no clustering.

Plus-plus seeding from the configured seed, a fixed number of restarts, and
deterministic tie-breaking: nearest-centroid ties go to the lowest cluster
index, the best restart is chosen by (WCSS, restart index).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .dataset import AttributeMatrix, Clustering, clustering_from_labels


class ClusteringError(ValueError):
    """Raised on invalid k-means inputs."""


@dataclass(frozen=True)
class KMeansConfig:
    k: int
    max_iterations: int = 100
    rng_seed: int = 0
    restarts: int = 10

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ClusteringError("k must be at least 1")
        if self.max_iterations < 1 or self.restarts < 1:
            raise ClusteringError("iteration and restart counts must be positive")


def _assign(X: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    d2 = ((X[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
    return np.argmin(d2, axis=1)  # argmin takes the lowest index on ties


def _plusplus_seed(X: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = X.shape[0]
    first = int(rng.integers(n))
    centroids = [X[first]]
    d2 = ((X - centroids[0]) ** 2).sum(axis=1)
    for _ in range(1, k):
        total = float(d2.sum())
        if total == 0.0:
            idx = int(rng.integers(n))  # all remaining points coincide
        else:
            idx = int(rng.choice(n, p=d2 / total))
        centroids.append(X[idx])
        d2 = np.minimum(d2, ((X - centroids[-1]) ** 2).sum(axis=1))
    return np.asarray(centroids)


def lloyd(X: np.ndarray, initial_centroids: np.ndarray,
          max_iterations: int = 100) -> tuple[np.ndarray, np.ndarray, list[float]]:
    """Lloyd iterations from given centroids.

    Returns (labels, centroids, per-iteration WCSS). Empty clusters are
    repaired by reassigning the point farthest from its own centroid, which
    keeps the objective non-increasing.
    """
    k = initial_centroids.shape[0]
    centroids = np.array(initial_centroids, dtype=float)
    labels = _assign(X, centroids)
    history: list[float] = []
    for _ in range(max_iterations):
        empties = [c for c in range(k) if not (labels == c).any()]
        if empties:
            dist_own = ((X - centroids[labels]) ** 2).sum(axis=1)
            for empty in empties:
                donor = int(np.argmax(dist_own))
                labels[donor] = empty
                dist_own[donor] = -1.0  # a point repairs at most one cluster
        for c in range(k):
            members = labels == c
            if members.any():
                centroids[c] = X[members].mean(axis=0)
        history.append(float(((X - centroids[labels]) ** 2).sum()))
        new_labels = _assign(X, centroids)
        if (new_labels == labels).all():
            break
        labels = new_labels
    return labels, centroids, history


def kmeans(X: AttributeMatrix, node_ids: Sequence[str],
           cfg: KMeansConfig) -> Clustering:
    """Cluster nodes by Euclidean distance over included standardized columns.

    Deterministic for a given rng_seed; the assignment comes from the best of
    cfg.restarts runs (lowest WCSS, earliest restart on ties). Cluster labels
    c0..c{k-1} are renumbered by first appearance in node order.
    """
    data = X.included_values()
    n = data.shape[0]
    if cfg.k > n:
        raise ClusteringError(f"k={cfg.k} exceeds node count {n}")
    rng = np.random.default_rng(cfg.rng_seed)
    best: tuple[float, int, np.ndarray] | None = None
    for restart in range(cfg.restarts):
        centroids = _plusplus_seed(data, cfg.k, rng)
        labels, _, history = lloyd(data, centroids, cfg.max_iterations)
        score = history[-1]
        if best is None or score < best[0]:
            best = (score, restart, labels)
    assert best is not None
    labels = best[2]

    renumber: dict[int, str] = {}
    final: list[str] = []
    for raw in labels:
        if int(raw) not in renumber:
            renumber[int(raw)] = f"c{len(renumber)}"
        final.append(renumber[int(raw)])
    return clustering_from_labels(node_ids, final)


def wcss(X: AttributeMatrix, node_ids: Sequence[str],
         clustering: Clustering) -> float:
    """Within-cluster sum of squared Euclidean distances to cluster means."""
    data = X.included_values()
    row_of = {node: i for i, node in enumerate(node_ids)}
    total = 0.0
    for label in clustering.cluster_ids:
        rows = [row_of[node] for node in node_ids if clustering.assignment[node] == label]
        if not rows:
            continue
        block = data[rows]
        total += float(((block - block.mean(axis=0)) ** 2).sum())
    return total
