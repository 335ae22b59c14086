"""Seeded k-means over word vectors and lexicon-based dimension labelling."""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from importlib import resources
from typing import Mapping, Sequence

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin
from sklearn.utils.validation import check_array, check_is_fitted

from ._validation import ValidationError

UNCLASSIFIED = "unclassified"


@dataclass
class ClusterState:
    centers: np.ndarray
    labels: np.ndarray
    objective: float
    iterations: int
    converged: bool
    history: list[float] = field(default_factory=list)


def _sq_dists(X: np.ndarray, centers: np.ndarray) -> np.ndarray:
    return ((X[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)


def _objective(X, centers, labels) -> float:
    diff = X - centers[labels]
    return float((diff * diff).sum())


def _init_centers(X: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    # k-means++: D^2-weighted draws; duplicates of chosen centers have weight 0
    chosen = [int(rng.integers(len(X)))]
    d2 = ((X - X[chosen[0]]) ** 2).sum(axis=1)
    for _ in range(1, k):
        total = d2.sum()
        idx = int(rng.choice(len(X), p=d2 / total))
        chosen.append(idx)
        d2 = np.minimum(d2, ((X - X[idx]) ** 2).sum(axis=1))
    return X[chosen].copy()


def _update_centers(X: np.ndarray, labels: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
    labels = labels.copy()
    centers = np.zeros((k, X.shape[1]))
    counts = np.bincount(labels, minlength=k)
    for j in range(k):
        if counts[j]:
            centers[j] = X[labels == j].mean(axis=0)
    for j in np.flatnonzero(counts == 0):
        # move the point farthest from its own center into the empty cluster
        counts = np.bincount(labels, minlength=k)
        d = ((X - centers[labels]) ** 2).sum(axis=1)
        d[counts[labels] <= 1] = -1.0
        far = int(np.argmax(d))
        old = labels[far]
        labels[far] = j
        centers[j] = X[far]
        centers[old] = X[labels == old].mean(axis=0)
    return centers, labels


def kmeans(points, k: int = 3, seed: int = 0, max_iter: int = 300) -> ClusterState:
    """Lloyd iterations from a seeded k-means++ start.

    ``history`` records the objective after every assignment step and every
    center update, so it is non-increasing by construction.
    """
    X = np.asarray(points, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.size == 0 or len(X) == 0:
        raise ValidationError("empty input")
    if k < 1 or max_iter < 1:
        raise ValidationError("k and max_iter must be positive")
    n_distinct = len(np.unique(X, axis=0))
    if k > n_distinct:
        raise ValidationError(f"k={k} exceeds the number of distinct points ({n_distinct})")

    rng = np.random.default_rng(seed)
    centers = _init_centers(X, k, rng)
    labels = np.argmin(_sq_dists(X, centers), axis=1)
    history = [_objective(X, centers, labels)]
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        centers, labels = _update_centers(X, labels, k)
        history.append(_objective(X, centers, labels))
        new_labels = np.argmin(_sq_dists(X, centers), axis=1)
        if np.array_equal(new_labels, labels):
            converged = True
            break
        labels = new_labels
        history.append(_objective(X, centers, labels))
    return ClusterState(centers, labels, history[-1], it, converged, history)


class SeededKMeans(ClusterMixin, BaseEstimator):
    """k-means with a reproducible k-means++ start and ``n_init`` seeded restarts.

    Restart ``i`` uses seed ``seed + i``; the lowest objective wins, ties to the
    earliest restart.
    """

    def __init__(self, n_clusters=3, seed=0, max_iter=300, n_init=1):
        self.n_clusters = n_clusters
        self.seed = seed
        self.max_iter = max_iter
        self.n_init = n_init

    def fit(self, X, y=None):
        X = check_array(X, dtype=float)
        best = None
        for i in range(self.n_init):
            state = kmeans(X, self.n_clusters, self.seed + i, self.max_iter)
            if best is None or state.objective < best.objective:
                best = state
        self.state_ = best
        self.cluster_centers_ = best.centers
        self.labels_ = best.labels
        self.inertia_ = best.objective
        self.n_iter_ = best.iterations
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X):
        check_is_fitted(self, "cluster_centers_")
        X = check_array(X, dtype=float)
        return np.argmin(_sq_dists(X, self.cluster_centers_), axis=1)


def default_lexicon() -> dict[str, set[str]]:
    raw = json.loads(resources.files("loadscope").joinpath("data/lexicon.json").read_text("utf-8"))
    return {dim: set(words) for dim, words in raw.items()}


def assign_dimensions(
    labels: Sequence[int] | ClusterState,
    words: Sequence[str],
    seed_lexicon: Mapping[str, set[str]],
) -> dict[str, str]:
    """Label each cluster by majority vote of lexicon hits among its words.

    Clusters without hits become ``"unclassified"``; tied votes go to the
    lexicographically smallest dimension name.
    """
    if not seed_lexicon or not any(seed_lexicon.values()):
        raise ValidationError("empty lexicon")
    if isinstance(labels, ClusterState):
        labels = labels.labels
    labels = list(labels)
    if len(labels) != len(words):
        raise ValidationError(f"{len(words)} words for {len(labels)} cluster labels")

    votes: dict[int, Counter] = {c: Counter() for c in set(labels)}
    for word, c in zip(words, labels):
        for dim, lex in seed_lexicon.items():
            if word in lex:
                votes[c][dim] += 1
    cluster_dim = {}
    for c, counter in votes.items():
        if not counter:
            cluster_dim[c] = UNCLASSIFIED
        else:
            top = max(counter.values())
            cluster_dim[c] = min(d for d, n in counter.items() if n == top)
    return {word: cluster_dim[c] for word, c in zip(words, labels)}
