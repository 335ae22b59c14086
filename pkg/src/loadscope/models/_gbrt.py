"""Least-squares gradient boosting over exact-split regression trees."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._base import MinMaxRegressor


@dataclass
class RegressionTree:
    feature: np.ndarray    # -1 marks a leaf
    threshold: np.ndarray  # x <= threshold goes left
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray

    def apply(self, X: np.ndarray) -> np.ndarray:
        node = np.zeros(len(X), dtype=np.int64)
        while True:
            feat = self.feature[node]
            internal = feat >= 0
            if not internal.any():
                return node
            rows = np.flatnonzero(internal)
            go_left = X[rows, feat[rows]] <= self.threshold[node[rows]]
            node[rows] = np.where(go_left, self.left[node[rows]], self.right[node[rows]])

    def predict(self, X: np.ndarray) -> np.ndarray:
        return self.value[self.apply(X)]


def best_split(XT: np.ndarray, r: np.ndarray, S: np.ndarray, min_leaf: int):
    """Exhaustive search over every feature and every cut between distinct sorted values.

    ``S`` holds, per feature, the node's row indices sorted by that feature.
    Returns ``(feature, threshold, position)`` or ``None``; ties go to the
    lowest feature index, then the lowest cut position.
    """
    p, m = S.shape
    if m < 2 * min_leaf:
        return None
    xs = np.take_along_axis(XT, S, axis=1)
    cs = np.cumsum(r[S], axis=1)
    total = cs[:, -1:]
    lo, hi = min_leaf - 1, m - min_leaf  # cut after position i, i in [lo, hi)
    n_left = np.arange(lo + 1, hi + 1, dtype=float)
    sl = cs[:, lo:hi]
    sr = total - sl
    gain = sl**2 / n_left + sr**2 / (m - n_left)
    valid = xs[:, lo:hi] < xs[:, lo + 1:hi + 1]
    if not valid.any():
        return None
    gain = np.where(valid, gain, -np.inf)
    flat = int(np.argmax(gain))
    f, i = divmod(flat, gain.shape[1])
    if gain[f, i] <= float(total[f, 0]) ** 2 / m * (1 + 1e-12) + 1e-300:
        return None
    pos = i + lo
    a, b = xs[f, pos], xs[f, pos + 1]
    thr = (a + b) / 2.0
    if not a <= thr < b:
        thr = a
    return f, float(thr), pos


def fit_tree(X: np.ndarray, r: np.ndarray, max_depth: int, min_leaf: int, order: np.ndarray) -> RegressionTree:
    """Grow a least-squares tree on residuals ``r``; ``order`` is ``argsort(X, axis=0).T``."""
    XT = X.T
    feature, threshold, left, right, value = [], [], [], [], []

    def new_node(rows_sorted):
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        value.append(float(r[rows_sorted[0]].mean()))
        return len(feature) - 1

    stack = [(new_node(order), order, 0)]
    while stack:
        node, S, depth = stack.pop()
        if depth >= max_depth:
            continue
        found = best_split(XT, r, S, min_leaf)
        if found is None:
            continue
        f, thr, pos = found
        goes_left = np.zeros(X.shape[0], dtype=bool)
        goes_left[S[f, : pos + 1]] = True
        in_left = goes_left[S]
        n_left = pos + 1
        S_left = S[in_left].reshape(S.shape[0], n_left)
        S_right = S[~in_left].reshape(S.shape[0], S.shape[1] - n_left)
        feature[node], threshold[node] = f, thr
        left[node] = new_node(S_left)
        right[node] = new_node(S_right)
        stack.append((right[node], S_right, depth + 1))
        stack.append((left[node], S_left, depth + 1))
    return RegressionTree(
        np.asarray(feature, dtype=np.int64),
        np.asarray(threshold),
        np.asarray(left, dtype=np.int64),
        np.asarray(right, dtype=np.int64),
        np.asarray(value),
    )


class GBRTForecaster(MinMaxRegressor):
    """Gradient-boosted regression trees with squared loss.

    Parameters
    ----------
    n_trees : int, default=200
    max_depth : int, default=3
    learning_rate : float, default=0.1
    min_leaf : int, default=5
    seed : int, default=0
        Unused: split search is exhaustive and deterministic.
    """

    def __init__(self, n_trees=200, max_depth=3, learning_rate=0.1, min_leaf=5, seed=0):
        self.n_trees = n_trees
        self.max_depth = max_depth
        self.learning_rate = learning_rate
        self.min_leaf = min_leaf
        self.seed = seed

    def fit(self, X, y):
        Z, y = self._validate_fit(X, y)
        order = np.argsort(Z, axis=0, kind="stable").T.copy()
        self.init_ = float(y.mean())
        pred = np.full(len(y), self.init_)
        self.trees_ = []
        self.train_loss_ = [float(np.mean((y - pred) ** 2))]
        for _ in range(self.n_trees):
            resid = y - pred
            tree = fit_tree(Z, resid, self.max_depth, self.min_leaf, order)
            pred = pred + self.learning_rate * tree.predict(Z)
            self.trees_.append(tree)
            self.train_loss_.append(float(np.mean((y - pred) ** 2)))
        return self

    def staged_predict(self, X):
        Z = self._validate_predict(X)
        pred = np.full(len(Z), self.init_)
        yield pred.copy()
        for tree in self.trees_:
            pred = pred + self.learning_rate * tree.predict(Z)
            yield pred.copy()

    def predict(self, X):
        Z = self._validate_predict(X)
        pred = np.full(len(Z), self.init_)
        for tree in self.trees_:
            pred += self.learning_rate * tree.predict(Z)
        return pred
