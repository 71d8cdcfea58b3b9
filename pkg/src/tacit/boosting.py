"""Gradient-boosted regression trees, exact greedy splits, squared error.

Self-contained and fully deterministic: splits scan every feature in
index order with stable sorts, thresholds fall midway between distinct
values, and ties keep the first candidate found. No row or feature
subsampling, so the seed argument exists only for interface parity.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["BoostingParams", "RegressionTree", "GradientBoostedRegressor", "fit", "score"]

_MIN_GAIN = 1e-12


@dataclass
class BoostingParams:
    n_trees: int = 100
    learning_rate: float = 0.1
    max_depth: int = 3
    min_leaf: int = 5


class RegressionTree:
    """One fitted tree stored as parallel node arrays for batch predict."""

    def __init__(self):
        self.feature: list[int] = []
        self.threshold: list[float] = []
        self.left: list[int] = []
        self.right: list[int] = []
        self.value: list[float] = []

    def _new_node(self) -> int:
        self.feature.append(-1)
        self.threshold.append(0.0)
        self.left.append(-1)
        self.right.append(-1)
        self.value.append(0.0)
        return len(self.feature) - 1

    def fit(self, X: np.ndarray, residual: np.ndarray, max_depth: int, min_leaf: int) -> "RegressionTree":
        self._grow(X, residual, np.arange(len(residual)), depth=0, max_depth=max_depth, min_leaf=min_leaf)
        self._feature_arr = np.asarray(self.feature)
        self._threshold_arr = np.asarray(self.threshold)
        self._left_arr = np.asarray(self.left)
        self._right_arr = np.asarray(self.right)
        self._value_arr = np.asarray(self.value)
        return self

    def _grow(self, X, residual, idx, depth, max_depth, min_leaf) -> int:
        node = self._new_node()
        values = residual[idx]
        self.value[node] = float(values.mean())
        if depth >= max_depth or len(idx) < 2 * min_leaf:
            return node
        split = _best_split(X, residual, idx, min_leaf)
        if split is None:
            return node
        feat, thr = split
        mask = X[idx, feat] <= thr
        self.feature[node] = feat
        self.threshold[node] = thr
        self.left[node] = self._grow(X, residual, idx[mask], depth + 1, max_depth, min_leaf)
        self.right[node] = self._grow(X, residual, idx[~mask], depth + 1, max_depth, min_leaf)
        return node

    def predict(self, X: np.ndarray) -> np.ndarray:
        node = np.zeros(len(X), dtype=np.int64)
        while True:
            feats = self._feature_arr[node]
            active = feats >= 0
            if not active.any():
                break
            rows = np.nonzero(active)[0]
            go_left = X[rows, feats[rows]] <= self._threshold_arr[node[rows]]
            node[rows] = np.where(go_left, self._left_arr[node[rows]], self._right_arr[node[rows]])
        return self._value_arr[node]


def _best_split(X, residual, idx, min_leaf):
    """Exact best (feature, threshold) by squared-error reduction.

    Ties resolve to the lowest feature index and then the lowest
    threshold, which strict improvement comparisons give for free.
    """
    values = residual[idx]
    n = len(values)
    total = values.sum()
    parent_sse = float((values**2).sum() - total**2 / n)
    best_gain = _MIN_GAIN
    best = None
    for feat in range(X.shape[1]):
        col = X[idx, feat]
        order = np.argsort(col, kind="stable")
        xs = col[order]
        rs = values[order]
        csum = np.cumsum(rs)
        csq = np.cumsum(rs**2)
        # candidate split after position i (1-based left size)
        left_n = np.arange(1, n)
        valid = (xs[:-1] < xs[1:]) & (left_n >= min_leaf) & (n - left_n >= min_leaf)
        if not valid.any():
            continue
        li = np.nonzero(valid)[0]
        ln = left_n[li]
        lsum = csum[li]
        lsq = csq[li]
        sse_left = lsq - lsum**2 / ln
        rn = n - ln
        rsum = total - lsum
        sse_right = (csq[-1] - lsq) - rsum**2 / rn
        gains = parent_sse - (sse_left + sse_right)
        k = int(np.argmax(gains))
        if gains[k] > best_gain:
            best_gain = float(gains[k])
            pos = li[k]
            best = (feat, float((xs[pos] + xs[pos + 1]) / 2.0))
    return best


class GradientBoostedRegressor:
    """Additive stage-wise model: mean baseline plus shrunken trees."""

    def __init__(self, params: BoostingParams | None = None, seed: int = 0):
        self.params = params or BoostingParams()
        self.seed = seed  # unused: exact splits need no randomness
        self.base_value = 0.0
        self.trees: list[RegressionTree] = []
        self.train_losses: list[float] = []

    def fit(self, X: np.ndarray, y: np.ndarray) -> "GradientBoostedRegressor":
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        if X.ndim != 2:
            raise ValueError("X must be 2-dimensional")
        if len(X) != len(y):
            raise ValueError("X and targets must have the same number of rows")
        if len(X) < 2:
            raise ValueError("need at least 2 rows to fit")
        if np.isnan(X).any():
            raise ValueError("NaN in feature matrix")
        if np.isnan(y).any():
            raise ValueError("NaN in targets")
        p = self.params
        self.base_value = float(y.mean())
        self.trees = []
        self.train_losses = []
        pred = np.full(len(y), self.base_value)
        for _ in range(p.n_trees):
            residual = y - pred
            tree = RegressionTree().fit(X, residual, p.max_depth, p.min_leaf)
            pred = pred + p.learning_rate * tree.predict(X)
            self.trees.append(tree)
            self.train_losses.append(float(np.mean((y - pred) ** 2)))
        return self

    def predict(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if np.isnan(X).any():
            raise ValueError("NaN in feature matrix")
        out = np.full(len(X), self.base_value)
        lr = self.params.learning_rate
        for tree in self.trees:
            out += lr * tree.predict(X)
        return out

    def to_arrays(self) -> dict:
        """Dump the fitted ensemble as plain arrays for audit/export."""
        return {
            "base_value": self.base_value,
            "params": vars(self.params),
            "trees": [
                {
                    "feature": t.feature,
                    "threshold": t.threshold,
                    "left": t.left,
                    "right": t.right,
                    "value": t.value,
                }
                for t in self.trees
            ],
        }


def fit(X, targets, params: BoostingParams | None = None, seed: int = 0) -> GradientBoostedRegressor:
    """Train a squared-error boosted-tree regressor on (X, targets)."""
    return GradientBoostedRegressor(params, seed).fit(X, targets)


def score(f1: GradientBoostedRegressor, f2: GradientBoostedRegressor, X) -> np.ndarray:
    """Combined claim priority: clamped check-worthiness times clamped virality."""
    worthiness = np.clip(f1.predict(X), 0.0, 1.0)
    engagement = np.clip(f2.predict(X), 0.0, None)
    return worthiness * engagement
