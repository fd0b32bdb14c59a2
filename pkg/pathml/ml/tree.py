"""CART 决策树（gini 分类 / mse 回归），节点存成扁平数组，便于向量化预测和序列化。"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from pathml.domain.errors import EmptyTraining, InvalidParams

Criterion = Literal["gini", "mse"]
LEAF = -1
MIN_GAIN = 1e-12


@dataclass(frozen=True, slots=True)
class TreeParams:
    max_depth: int = 8
    min_leaf: int = 5
    criterion: Criterion = "gini"
    max_features: int | None = None

    def __post_init__(self) -> None:
        if self.max_depth < 1 or self.min_leaf < 1:
            raise InvalidParams(f"max_depth / min_leaf 必须为正: {self.max_depth}, {self.min_leaf}")
        if self.criterion not in ("gini", "mse"):
            raise InvalidParams(f"未知的分裂准则: {self.criterion}")
        if self.max_features is not None and self.max_features < 1:
            raise InvalidParams(f"max_features 必须为正: {self.max_features}")


@dataclass
class DecisionTree:
    """
    feature[i] == LEAF 表示叶子；叶子的 value[i] 对分类是各类概率，对回归是长度 1 的均值。
    走向：x[feature] <= threshold 去左子树。
    """

    criterion: Criterion
    n_outputs: int
    feature: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    threshold: np.ndarray = field(default_factory=lambda: np.zeros(0))
    left: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    right: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    value: np.ndarray = field(default_factory=lambda: np.zeros((0, 1)))

    @property
    def node_count(self) -> int:
        return int(self.feature.shape[0])

    def apply(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        node = np.zeros(X.shape[0], dtype=np.int64)
        active = self.feature[node] != LEAF
        while active.any():
            idx = np.nonzero(active)[0]
            current = node[idx]
            go_left = X[idx, self.feature[current]] <= self.threshold[current]
            node[idx] = np.where(go_left, self.left[current], self.right[current])
            active = self.feature[node] != LEAF
        return node

    def predict_value(self, X: np.ndarray) -> np.ndarray:
        return self.value[self.apply(X)]

    def predict(self, X: np.ndarray) -> np.ndarray:
        values = self.predict_value(X)
        if self.criterion == "mse":
            return values[:, 0]
        return np.argmax(values, axis=1)


def _gini_scores(sorted_y: np.ndarray, n_classes: int) -> np.ndarray:
    n = sorted_y.shape[0]
    onehot = np.zeros((n, n_classes))
    onehot[np.arange(n), sorted_y] = 1.0
    csum = np.cumsum(onehot, axis=0)
    left = csum[:-1]
    right = csum[-1] - left
    n_left = np.arange(1, n, dtype=float)
    n_right = n - n_left
    gini_left = 1.0 - np.sum((left / n_left[:, None]) ** 2, axis=1)
    gini_right = 1.0 - np.sum((right / n_right[:, None]) ** 2, axis=1)
    return (n_left * gini_left + n_right * gini_right) / n


def _mse_scores(sorted_y: np.ndarray) -> np.ndarray:
    n = sorted_y.shape[0]
    s = np.cumsum(sorted_y)
    s2 = np.cumsum(sorted_y**2)
    n_left = np.arange(1, n, dtype=float)
    n_right = n - n_left
    sse_left = s2[:-1] - s[:-1] ** 2 / n_left
    sse_right = (s2[-1] - s2[:-1]) - (s[-1] - s[:-1]) ** 2 / n_right
    return (sse_left + sse_right) / n


def _impurity(y: np.ndarray, criterion: Criterion, n_classes: int) -> float:
    if criterion == "mse":
        return float(np.var(y))
    p = np.bincount(y, minlength=n_classes) / y.shape[0]
    return float(1.0 - np.sum(p**2))


class _Builder:
    def __init__(
        self,
        X: np.ndarray,
        y: np.ndarray,
        params: TreeParams,
        n_classes: int,
        rng: np.random.Generator | None,
    ) -> None:
        self.X = X
        self.y = y
        self.params = params
        self.n_classes = n_classes
        self.rng = rng
        self.feature: list[int] = []
        self.threshold: list[float] = []
        self.left: list[int] = []
        self.right: list[int] = []
        self.value: list[np.ndarray] = []

    def _leaf_value(self, idx: np.ndarray) -> np.ndarray:
        y = self.y[idx]
        if self.params.criterion == "mse":
            return np.array([float(np.mean(y))])
        return np.bincount(y, minlength=self.n_classes) / y.shape[0]

    def _candidate_features(self) -> np.ndarray:
        n_features = self.X.shape[1]
        k = self.params.max_features
        if k is None or k >= n_features or self.rng is None:
            return np.arange(n_features)
        return np.sort(self.rng.choice(n_features, size=k, replace=False))

    def _best_split(self, idx: np.ndarray) -> tuple[int, float, float] | None:
        """同分时取特征序号最小、再取阈值最小的切分。"""
        min_leaf = self.params.min_leaf
        n = idx.shape[0]
        best: tuple[int, float, float] | None = None
        for f in self._candidate_features():
            x = self.X[idx, f]
            order = np.argsort(x, kind="stable")
            xs = x[order]
            ys = self.y[idx][order]
            if self.params.criterion == "mse":
                scores = _mse_scores(ys.astype(float))
            else:
                scores = _gini_scores(ys, self.n_classes)
            pos = np.arange(1, n)
            valid = (xs[1:] > xs[:-1]) & (pos >= min_leaf) & (n - pos >= min_leaf)
            if not valid.any():
                continue
            masked = np.where(valid, scores, np.inf)
            i = int(np.argmin(masked))
            score = float(masked[i])
            if best is None or score < best[2]:
                thr = float((xs[i] + xs[i + 1]) / 2.0)
                if thr >= xs[i + 1]:
                    thr = float(xs[i])
                best = (int(f), thr, score)
        return best

    def _new_node(self) -> int:
        self.feature.append(LEAF)
        self.threshold.append(0.0)
        self.left.append(LEAF)
        self.right.append(LEAF)
        self.value.append(np.zeros(1))
        return len(self.feature) - 1

    def build(self, idx: np.ndarray, depth: int) -> int:
        node = self._new_node()
        self.value[node] = self._leaf_value(idx)
        impurity = _impurity(self.y[idx], self.params.criterion, self.n_classes)
        if depth >= self.params.max_depth or idx.shape[0] < 2 * self.params.min_leaf or impurity <= 0.0:
            return node
        split = self._best_split(idx)
        if split is None or split[2] >= impurity - MIN_GAIN:
            return node
        f, thr, _ = split
        mask = self.X[idx, f] <= thr
        if mask.all() or not mask.any():
            return node
        self.feature[node] = f
        self.threshold[node] = thr
        self.left[node] = self.build(idx[mask], depth + 1)
        self.right[node] = self.build(idx[~mask], depth + 1)
        return node

    def tree(self) -> DecisionTree:
        width = self.n_classes if self.params.criterion == "gini" else 1
        return DecisionTree(
            criterion=self.params.criterion,
            n_outputs=width,
            feature=np.array(self.feature, dtype=np.int64),
            threshold=np.array(self.threshold, dtype=float),
            left=np.array(self.left, dtype=np.int64),
            right=np.array(self.right, dtype=np.int64),
            value=np.vstack(self.value).reshape(len(self.value), width),
        )


def fit_tree(
    X: np.ndarray,
    y: np.ndarray,
    params: TreeParams | None = None,
    *,
    n_classes: int | None = None,
    rng: np.random.Generator | None = None,
) -> DecisionTree:
    """分类时 y 必须是 0..n_classes-1 的整数编码。rng 只用于逐节点特征抽样。"""
    params = params or TreeParams()
    X = np.asarray(X, dtype=float)
    if X.shape[0] == 0:
        raise EmptyTraining("训练集为空")
    if params.criterion == "gini":
        y = np.asarray(y, dtype=np.int64)
        k = int(n_classes if n_classes is not None else y.max() + 1)
    else:
        y = np.asarray(y, dtype=float)
        k = 1
    builder = _Builder(X, y, params, k, rng)
    builder.build(np.arange(X.shape[0]), 0)
    return builder.tree()
