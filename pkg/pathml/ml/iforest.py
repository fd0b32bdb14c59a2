"""孤立森林：随机特征、随机阈值递归切分，异常点平均路径更短。"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from pathml.domain.errors import EmptyTraining, InvalidParams
from pathml.logger import get_logger

LEAF = -1


@dataclass(frozen=True, slots=True)
class IForestParams:
    n_trees: int = 100
    subsample: int = 256
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n_trees < 1 or self.subsample < 2:
            raise InvalidParams(f"n_trees 必须为正、subsample 至少为 2: {self.n_trees}, {self.subsample}")
        if self.seed < 0:
            raise InvalidParams(f"seed 不能为负: {self.seed}")


def average_path_length(n: int) -> float:
    """c(n) = 2H(n−1) − 2(n−1)/n，H 为调和数；c(0) = c(1) = 0。"""
    if n <= 1:
        return 0.0
    harmonic = math.fsum(1.0 / k for k in range(1, n))
    return 2.0 * harmonic - 2.0 * (n - 1) / n


@dataclass
class IsolationTree:
    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    size: np.ndarray
    path: np.ndarray

    def path_length(self, X: np.ndarray) -> np.ndarray:
        node = np.zeros(X.shape[0], dtype=np.int64)
        active = self.feature[node] != LEAF
        while active.any():
            idx = np.nonzero(active)[0]
            current = node[idx]
            go_left = X[idx, self.feature[current]] < self.threshold[current]
            node[idx] = np.where(go_left, self.left[current], self.right[current])
            active = self.feature[node] != LEAF
        return self.path[node]


def _grow(X: np.ndarray, height_limit: int, rng: np.random.Generator) -> IsolationTree:
    feature: list[int] = []
    threshold: list[float] = []
    left: list[int] = []
    right: list[int] = []
    size: list[int] = []
    depth: list[int] = []

    def grow(rows: np.ndarray, level: int) -> int:
        node = len(feature)
        feature.append(LEAF)
        threshold.append(0.0)
        left.append(LEAF)
        right.append(LEAF)
        size.append(int(rows.shape[0]))
        depth.append(level)
        if level >= height_limit or rows.shape[0] <= 1:
            return node
        block = X[rows]
        lo = block.min(axis=0)
        hi = block.max(axis=0)
        splittable = np.nonzero(hi > lo)[0]
        if splittable.size == 0:
            return node
        f = int(splittable[rng.integers(0, splittable.size)])
        thr = float(rng.uniform(lo[f], hi[f]))
        mask = block[:, f] < thr
        if mask.all() or not mask.any():
            return node
        feature[node] = f
        threshold[node] = thr
        left[node] = grow(rows[mask], level + 1)
        right[node] = grow(rows[~mask], level + 1)
        return node

    grow(np.arange(X.shape[0]), 0)
    return IsolationTree(
        feature=np.array(feature, dtype=np.int64),
        threshold=np.array(threshold, dtype=float),
        left=np.array(left, dtype=np.int64),
        right=np.array(right, dtype=np.int64),
        size=np.array(size, dtype=np.int64),
        path=np.array([d + average_path_length(s) for d, s in zip(depth, size)], dtype=float),
    )


@dataclass
class IForestModel:
    subsample: int
    n_features: int
    trees: list[IsolationTree] = field(default_factory=list)

    def score(self, X: np.ndarray) -> np.ndarray:
        """s(x) = 2^(−E[h(x)] / c(ψ))，越大越异常。"""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        mean_path = np.mean([tree.path_length(X) for tree in self.trees], axis=0)
        return np.power(2.0, -mean_path / average_path_length(self.subsample))


def fit_iforest(X_train: np.ndarray, params: IForestParams | None = None) -> IForestModel:
    """子样本大小超过训练集时截到训练集大小；高度上限 ceil(log2 ψ)。"""
    params = params or IForestParams()
    X = np.atleast_2d(np.asarray(X_train, dtype=float))
    n = X.shape[0] if np.asarray(X_train).size else 0
    if n == 0:
        raise EmptyTraining("孤立森林的训练集为空")
    psi = min(params.subsample, n)
    if psi < params.subsample:
        get_logger().bind(category="ml").debug(f"subsample {params.subsample} 超过训练集 {n}，截为 {psi}")
    height_limit = max(1, math.ceil(math.log2(psi))) if psi > 1 else 0
    trees = []
    for i in range(params.n_trees):
        rng = np.random.default_rng([params.seed, i])
        rows = rng.choice(n, size=psi, replace=False)
        trees.append(_grow(X[rows], height_limit, rng))
    return IForestModel(subsample=max(psi, 2), n_features=X.shape[1], trees=trees)


def anomaly_score(model: IForestModel, x: np.ndarray) -> np.ndarray | float:
    """单个向量返回 float，矩阵返回逐行分数。"""
    arr = np.asarray(x, dtype=float)
    scores = model.score(arr)
    return float(scores[0]) if arr.ndim == 1 else scores
