from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from pathml.domain.errors import EmptyTraining, InvalidParams
from pathml.logger import get_logger

from .dataset import Dataset
from .tree import DecisionTree, TreeParams, fit_tree

ForestTask = Literal["classify", "regress"]
FeatureSubsample = Literal["auto", "sqrt", "third", "all"]


@dataclass(frozen=True, slots=True)
class ForestParams:
    n_trees: int = 100
    max_depth: int = 8
    min_leaf: int = 5
    feature_subsample: FeatureSubsample | int = "auto"
    bootstrap: bool = True
    seed: int = 0
    n_jobs: int = 1

    def __post_init__(self) -> None:
        if self.n_trees < 1 or self.n_jobs < 1:
            raise InvalidParams(f"n_trees / n_jobs 必须为正: {self.n_trees}, {self.n_jobs}")
        if isinstance(self.feature_subsample, int) and self.feature_subsample < 1:
            raise InvalidParams(f"feature_subsample 必须为正: {self.feature_subsample}")
        if self.seed < 0:
            raise InvalidParams(f"seed 不能为负: {self.seed}")

    def features_per_split(self, n_features: int, task: ForestTask) -> int:
        """auto：分类取 sqrt，回归取三分之一（至少 1）。"""
        mode = self.feature_subsample
        if isinstance(mode, int):
            return min(mode, n_features)
        if mode == "auto":
            mode = "sqrt" if task == "classify" else "third"
        if mode == "sqrt":
            return max(1, int(math.sqrt(n_features)))
        if mode == "third":
            return max(1, n_features // 3)
        return n_features


@dataclass
class ForestModel:
    task: ForestTask
    classes: np.ndarray
    n_features: int
    trees: list[DecisionTree] = field(default_factory=list)

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        """各类得票比例（每棵树一票）。"""
        if self.task != "classify":
            raise InvalidParams("回归森林没有类别概率")
        X = np.asarray(X, dtype=float)
        k = len(self.classes)
        votes = np.zeros((X.shape[0], k))
        if not self.trees:
            votes[:, 0] = 1.0
            return votes
        for tree in self.trees:
            votes[np.arange(X.shape[0]), tree.predict(X)] += 1.0
        return votes / len(self.trees)

    def predict(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if self.task == "classify":
            return self.classes[np.argmax(self.predict_proba(X), axis=1)]
        return np.mean([tree.predict(X) for tree in self.trees], axis=0)


def _fit_one(
    index: int,
    X: np.ndarray,
    y: np.ndarray,
    tree_params: TreeParams,
    params: ForestParams,
    n_classes: int | None,
) -> DecisionTree:
    rng = np.random.default_rng([params.seed, index])
    n = X.shape[0]
    rows = rng.integers(0, n, size=n) if params.bootstrap else np.arange(n)
    return fit_tree(X[rows], y[rows], tree_params, n_classes=n_classes, rng=rng)


def fit_forest(train: Dataset, task: ForestTask = "classify", params: ForestParams | None = None) -> ForestModel:
    """
    每棵树的随机流由 (seed, 树序号) 派生，串行与并行（n_jobs > 1）结果一致。
    分类只有一个类别时退化为常数模型并记警告。
    """
    params = params or ForestParams()
    logger = get_logger().bind(category="ml")
    if len(train) == 0:
        raise EmptyTraining("训练集为空")
    X = train.X
    if task == "classify":
        classes, encoded = np.unique(train.y, return_inverse=True)
        if len(classes) < 2:
            logger.warning(f"训练标签只有一个类别 {classes.tolist()}，退化为常数模型")
            return ForestModel(task=task, classes=classes, n_features=train.n_features)
        y = encoded.astype(np.int64)
        n_classes: int | None = len(classes)
        criterion = "gini"
    else:
        classes = np.zeros(0)
        y = np.asarray(train.y, dtype=float)
        n_classes = None
        criterion = "mse"

    tree_params = TreeParams(
        max_depth=params.max_depth,
        min_leaf=params.min_leaf,
        criterion=criterion,
        max_features=params.features_per_split(train.n_features, task),
    )
    indices = range(params.n_trees)
    if params.n_jobs > 1:
        with ThreadPoolExecutor(max_workers=params.n_jobs) as pool:
            trees = list(pool.map(lambda i: _fit_one(i, X, y, tree_params, params, n_classes), indices))
    else:
        trees = [_fit_one(i, X, y, tree_params, params, n_classes) for i in indices]
    logger.debug(f"森林训练完成：{task}，{len(trees)} 棵树，样本 {len(train)}")
    return ForestModel(task=task, classes=classes, n_features=train.n_features, trees=trees)


def predict_forest(model: ForestModel, X: np.ndarray) -> np.ndarray:
    return model.predict(X)


def predict_forest_proba(model: ForestModel, X: np.ndarray) -> np.ndarray:
    return model.predict_proba(X)
