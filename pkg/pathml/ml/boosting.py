"""树集成回归器：默认是平方损失的梯度提升（浅层回归树拟合残差），也可切换成森林回归。"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from pathml.domain.errors import EmptyTraining, InvalidParams
from pathml.logger import get_logger

from .dataset import Dataset
from .forest import ForestModel, ForestParams, fit_forest
from .linreg import DEFAULT_RIDGE_LAMBDA, LinearModel, fit_linreg
from .tree import DecisionTree, TreeParams, fit_tree

EnsembleKind = Literal["boosting", "forest"]
BoostingInit = Literal["linear", "mean"]


@dataclass(frozen=True, slots=True)
class BoostingParams:
    kind: EnsembleKind = "boosting"
    n_rounds: int = 100
    learning_rate: float = 0.1
    max_depth: int = 3
    min_leaf: int = 5
    init: BoostingInit = "linear"
    ridge_lambda: float = DEFAULT_RIDGE_LAMBDA
    forest: ForestParams = field(default_factory=ForestParams)

    def __post_init__(self) -> None:
        if self.kind not in ("boosting", "forest"):
            raise InvalidParams(f"未知的集成类型: {self.kind}")
        if self.init not in ("linear", "mean"):
            raise InvalidParams(f"未知的初始估计: {self.init}")
        if self.n_rounds < 1 or not 0.0 < self.learning_rate <= 1.0:
            raise InvalidParams(f"n_rounds 必须为正、learning_rate ∈ (0, 1]: {self.n_rounds}, {self.learning_rate}")


@dataclass
class BoostingModel:
    learning_rate: float
    base: LinearModel | None
    base_value: float
    trees: list[DecisionTree] = field(default_factory=list)

    def predict(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        out = self.base.predict(X) if self.base is not None else np.full(X.shape[0], self.base_value)
        for tree in self.trees:
            out = out + self.learning_rate * tree.predict(X)
        return out


def fit_boosting(train: Dataset, params: BoostingParams | None = None) -> BoostingModel:
    params = params or BoostingParams()
    if len(train) == 0:
        raise EmptyTraining("训练集为空")
    X = train.X
    y = np.asarray(train.y, dtype=float)
    if params.init == "linear":
        base: LinearModel | None = fit_linreg(train, params.ridge_lambda)
        pred = base.predict(X)
    else:
        base = None
        pred = np.full(X.shape[0], float(y.mean()))
    model = BoostingModel(learning_rate=params.learning_rate, base=base, base_value=float(y.mean()))
    tree_params = TreeParams(max_depth=params.max_depth, min_leaf=params.min_leaf, criterion="mse")
    for _ in range(params.n_rounds):
        residual = y - pred
        tree = fit_tree(X, residual, tree_params)
        if tree.node_count == 1 and abs(float(tree.value[0, 0])) < 1e-12:
            break
        model.trees.append(tree)
        pred = pred + params.learning_rate * tree.predict(X)
    get_logger().bind(category="ml").debug(f"梯度提升训练完成：{len(model.trees)} 轮，样本 {len(train)}")
    return model


def fit_tree_ensemble_regressor(train: Dataset, params: BoostingParams | None = None) -> BoostingModel | ForestModel:
    params = params or BoostingParams()
    if params.kind == "forest":
        return fit_forest(train, "regress", params.forest)
    return fit_boosting(train, params)
