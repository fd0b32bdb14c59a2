from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from pathml.domain.errors import EmptyTraining, InvalidParams, SingularSystem

from .dataset import Dataset

DEFAULT_RIDGE_LAMBDA = 1e-8
NUMERIC_RIDGE_LIMIT = 1e-6


@dataclass(frozen=True)
class LinearModel:
    coef: np.ndarray
    intercept: float
    ridge_lambda: float = DEFAULT_RIDGE_LAMBDA

    def predict(self, X: np.ndarray) -> np.ndarray:
        return np.asarray(X, dtype=float) @ self.coef + self.intercept


def ridge_gradient(model: LinearModel, X: np.ndarray, y: np.ndarray) -> np.ndarray:
    """目标 Σ(y − Xβ − b)² + λ‖β‖² 对 β 的解析梯度（截距不受惩罚）。"""
    residual = np.asarray(y, dtype=float) - model.predict(X)
    return -2.0 * np.asarray(X, dtype=float).T @ residual + 2.0 * model.ridge_lambda * model.coef


def fit_linreg(train: Dataset, ridge_lambda: float = DEFAULT_RIDGE_LAMBDA) -> LinearModel:
    """
    中心化后解正规方程 (XᵀX + λI)β = Xᵀy，截距由均值回代。
    λ 低于 NUMERIC_RIDGE_LIMIT 时只起数值稳定作用，按 λ → 0⁺ 的极限取最小范数最小二乘解；
    λ = 0 且列线性相关时报 SingularSystem。
    """
    if ridge_lambda < 0:
        raise InvalidParams(f"ridge_lambda 不能为负: {ridge_lambda}")
    if len(train) == 0:
        raise EmptyTraining("训练集为空")
    X = train.X
    y = np.asarray(train.y, dtype=float)
    x_mean = X.mean(axis=0)
    y_mean = float(y.mean())
    Xc = X - x_mean
    gram = Xc.T @ Xc + ridge_lambda * np.eye(X.shape[1])
    rhs = Xc.T @ (y - y_mean)
    if ridge_lambda == 0.0 and np.linalg.matrix_rank(gram) < X.shape[1]:
        raise SingularSystem("正规方程奇异（λ=0 且特征列线性相关）", details={"features": X.shape[1]})
    try:
        if 0.0 < ridge_lambda < NUMERIC_RIDGE_LIMIT:
            coef = np.linalg.lstsq(Xc, y - y_mean, rcond=None)[0]
        else:
            coef = np.linalg.solve(gram, rhs)
    except np.linalg.LinAlgError as exc:
        raise SingularSystem(f"正规方程无法求解: {exc}") from exc
    intercept = y_mean - float(x_mean @ coef)
    return LinearModel(coef=coef, intercept=intercept, ridge_lambda=ridge_lambda)


def predict_linreg(model: LinearModel, X: np.ndarray) -> np.ndarray:
    return model.predict(X)
