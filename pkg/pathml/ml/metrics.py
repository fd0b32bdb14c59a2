from __future__ import annotations

from typing import Sequence

import numpy as np
import pandas as pd

from pathml.domain.errors import LengthMismatch, SingleClassAuc

ArrayLike = Sequence[float] | np.ndarray


def _pair(y_true: ArrayLike, y_pred: ArrayLike) -> tuple[np.ndarray, np.ndarray]:
    a = np.asarray(y_true)
    b = np.asarray(y_pred)
    if a.shape[0] != b.shape[0]:
        raise LengthMismatch(f"长度不一致: {a.shape[0]} != {b.shape[0]}", details={"y": a.shape[0], "pred": b.shape[0]})
    return a, b


def mae(y_true: ArrayLike, y_pred: ArrayLike) -> float:
    a, b = _pair(y_true, y_pred)
    if a.size == 0:
        return 0.0
    return float(np.mean(np.abs(a.astype(float) - b.astype(float))))


def _binary_counts(y_true: ArrayLike, y_pred: ArrayLike, positive: int) -> tuple[int, int, int]:
    a, b = _pair(y_true, y_pred)
    a = a == positive
    b = b == positive
    tp = int(np.sum(a & b))
    fp = int(np.sum(~a & b))
    fn = int(np.sum(a & ~b))
    return tp, fp, fn


def precision(y_true: ArrayLike, y_pred: ArrayLike, *, positive: int = 1) -> float:
    """没有预测为正的样本时记 0。"""
    tp, fp, _ = _binary_counts(y_true, y_pred, positive)
    return tp / (tp + fp) if tp + fp else 0.0


def recall(y_true: ArrayLike, y_pred: ArrayLike, *, positive: int = 1) -> float:
    tp, _, fn = _binary_counts(y_true, y_pred, positive)
    return tp / (tp + fn) if tp + fn else 0.0


def f1(y_true: ArrayLike, y_pred: ArrayLike, *, positive: int = 1) -> float:
    tp, fp, fn = _binary_counts(y_true, y_pred, positive)
    denom = 2 * tp + fp + fn
    return 2 * tp / denom if denom else 0.0


def accuracy(y_true: ArrayLike, y_pred: ArrayLike) -> float:
    a, b = _pair(y_true, y_pred)
    if a.size == 0:
        return 0.0
    return float(np.mean(a == b))


def confusion_matrix(
    y_true: ArrayLike, y_pred: ArrayLike, labels: Sequence[int] | None = None
) -> tuple[list[int], list[list[int]]]:
    """行 = 真实标签，列 = 预测标签；labels 缺省时取两侧出现过的全部标签（升序）。"""
    a, b = _pair(y_true, y_pred)
    ordered = sorted(set(a.tolist()) | set(b.tolist())) if labels is None else list(labels)
    index = {label: i for i, label in enumerate(ordered)}
    table = np.zeros((len(ordered), len(ordered)), dtype=int)
    for t, p in zip(a.tolist(), b.tolist()):
        if t in index and p in index:
            table[index[t], index[p]] += 1
    return [int(x) for x in ordered], table.tolist()


def auc_roc(y_true: ArrayLike, scores: ArrayLike) -> float:
    """秩统计量形式（Mann-Whitney U）；同分按平均秩，相当于给 0.5 分。"""
    a, s = _pair(y_true, scores)
    pos = a == 1
    n_pos = int(pos.sum())
    n_neg = int(a.size - n_pos)
    if n_pos == 0 or n_neg == 0:
        raise SingleClassAuc(
            f"AUC 需要正负两类样本（正 {n_pos}，负 {n_neg}）",
            details={"positives": n_pos, "negatives": n_neg},
        )
    ranks = pd.Series(s.astype(float)).rank(method="average").to_numpy()
    u = ranks[pos].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))
