"""
Task 3：在测试窗口中按比例注入合成异常（RTT 放大、额外丢包，持续整个窗口），
用干净训练段拟合孤立森林，以 AUC-ROC 评估异常得分。
"""

from __future__ import annotations

import numpy as np
import pandas as pd

from pathml.domain.errors import InvalidContamination, InvalidParams
from pathml.logger import get_logger
from pathml.ml import Dataset, IForestParams, auc_roc, fit_iforest
from pathml.transform.series import assemble_path_series
from pathml.transform.windows import contiguous_runs

from .common import BenchOptions, TaskOutcome, split, task_rng
from .data import BenchData
from .report import MetricValue, task_report

MAX_CONTAMINATION = 0.2
PREDICTION_COLUMNS = ["fingerprint", "t_index", "injected", "score"]


def check_contamination(p: float) -> None:
    if not 0.0 < p <= MAX_CONTAMINATION:
        raise InvalidContamination(f"contamination 必须在 (0, {MAX_CONTAMINATION}] 内: {p}", details={"contamination": p})


def raw_window_dataset(measurements: pd.DataFrame, k: int) -> Dataset:
    """
    每个样本 = 连续 k 个可用周期的原始 RTT / jitter / 丢包，外加路径 RTT 中位数（最后一列，用于归一化）。
    t_index 为窗口末周期。
    """
    if k < 1:
        raise InvalidParams(f"异常检测窗口必须为正: {k}")
    series = assemble_path_series(measurements)
    series = series[series["available"] == 1].dropna(subset=["rtt_avg_ms", "jitter_ms", "loss_pct"])
    rows: list[np.ndarray] = []
    t_index: list[int] = []
    fingerprints: list[str] = []
    for fp, group in series.groupby("fingerprint", sort=True):
        group = group.sort_values("cycle_index", kind="mergesort")
        cycles = group["cycle_index"].to_numpy(dtype=np.int64)
        rtt = group["rtt_avg_ms"].to_numpy(dtype=float)
        jitter = group["jitter_ms"].to_numpy(dtype=float)
        loss = group["loss_pct"].to_numpy(dtype=float)
        scale = float(np.median(rtt))
        if scale <= 0:
            continue
        for start, end in contiguous_runs(cycles.tolist()):
            for t in range(start + k - 1, end):
                span = slice(t - k + 1, t + 1)
                rows.append(np.concatenate([rtt[span], jitter[span], loss[span], [scale]]))
                t_index.append(int(cycles[t]))
                fingerprints.append(str(fp))
    names = (
        [f"rtt_{i}" for i in range(k)] + [f"jitter_{i}" for i in range(k)] + [f"loss_{i}" for i in range(k)] + ["rtt_scale"]
    )
    X = np.array(rows, dtype=float).reshape(len(rows), 3 * k + 1)
    order = np.argsort(np.array(t_index, dtype=np.int64), kind="stable")
    return Dataset(
        X=X[order],
        y=np.zeros(len(rows), dtype=int),
        feature_names=tuple(names),
        t_index=np.array(t_index, dtype=np.int64)[order],
        fingerprint=np.array(fingerprints, dtype=object)[order],
    )


def inject_anomalies(
    raw: Dataset,
    k: int,
    contamination: float,
    factor_range: tuple[float, float],
    extra_loss_range: tuple[float, float],
    rng: np.random.Generator,
) -> Dataset:
    """round(p·n) 个样本：窗口内 RTT 乘以同一个系数，丢包加上同一个百分点（上限 100）；标签置 1。"""
    check_contamination(contamination)
    n = len(raw)
    count = int(round(contamination * n))
    X = raw.X.copy()
    y = np.zeros(n, dtype=int)
    if count:
        picks = np.sort(rng.choice(n, size=count, replace=False))
        factors = rng.uniform(*factor_range, size=count)
        extras = rng.uniform(*extra_loss_range, size=count)
        X[picks, :k] *= factors[:, None]
        X[picks, 2 * k : 3 * k] = np.minimum(X[picks, 2 * k : 3 * k] + extras[:, None], 100.0)
        y[picks] = 1
    return Dataset(X=X, y=y, feature_names=raw.feature_names, t_index=raw.t_index, fingerprint=raw.fingerprint)


def anomaly_features(raw: Dataset, k: int) -> np.ndarray:
    """RTT 与 jitter 除以路径 RTT 中位数，丢包保持原值。"""
    scale = raw.X[:, 3 * k][:, None]
    return np.hstack([raw.X[:, :k] / scale, raw.X[:, k : 2 * k] / scale, raw.X[:, 2 * k : 3 * k]])


def run_task3(data: BenchData, options: BenchOptions) -> TaskOutcome:
    logger = get_logger().bind(category="bench")
    check_contamination(options.contamination)
    k = options.anomaly_window
    train, test = split(raw_window_dataset(data.measurements, k), options)
    test = inject_anomalies(
        test, k, options.contamination, options.factor_range, options.extra_loss_range, task_rng(options.seed, "task3")
    )
    model = fit_iforest(anomaly_features(train, k), IForestParams(n_trees=options.n_trees, seed=options.seed))
    scores = model.score(anomaly_features(test, k))
    injected = int(test.y.sum())
    value = auc_roc(test.y, scores)

    report = task_report(
        "task3",
        metrics=[MetricValue(model="iforest", target="anomaly", metric="auc_roc", value=value, train=len(train), test=len(test))],
        params={
            "window": k,
            "contamination": options.contamination,
            "injected": injected,
            "factor_min": options.factor_range[0],
            "factor_max": options.factor_range[1],
            "extra_loss_min": options.extra_loss_range[0],
            "extra_loss_max": options.extra_loss_range[1],
        },
    )
    predictions = pd.DataFrame(
        {"fingerprint": test.fingerprint.astype(str), "t_index": test.t_index, "injected": test.y, "score": scores},
        columns=PREDICTION_COLUMNS,
    )
    logger.info(f"task3 完成：AUC {value:.4f}（注入 {injected} / {len(test)}）")
    return TaskOutcome(report=report, predictions=predictions)
