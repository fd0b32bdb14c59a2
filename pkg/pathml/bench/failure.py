"""Task 2：由最近 k 个周期的表现预测路径在下一周期是否不可用。"""

from __future__ import annotations

import numpy as np
import pandas as pd

from pathml.domain.errors import DegenerateLabels
from pathml.logger import get_logger
from pathml.ml import dataset_from_samples, f1, fit_forest, precision, recall
from pathml.transform.series import assemble_path_series
from pathml.transform.windows import FeatureSample, build_failure_samples

from .common import BenchOptions, TaskOutcome, split
from .data import BenchData
from .report import MetricValue, task_report

PREDICTION_COLUMNS = ["fingerprint", "t_index", "actual", "score", "predicted"]


def failure_feature_names(k: int) -> list[str]:
    return (
        [f"rtt_{i}" for i in range(k)]
        + [f"rtt_delta_{i}" for i in range(1, k)]
        + ["jitter_last", "loss_last", "bw_last"]
    )


def failure_samples(measurements: pd.DataFrame, k: int) -> list[FeatureSample]:
    series = assemble_path_series(measurements)
    out: list[FeatureSample] = []
    for _, rows in series.groupby("fingerprint", sort=True):
        out.extend(build_failure_samples(rows, k))
    return out


def run_task2(data: BenchData, options: BenchOptions) -> TaskOutcome:
    """森林分类器；正类得票比例达到阈值（默认 0.5）即判为故障。"""
    logger = get_logger().bind(category="bench")
    k = options.failure_window
    dataset = dataset_from_samples(failure_samples(data.measurements, k), failure_feature_names(k), label_dtype=int)
    train, test = split(dataset, options)
    train_positives = int(train.y.sum())
    if train_positives == 0 or train_positives == len(train):
        raise DegenerateLabels(
            f"训练集只有一个类别（正样本 {train_positives} / {len(train)}）",
            details={"positives": train_positives, "samples": len(train)},
        )

    model = fit_forest(train, "classify", options.forest())
    positive = int(np.nonzero(model.classes == 1)[0][0])
    score = model.predict_proba(test.X)[:, positive]
    predicted = (score >= options.failure_threshold).astype(int)
    metrics = [
        MetricValue(model="forest", target="failure", metric=name, value=fn(test.y, predicted), train=len(train), test=len(test))
        for name, fn in (("f1", f1), ("precision", precision), ("recall", recall))
    ]
    report = task_report(
        "task2",
        metrics=metrics,
        params={
            "window": k,
            "threshold": options.failure_threshold,
            "n_trees": options.n_trees,
            "train_positives": train_positives,
            "test_positives": int(test.y.sum()),
        },
    )
    predictions = pd.DataFrame(
        {
            "fingerprint": test.fingerprint.astype(str),
            "t_index": test.t_index,
            "actual": test.y,
            "score": score,
            "predicted": predicted,
        },
        columns=PREDICTION_COLUMNS,
    )
    logger.info(f"task2 完成：F1 {metrics[0].value:.4f}，precision {metrics[1].value:.4f}，recall {metrics[2].value:.4f}")
    return TaskOutcome(report=report, predictions=predictions)
