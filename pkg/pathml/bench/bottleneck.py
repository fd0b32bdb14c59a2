"""
Task 5：在 traceroute 的逐跳累计 RTT 向量上随机选一跳注入额外时延，
多分类森林根据累计向量与一阶差分判断是哪一跳。
"""

from __future__ import annotations

from dataclasses import replace
from typing import Sequence

import numpy as np
import pandas as pd

from pathml.domain.errors import InsufficientHops
from pathml.logger import get_logger
from pathml.ml import Dataset, accuracy, confusion_matrix, dataset_from_samples, fit_forest
from pathml.transform.windows import HOP_PAD, FeatureSample, build_hop_samples

from .common import BenchOptions, TaskOutcome, split, task_rng
from .data import BenchData
from .report import ConfusionTable, MetricValue, task_report

MIN_HOPS = 2
PREDICTION_COLUMNS = ["fingerprint", "t_index", "hop_count", "actual", "predicted", "oracle"]


def task5_inject(
    samples: Sequence[FeatureSample],
    delay_range: tuple[float, float],
    rng: np.random.Generator,
) -> list[FeatureSample]:
    """
    每个样本在真实跳中均匀选一跳 j，位置 ≥ j 的累计 RTT 都加上同一个时延 d ~ U[delay_range]；标签 = j。
    补齐位保持不变。
    """
    out: list[FeatureSample] = []
    for sample in samples:
        hops = sample.hop_count
        if hops < MIN_HOPS:
            raise InsufficientHops(
                f"逐跳向量至少需要 {MIN_HOPS} 个真实跳（{sample.fingerprint} 只有 {hops} 个）",
                details={"fingerprint": sample.fingerprint, "hop_count": hops},
            )
        j = int(rng.integers(0, hops))
        delay = float(rng.uniform(*delay_range))
        vector = np.asarray(sample.features, dtype=float).copy()
        vector[j:hops] += delay
        out.append(replace(sample, features=tuple(float(v) for v in vector), label=float(j)))
    return out


def hop_differences(vector: np.ndarray, hop_count: int) -> np.ndarray:
    """第 i 跳相对前一跳的增量（第 0 跳相对 0）；补齐位记为 HOP_PAD。"""
    diffs = np.full(vector.shape, HOP_PAD)
    real = vector[:hop_count]
    diffs[:hop_count] = np.diff(real, prepend=0.0)
    return diffs


def hop_features(samples: Sequence[FeatureSample]) -> list[FeatureSample]:
    """模型输入：累计向量后接一阶差分。"""
    return [
        replace(sample, features=sample.features + tuple(float(v) for v in hop_differences(np.asarray(sample.features), sample.hop_count)))
        for sample in samples
    ]


def argmax_oracle(X: np.ndarray, hop_counts: np.ndarray) -> np.ndarray:
    """不训练的基准：在真实跳范围内取一阶差分最大的位置。"""
    width = X.shape[1] // 2
    diffs = X[:, width:].copy()
    mask = np.arange(width)[None, :] >= hop_counts[:, None]
    diffs[mask] = -np.inf
    return np.argmax(diffs, axis=1)


def hop_feature_names(width: int) -> list[str]:
    return [f"rtt_hop_{i}" for i in range(width)] + [f"delta_hop_{i}" for i in range(width)]


def _hop_counts(dataset: Dataset, width: int) -> np.ndarray:
    return np.sum(dataset.X[:, :width] != HOP_PAD, axis=1)


def run_task5(data: BenchData, options: BenchOptions) -> TaskOutcome:
    logger = get_logger().bind(category="bench")
    injected = task5_inject(build_hop_samples(data.hops), options.delay_range, task_rng(options.seed, "task5"))
    width = len(injected[0].features) if injected else 0
    dataset = dataset_from_samples(hop_features(injected), hop_feature_names(width), label_dtype=int)
    train, test = split(dataset, options)

    model = fit_forest(train, "classify", options.forest())
    predicted = model.predict(test.X).astype(int)
    oracle = argmax_oracle(test.X, _hop_counts(test, width))
    labels, counts = confusion_matrix(test.y, predicted, labels=list(range(width)))
    metrics = [
        MetricValue(model="forest", target="hop", metric="accuracy", value=accuracy(test.y, predicted), train=len(train), test=len(test)),
        MetricValue(model="oracle", target="hop", metric="accuracy", value=accuracy(test.y, oracle), train=0, test=len(test)),
    ]
    report = task_report(
        "task5",
        metrics=metrics,
        confusion=ConfusionTable(labels=labels, counts=counts),
        params={
            "max_hops": width,
            "delay_min_ms": options.delay_range[0],
            "delay_max_ms": options.delay_range[1],
            "n_trees": options.n_trees,
        },
    )
    predictions = pd.DataFrame(
        {
            "fingerprint": test.fingerprint.astype(str),
            "t_index": test.t_index,
            "hop_count": _hop_counts(test, width),
            "actual": test.y,
            "predicted": predicted,
            "oracle": oracle,
        },
        columns=PREDICTION_COLUMNS,
    )
    logger.info(f"task5 完成：森林准确率 {metrics[0].value:.4f}，差分 argmax 基准 {metrics[1].value:.4f}")
    return TaskOutcome(report=report, predictions=predictions)
