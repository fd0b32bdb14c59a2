from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from pathml.domain.errors import InsufficientData, InvalidParams
from pathml.ml import Dataset, ForestParams, SplitSpec, temporal_split
from pathml.ml.boosting import EnsembleKind

from .qoe import PROFILES, QoeProfile, QoeWeights
from .report import TASK_IDS, TaskId, TaskReport


def _check_range(name: str, bounds: tuple[float, float], *, floor: float = 0.0) -> None:
    lo, hi = bounds
    if not floor <= lo <= hi:
        raise InvalidParams(f"{name} 需满足 {floor:g} ≤ min ≤ max: {bounds}")


@dataclass(frozen=True, slots=True)
class BenchOptions:
    seed: int = 0
    train_fraction: float = 0.8
    n_trees: int = 100
    n_jobs: int = 1
    # task1
    forecast_window: int = 12
    min_forecast_samples: int = 200
    ensemble: EnsembleKind = "boosting"
    # task2
    failure_window: int = 6
    failure_threshold: float = 0.5
    # task3
    anomaly_window: int = 6
    contamination: float = 0.05
    factor_range: tuple[float, float] = (1.5, 3.0)
    extra_loss_range: tuple[float, float] = (2.0, 10.0)
    # task4
    weights: QoeWeights = field(default_factory=QoeWeights)
    profiles: tuple[QoeProfile, ...] = PROFILES
    # task5
    delay_range: tuple[float, float] = (30.0, 100.0)

    def __post_init__(self) -> None:
        if self.seed < 0:
            raise InvalidParams(f"seed 不能为负: {self.seed}")
        if self.min_forecast_samples < 1:
            raise InvalidParams(f"min_forecast_samples 必须为正: {self.min_forecast_samples}")
        if not 0.0 < self.failure_threshold < 1.0:
            raise InvalidParams(f"failure_threshold 必须在 (0, 1) 内: {self.failure_threshold}")
        _check_range("factor_range", self.factor_range, floor=1.0)
        _check_range("extra_loss_range", self.extra_loss_range)
        _check_range("delay_range", self.delay_range)
        if not self.profiles:
            raise InvalidParams("至少需要一个 QoE profile")
        SplitSpec(self.train_fraction)

    def forest(self) -> ForestParams:
        return ForestParams(n_trees=self.n_trees, seed=self.seed, n_jobs=self.n_jobs)


@dataclass(frozen=True)
class TaskOutcome:
    report: TaskReport
    predictions: pd.DataFrame


def task_rng(seed: int, task: TaskId) -> np.random.Generator:
    """每个任务一条独立随机流，由 (全局 seed, 任务序号) 决定。"""
    return np.random.default_rng([seed, TASK_IDS.index(task) + 1])


def split(dataset: Dataset, options: BenchOptions) -> tuple[Dataset, Dataset]:
    return temporal_split(dataset, SplitSpec(options.train_fraction))


def require_samples(count: int, required: int, what: str) -> None:
    if count < required:
        raise InsufficientData(
            f"{what} 样本不足：需要至少 {required}，实际 {count}",
            details={"required": required, "actual": count, "target": what},
        )
