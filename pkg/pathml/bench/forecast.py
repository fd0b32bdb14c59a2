"""Task 1：用最近 n 个周期的实测值预测下一周期的 RTT 与带宽。"""

from __future__ import annotations

import numpy as np
import pandas as pd

from pathml.logger import get_logger
from pathml.ml import BoostingParams, Dataset, dataset_from_samples, fit_linreg, fit_tree_ensemble_regressor, mae
from pathml.transform.series import assemble_path_series, bandwidth_series
from pathml.transform.windows import METRIC_COLUMNS, FeatureSample, ForecastMetric, WindowSpec, build_forecast_samples

from .common import BenchOptions, TaskOutcome, require_samples, split
from .data import BenchData
from .report import MetricValue, task_report

PREDICTION_COLUMNS = ["target", "model", "fingerprint", "t_index", "actual", "predicted"]


def lag_names(n: int) -> list[str]:
    return [f"lag_{n - i}" for i in range(n)]


def _per_path(frame: pd.DataFrame, metric: ForecastMetric, spec: WindowSpec) -> list[FeatureSample]:
    out: list[FeatureSample] = []
    for _, rows in frame.groupby("fingerprint", sort=True):
        out.extend(build_forecast_samples(rows, metric, spec))
    return out


def rtt_samples(measurements: pd.DataFrame, spec: WindowSpec) -> list[FeatureSample]:
    series = assemble_path_series(measurements)
    return _per_path(series, "rtt_avg", spec)


def bandwidth_samples(measurements: pd.DataFrame, spec: WindowSpec) -> list[FeatureSample]:
    """只用固定路径上的单路带宽测试：并发测试每周期随机选路，序列不连续。"""
    bw = bandwidth_series(measurements, include_concurrent=False)
    bw = bw.rename(columns={"bw_mbps": METRIC_COLUMNS["bw_achieved"]})
    return _per_path(bw, "bw_achieved", spec)


def _frame(target: str, model: str, test: Dataset, predicted: np.ndarray) -> pd.DataFrame:
    return pd.DataFrame(
        {
            "target": target,
            "model": model,
            "fingerprint": test.fingerprint.astype(str),
            "t_index": test.t_index,
            "actual": test.y,
            "predicted": predicted,
        },
        columns=PREDICTION_COLUMNS,
    )


def run_task1(data: BenchData, options: BenchOptions) -> TaskOutcome:
    logger = get_logger().bind(category="bench")
    spec = WindowSpec(n=options.forecast_window)
    names = lag_names(spec.n)
    metrics: list[MetricValue] = []
    frames: list[pd.DataFrame] = []

    rtt = dataset_from_samples(rtt_samples(data.measurements, spec), names)
    bw = dataset_from_samples(bandwidth_samples(data.measurements, spec), names)
    require_samples(len(rtt), options.min_forecast_samples, "rtt")
    require_samples(len(bw), options.min_forecast_samples, "bw")

    train, test = split(rtt, options)
    predicted = fit_linreg(train).predict(test.X)
    metrics.append(MetricValue(model="linreg", target="rtt", metric="mae", value=mae(test.y, predicted), train=len(train), test=len(test)))
    frames.append(_frame("rtt", "linreg", test, predicted))

    train, test = split(bw, options)
    ensemble_params = BoostingParams(kind=options.ensemble, forest=options.forest())
    for model_id, model in (
        ("linreg", fit_linreg(train)),
        ("ensemble", fit_tree_ensemble_regressor(train, ensemble_params)),
    ):
        predicted = model.predict(test.X)
        metrics.append(MetricValue(model=model_id, target="bw", metric="mae", value=mae(test.y, predicted), train=len(train), test=len(test)))
        frames.append(_frame("bw", model_id, test, predicted))

    report = task_report(
        "task1",
        metrics=metrics,
        params={"window": spec.n, "horizon": spec.horizon, "ensemble": options.ensemble, "train_fraction": options.train_fraction},
    )
    logger.info("task1 完成：" + "，".join(f"{m.key}={m.value:.4f}" for m in metrics))
    return TaskOutcome(report=report, predictions=pd.concat(frames, ignore_index=True))
