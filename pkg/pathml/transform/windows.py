"""滑动窗口样本：预测（Task 1）、故障预测（Task 2）与逐跳向量（Task 5）。

窗口绝不跨越缺口：序列在不连续的 cycle 处切开，各段独立开窗。
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np
import pandas as pd

from pathml.domain.errors import InvalidParams

ForecastMetric = Literal["rtt_avg", "bw_achieved"]

METRIC_COLUMNS: dict[str, str] = {
    "rtt_avg": "rtt_avg_ms",
    "bw_achieved": "bw_achieved_sc_mbps",
}
FAILURE_WINDOW = 6
HOP_PAD = -1.0
MISSING_BW = -1.0


@dataclass(frozen=True, slots=True)
class WindowSpec:
    n: int = 12
    horizon: int = 1
    stride: int = 1

    def __post_init__(self) -> None:
        if self.n < 1 or self.horizon < 1 or self.stride < 1:
            raise InvalidParams(f"窗口参数必须为正: n={self.n}, horizon={self.horizon}, stride={self.stride}")


@dataclass(frozen=True, slots=True)
class FeatureSample:
    features: tuple[float, ...]
    label: float
    fingerprint: str
    t_index: int
    feature_t: tuple[int, ...] = ()
    hop_count: int = 0


def contiguous_runs(cycles: Sequence[int]) -> list[tuple[int, int]]:
    """[start, end) 下标区间，区间内 cycle 逐一递增。"""
    runs: list[tuple[int, int]] = []
    start = 0
    for i in range(1, len(cycles) + 1):
        if i == len(cycles) or cycles[i] != cycles[i - 1] + 1:
            if i > start:
                runs.append((start, i))
            start = i
    return runs


def _series(rows: pd.DataFrame, column: str) -> tuple[np.ndarray, np.ndarray]:
    """按 cycle 排序并丢掉缺值：缺值本身就是一个缺口。"""
    df = rows[["cycle_index", column]].dropna()
    df = df.drop_duplicates(subset=["cycle_index"], keep="last").sort_values("cycle_index", kind="mergesort")
    return df["cycle_index"].to_numpy(dtype=np.int64), df[column].to_numpy(dtype=float)


def _fingerprint(rows: pd.DataFrame) -> str:
    if "fingerprint" not in rows.columns or rows.empty:
        return ""
    return str(rows["fingerprint"].iloc[0])


def build_forecast_samples(rows: pd.DataFrame, metric: ForecastMetric, spec: WindowSpec) -> list[FeatureSample]:
    """单条路径；连续长度 L 的片段产出 max(0, L − n − horizon + 1) 个样本。"""
    if metric not in METRIC_COLUMNS:
        raise InvalidParams(f"未知的预测指标: {metric}（可选: {', '.join(METRIC_COLUMNS)}）")
    cycles, values = _series(rows, METRIC_COLUMNS[metric])
    fp = _fingerprint(rows)
    out: list[FeatureSample] = []
    for start, end in contiguous_runs(cycles.tolist()):
        last = end - spec.horizon - spec.n
        for i in range(start, last + 1, spec.stride):
            target = i + spec.n - 1 + spec.horizon
            out.append(
                FeatureSample(
                    features=tuple(float(v) for v in values[i : i + spec.n]),
                    label=float(values[target]),
                    fingerprint=fp,
                    t_index=int(cycles[target]),
                    feature_t=tuple(int(c) for c in cycles[i : i + spec.n]),
                )
            )
    return out


def failure_features(rtt: np.ndarray, jitter: float, loss: float, bw: float) -> tuple[float, ...]:
    deltas = np.diff(rtt)
    return (*map(float, rtt), *map(float, deltas), float(jitter), float(loss), float(bw))


def build_failure_samples(rows: pd.DataFrame, k: int = FAILURE_WINDOW) -> list[FeatureSample]:
    """
    单条路径（assemble_path_series 的输出）。特征 = k 个 RTT、k−1 个差分、末步 jitter / loss / 带宽；
    标签 = 下一周期不可用。特征窗内出现不可用的样本丢弃；没测过带宽时记为 -1。
    """
    if k < 2:
        raise InvalidParams(f"故障窗口至少为 2: {k}")
    df = rows.drop_duplicates(subset=["cycle_index"], keep="last").sort_values("cycle_index", kind="mergesort")
    cycles = df["cycle_index"].to_numpy(dtype=np.int64)
    available = df["available"].to_numpy(dtype=np.int64)
    rtt = df["rtt_avg_ms"].to_numpy(dtype=float)
    jitter = df["jitter_ms"].to_numpy(dtype=float)
    loss = df["loss_pct"].to_numpy(dtype=float)
    bw = df["bw_mbps"].to_numpy(dtype=float) if "bw_mbps" in df.columns else np.full(len(df), np.nan)
    fp = _fingerprint(df)

    out: list[FeatureSample] = []
    for start, end in contiguous_runs(cycles.tolist()):
        for t in range(start + k - 1, end - 1):
            span = slice(t - k + 1, t + 1)
            if not available[span].all() or np.isnan(rtt[span]).any():
                continue
            last_bw = MISSING_BW if np.isnan(bw[t]) else bw[t]
            out.append(
                FeatureSample(
                    features=failure_features(rtt[span], jitter[t], loss[t], last_bw),
                    label=float(available[t + 1] == 0),
                    fingerprint=fp,
                    t_index=int(cycles[t + 1]),
                    feature_t=tuple(int(c) for c in cycles[span]),
                )
            )
    return out


def hop_vector(rtts_by_hop: Sequence[float | None]) -> list[float] | None:
    """超时跳沿用前一跳的值；首跳超时（或全部超时）时返回 None。"""
    if not rtts_by_hop or rtts_by_hop[0] is None:
        return None
    out: list[float] = []
    for value in rtts_by_hop:
        out.append(out[-1] if value is None else float(value))
    return out


def build_hop_samples(hop_rows: pd.DataFrame, *, width: int | None = None) -> list[FeatureSample]:
    """
    每条 traceroute 记录一个样本：逐跳平均 RTT 向量，用 -1 补齐到数据集最大跳数（或 width）。
    标签在注入阶段才确定，这里先置 0。
    """
    if hop_rows.empty:
        return []
    df = hop_rows.sort_values(["timestamp_utc", "fingerprint", "hop_index"], kind="mergesort")
    means = df[["rtt1_ms", "rtt2_ms", "rtt3_ms"]].mean(axis=1, skipna=False)
    df = df.assign(mean_ms=means)

    vectors: list[tuple[str, str, list[float]]] = []
    for (ts, fp), group in df.groupby(["timestamp_utc", "fingerprint"], sort=True):
        values = [None if pd.isna(v) else float(v) for v in group["mean_ms"]]
        vector = hop_vector(values)
        if vector is not None:
            vectors.append((str(ts), str(fp), vector))
    if not vectors:
        return []
    size = width if width is not None else max(len(v) for _, _, v in vectors)
    out: list[FeatureSample] = []
    for i, (_, fp, vector) in enumerate(vectors):
        if len(vector) > size:
            continue
        padded = vector + [HOP_PAD] * (size - len(vector))
        out.append(FeatureSample(features=tuple(padded), label=0.0, fingerprint=fp, t_index=i, hop_count=len(vector)))
    return out
