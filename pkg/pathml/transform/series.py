"""按 (fingerprint, cycle) 对齐 ping、可用性与带宽，得到每条路径的时间序列。"""

from __future__ import annotations

import pandas as pd

from pathml.domain.enums import Category

SERIES_COLUMNS = [
    "fingerprint",
    "src",
    "dst",
    "cycle_index",
    "timestamp_utc",
    "rtt_avg_ms",
    "jitter_ms",
    "loss_pct",
    "available",
    "bw_mbps",
]

BW_CATEGORIES = (Category.BANDWIDTH.value, Category.MP_BANDWIDTH.value)


def bandwidth_series(frame: pd.DataFrame, *, include_concurrent: bool = True) -> pd.DataFrame:
    """每条路径每个周期一个值：所有档位（以及并发测试）里最高的 sc 实测带宽。"""
    cats = BW_CATEGORIES if include_concurrent else (Category.BANDWIDTH.value,)
    bw = frame[frame["category"].isin(cats) & (frame["fingerprint"] != "")]
    bw = bw.dropna(subset=["bw_achieved_sc_mbps"])
    out = (
        bw.groupby(["fingerprint", "cycle_index"], sort=True)["bw_achieved_sc_mbps"]
        .max()
        .rename("bw_mbps")
        .reset_index()
    )
    out["cycle_index"] = out["cycle_index"].astype("int64")
    return out


def assemble_path_series(frame: pd.DataFrame) -> pd.DataFrame:
    """
    以非并发 ping 行为骨架：
    - comparer 报告撤回、但该周期没有 ping 的路径补一行 available=0；
    - 带宽按路径向前填充（之前从未测过的周期保持 NaN）。
    """
    ping = frame[(frame["category"] == Category.PING.value) & (frame["concurrent"] == 0) & (frame["fingerprint"] != "")]
    base = ping[["fingerprint", "src", "dst", "cycle_index", "timestamp_utc", "rtt_avg_ms", "jitter_ms", "loss_pct", "available"]]
    base = base.drop_duplicates(subset=["fingerprint", "cycle_index"], keep="last")

    removed = frame[(frame["category"] == Category.COMPARER.value) & (frame["available"] == 0)]
    if not removed.empty:
        removed = removed[["fingerprint", "src", "dst", "cycle_index", "timestamp_utc", "available"]]
        known = pd.MultiIndex.from_frame(base[["fingerprint", "cycle_index"]])
        keys = pd.MultiIndex.from_frame(removed[["fingerprint", "cycle_index"]])
        base = pd.concat([base, removed[~keys.isin(known)]], ignore_index=True)

    series = base.astype({"cycle_index": "int64", "available": "int64"})
    series = series.sort_values(["fingerprint", "cycle_index"], kind="mergesort").reset_index(drop=True)

    bw = bandwidth_series(frame)
    series = series.merge(bw, on=["fingerprint", "cycle_index"], how="left")
    series["bw_mbps"] = series.groupby("fingerprint", sort=False)["bw_mbps"].ffill()
    return series[SERIES_COLUMNS]
