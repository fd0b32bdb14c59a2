"""Task 4：每个周期、每个 AS 对，按 QoE 得分推荐一条路径，统计各 profile 的满足率。"""

from __future__ import annotations

from typing import Sequence

import pandas as pd

from pathml.domain.errors import NoCandidates
from pathml.logger import get_logger
from pathml.transform.series import assemble_path_series

from .common import BenchOptions, TaskOutcome
from .data import BenchData
from .qoe import Candidate, QoeProfile, QoeWeights, recommend, satisfied
from .report import MetricValue, ProfileRate, task_report

PREDICTION_COLUMNS = [
    "cycle_index",
    "src",
    "dst",
    "candidates",
    "fingerprint",
    "rtt_ms",
    "loss_pct",
    "bw_mbps",
    "score",
    "profile",
    "satisfied",
]


def candidate_frame(measurements: pd.DataFrame) -> pd.DataFrame:
    """可用、且 RTT / 丢包 / （向前填充的）带宽都有值的路径；从未测过带宽的路径不参与推荐。"""
    series = assemble_path_series(measurements)
    series = series[series["available"] == 1]
    return series.dropna(subset=["rtt_avg_ms", "loss_pct", "bw_mbps"])


def evaluate_selection(
    frame: pd.DataFrame,
    profiles: Sequence[QoeProfile],
    weights: QoeWeights,
) -> tuple[list[ProfileRate], pd.DataFrame]:
    hits = {p.name: 0 for p in profiles}
    decisions = 0
    rows: list[dict] = []
    for (cycle, src, dst), group in frame.groupby(["cycle_index", "src", "dst"], sort=True):
        group = group.sort_values("fingerprint", kind="mergesort")
        candidates = [
            Candidate(key=str(r.fingerprint), rtt_ms=float(r.rtt_avg_ms), loss_pct=float(r.loss_pct), bw_mbps=float(r.bw_mbps))
            for r in group.itertuples(index=False)
        ]
        top = recommend(candidates, weights)[0]
        decisions += 1
        for profile in profiles:
            ok = satisfied(top.candidate, profile)
            hits[profile.name] += int(ok)
            rows.append(
                {
                    "cycle_index": int(cycle),
                    "src": src,
                    "dst": dst,
                    "candidates": len(candidates),
                    "fingerprint": top.candidate.key,
                    "rtt_ms": top.candidate.rtt_ms,
                    "loss_pct": top.candidate.loss_pct,
                    "bw_mbps": top.candidate.bw_mbps,
                    "score": top.score,
                    "profile": profile.name,
                    "satisfied": int(ok),
                }
            )
    if decisions == 0:
        raise NoCandidates("没有任何周期存在可推荐的候选路径（需要 RTT、丢包与带宽都有值）")
    rates = [
        ProfileRate(
            profile=p.name,
            max_rtt_ms=p.max_rtt_ms,
            max_loss_pct=p.max_loss_pct,
            min_bw_mbps=p.min_bw_mbps,
            satisfied=hits[p.name],
            decisions=decisions,
            rate=hits[p.name] / decisions,
        )
        for p in profiles
    ]
    return rates, pd.DataFrame(rows, columns=PREDICTION_COLUMNS)


def run_task4(data: BenchData, options: BenchOptions) -> TaskOutcome:
    logger = get_logger().bind(category="bench")
    rates, predictions = evaluate_selection(candidate_frame(data.measurements), options.profiles, options.weights)
    w = options.weights
    report = task_report(
        "task4",
        metrics=[
            MetricValue(model="heuristic", target=r.profile, metric="satisfaction_rate", value=r.rate, train=0, test=r.decisions)
            for r in rates
        ],
        profiles=rates,
        params={"w_rtt": w.w_rtt, "w_loss": w.w_loss, "w_bw": w.w_bw},
    )
    logger.info("task4 完成：" + "，".join(f"{r.profile}={r.rate:.2%}" for r in rates))
    return TaskOutcome(report=report, predictions=predictions)
