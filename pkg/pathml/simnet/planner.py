"""按速率自动生成事件计划（故障 / 异常 / 瓶颈）。"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from pathml.domain.enums import EventKind
from pathml.domain.errors import InvalidSpec

from .models import EventPlan, GroundTruthEvent
from .net import SimNet

PLACEMENT_ATTEMPTS = 2000


@dataclass(frozen=True, slots=True)
class PlanRates:
    failures_per_week: float = 0.0
    abrupt_fraction: float = 0.2
    precursor_choices: tuple[int, ...] = (2, 3, 4)
    failure_duration: tuple[int, int] = (2, 6)
    anomaly_contamination: float = 0.0
    anomaly_duration: tuple[int, int] = (1, 3)
    rtt_factor: tuple[float, float] = (1.5, 3.0)
    extra_loss_pct: tuple[float, float] = (2.0, 10.0)
    bottleneck_count: int = 0
    bottleneck_duration: tuple[int, int] = (1, 4)
    added_delay_ms: tuple[float, float] = (30.0, 100.0)
    # 相邻事件（含前兆）之间至少留出的干净周期，保证事件前有完整的特征窗口。
    min_gap_cycles: int = 8


def is_abrupt(index: int, fraction: float) -> bool:
    """轮转分配：前 n 个故障中恰好 round-down(n·fraction) 个为突发故障。"""
    return math.floor((index + 1) * fraction) > math.floor(index * fraction)


class _Occupancy:
    def __init__(self, gap: int) -> None:
        self._gap = gap
        self._spans: dict[str, list[tuple[int, int]]] = {}

    def free(self, fingerprint: str, first: int, end: int) -> bool:
        for a, b in self._spans.get(fingerprint, []):
            if first < b + self._gap and a < end + self._gap:
                return False
        return True

    def take(self, fingerprint: str, first: int, end: int) -> None:
        self._spans.setdefault(fingerprint, []).append((first, end))


def auto_plan(
    sim: SimNet,
    *,
    cycles: int,
    rates: PlanRates,
    seed: int | None = None,
    fingerprints: Sequence[str] | None = None,
) -> EventPlan:
    """
    在 [0, cycles) 内随机摆放事件，同一路径上的事件（含前兆与间隔）互不重叠。
    fingerprints 限定候选路径（例如只放在 campaign 实际测量的路径上）；异常数按候选路径数计算。
    摆不下时抛 InvalidSpec，而不是悄悄少放。
    """
    if cycles <= 0:
        raise InvalidSpec(f"cycles 必须为正: {cycles}")
    if not 0.0 <= rates.abrupt_fraction <= 1.0:
        raise InvalidSpec(f"abrupt_fraction 需在 [0, 1]: {rates.abrupt_fraction}")
    if not 0.0 <= rates.anomaly_contamination < 1.0:
        raise InvalidSpec(f"anomaly_contamination 需在 [0, 1): {rates.anomaly_contamination}")

    rng = np.random.default_rng([sim.spec.seed if seed is None else seed, 7])
    if fingerprints is None:
        fingerprints = [p.fingerprint for p in sim.all_paths()]
    else:
        fingerprints = [sim.path(fp).fingerprint for fp in fingerprints]
    if not fingerprints:
        raise InvalidSpec("没有可放置事件的路径")
    occupancy = _Occupancy(rates.min_gap_cycles)
    events: list[GroundTruthEvent] = []

    def place(kind: EventKind, duration: int, precursor: int, make) -> None:
        lead = precursor + rates.min_gap_cycles
        latest = cycles - duration
        if latest <= lead:
            raise InvalidSpec(f"周期数 {cycles} 不足以放下 {kind.value} 事件")
        for _ in range(PLACEMENT_ATTEMPTS):
            fingerprint = fingerprints[int(rng.integers(len(fingerprints)))]
            start = int(rng.integers(lead, latest))
            if occupancy.free(fingerprint, start - precursor, start + duration):
                occupancy.take(fingerprint, start - precursor, start + duration)
                events.append(make(fingerprint, start))
                return
        raise InvalidSpec(f"无法在 {cycles} 个周期内摆放更多 {kind.value} 事件（请降低速率或增加周期）")

    cycles_per_week = 7 * sim.spec.cycles_per_day
    failures = int(round(rates.failures_per_week * cycles / cycles_per_week))
    for i in range(failures):
        precursor = 0 if is_abrupt(i, rates.abrupt_fraction) else int(rng.choice(rates.precursor_choices))
        duration = int(rng.integers(rates.failure_duration[0], rates.failure_duration[1] + 1))
        place(
            EventKind.FAILURE,
            duration,
            precursor,
            lambda fp, start, d=duration, k=precursor: GroundTruthEvent(
                kind=EventKind.FAILURE, fingerprint=fp, start_cycle=start, duration_cycles=d, precursor_cycles=k
            ),
        )

    mean_anomaly = (rates.anomaly_duration[0] + rates.anomaly_duration[1]) / 2.0
    anomalies = int(round(rates.anomaly_contamination * len(fingerprints) * cycles / mean_anomaly))
    for _ in range(anomalies):
        duration = int(rng.integers(rates.anomaly_duration[0], rates.anomaly_duration[1] + 1))
        factor = float(rng.uniform(*rates.rtt_factor))
        extra = float(rng.uniform(*rates.extra_loss_pct))
        place(
            EventKind.ANOMALY,
            duration,
            0,
            lambda fp, start, d=duration, f=factor, x=extra: GroundTruthEvent(
                kind=EventKind.ANOMALY, fingerprint=fp, start_cycle=start, duration_cycles=d, rtt_factor=f, extra_loss_pct=x
            ),
        )

    for _ in range(rates.bottleneck_count):
        duration = int(rng.integers(rates.bottleneck_duration[0], rates.bottleneck_duration[1] + 1))
        delay = float(rng.uniform(*rates.added_delay_ms))
        hop_draw = float(rng.random())

        def make_bottleneck(fp: str, start: int, d: int = duration, x: float = delay, u: float = hop_draw) -> GroundTruthEvent:
            hops = len(sim.path(fp).hops)
            return GroundTruthEvent(
                kind=EventKind.BOTTLENECK,
                fingerprint=fp,
                start_cycle=start,
                duration_cycles=d,
                hop_index=min(hops - 1, int(u * hops)),
                added_delay_ms=x,
            )

        place(EventKind.BOTTLENECK, duration, 0, make_bottleneck)

    return EventPlan.of(events)
