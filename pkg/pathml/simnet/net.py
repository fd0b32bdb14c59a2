"""确定性的多 AS 拓扑与潜在路径状态模型。

潜在状态只取决于 (seed, fingerprint, cycle) 和事件计划：
- 每跳基准时延乘以日周期正弦（周期 = 一天的周期数），再叠加每跳高斯噪声；
- per_hop_rtt 是逐跳贡献的前缀和（traceroute 语义），端到端 RTT 取最后一跳；
- 容量按跨流量正弦下降，丢包率有基线并在事件中抬升。
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from datetime import timedelta
from typing import Iterable

import numpy as np

from pathml.domain.enums import EventKind, PathStatus
from pathml.domain.errors import InvalidEvent, OverlappingEvents, UnknownDestination, UnknownFingerprint
from pathml.domain.models.clock import CycleClock
from pathml.domain.models.paths import HopRef, PathRecord
from pathml.domain.models.topology import IsdAs, validate_isd_as

from .models import MAX_TRANSIT_HOPS, EventPlan, GroundTruthEvent, SimSpec, check_spec

SimClock = CycleClock

PATH_EXPIRY = timedelta(hours=6)
MAX_INTERFACE_ID = 64
_LATENT_STREAM = 0


def sim_as(index: int) -> IsdAs:
    """第 i 个模拟 AS：ISD 在 17/18/19 之间轮换。"""
    return validate_isd_as(f"{17 + index % 3}-ffaa:0:{0x1101 + index:x}")


def transit_as(index: int) -> IsdAs:
    return validate_isd_as(f"{17 + index % 3}-ffaa:1:{0x1 + index:x}")


@dataclass(frozen=True, slots=True)
class PathParams:
    base_hop_ms: tuple[float, ...]
    base_loss_pct: float
    capacity_mbps: float
    jitter_ms: float
    diurnal_phase: float
    traffic_phase: float


@dataclass(frozen=True, slots=True)
class LatentState:
    rtt_ms: float
    jitter_ms: float
    loss_pct: float
    capacity_mbps: float
    per_hop_rtt_ms: tuple[float, ...]
    available: bool


def fingerprint_key(fingerprint: str) -> int:
    return int(fingerprint, 16)


@dataclass(frozen=True)
class SimNet:
    spec: SimSpec
    ases: tuple[IsdAs, ...]
    paths: dict[tuple[IsdAs, IsdAs], tuple[PathRecord, ...]]
    params: dict[str, PathParams]
    events: dict[str, tuple[GroundTruthEvent, ...]] = field(default_factory=dict)

    # ---- 拓扑查询 ----

    def pairs(self) -> list[tuple[IsdAs, IsdAs]]:
        return list(self.paths.keys())

    def paths_for(self, src: IsdAs, dst: IsdAs) -> tuple[PathRecord, ...]:
        try:
            return self.paths[(src, dst)]
        except KeyError:
            raise UnknownDestination(f"模拟拓扑中没有 {src} -> {dst}", details={"src": str(src), "dst": str(dst)}) from None

    def all_paths(self) -> list[PathRecord]:
        return [p for group in self.paths.values() for p in group]

    def path(self, fingerprint: str) -> PathRecord:
        for group in self.paths.values():
            for record in group:
                if record.fingerprint == fingerprint:
                    return record
        raise UnknownFingerprint(f"未知路径: {fingerprint}", details={"fingerprint": fingerprint})

    def clock(self, cycle: int = 0) -> CycleClock:
        return CycleClock(cycle=cycle, epoch=self.spec.epoch, cycle_minutes=self.spec.cycle_minutes)

    def plan(self) -> EventPlan:
        return EventPlan.of(e for group in self.events.values() for e in group)

    # ---- 潜在状态 ----

    def _params(self, fingerprint: str) -> PathParams:
        try:
            return self.params[fingerprint]
        except KeyError:
            raise UnknownFingerprint(f"未知路径: {fingerprint}", details={"fingerprint": fingerprint}) from None

    def rng(self, cycle: int, stream: int, fingerprint: str, extra: int = 0) -> np.random.Generator:
        """(seed, cycle, stream, 路径, extra) 决定的独立随机流。"""
        return np.random.default_rng([self.spec.seed, cycle, stream, fingerprint_key(fingerprint), extra])

    def is_failed(self, fingerprint: str, cycle: int) -> bool:
        return any(e.kind == EventKind.FAILURE and e.active(cycle) for e in self.events.get(fingerprint, ()))

    def metrics_at(self, fingerprint: str, cycle: int) -> LatentState:
        params = self._params(fingerprint)
        spec = self.spec
        base = np.asarray(params.base_hop_ms, dtype=float)
        hops = len(base)

        angle = 2.0 * math.pi * cycle / spec.cycles_per_day
        contrib = base * (1.0 + spec.diurnal_amplitude_pct / 100.0 * math.sin(angle + params.diurnal_phase))
        loss = params.base_loss_pct
        jitter = params.jitter_ms
        available = True

        for event in self.events.get(fingerprint, ()):
            step = event.precursor_step(cycle)
            if step:
                contrib = contrib * (1.0 + 0.1 * step)
                jitter = jitter * 2.0
                if step == event.precursor_cycles:
                    loss += spec.precursor_final_loss_pct
            if not event.active(cycle):
                continue
            match event.kind:
                case EventKind.FAILURE:
                    available = False
                case EventKind.ANOMALY:
                    contrib = contrib * float(event.rtt_factor or 1.0)
                    loss += event.extra_loss_pct
                case EventKind.BOTTLENECK:
                    contrib = contrib.copy()
                    contrib[int(event.hop_index or 0)] += float(event.added_delay_ms or 0.0)

        rng = self.rng(cycle, _LATENT_STREAM, fingerprint)
        sigma = spec.noise_sigma_ms / math.sqrt(hops)
        noise = rng.normal(0.0, sigma, size=hops) if sigma > 0 else np.zeros(hops)
        per_hop = np.maximum(np.cumsum(contrib + noise), 0.0)

        traffic = 0.5 + 0.5 * math.sin(angle + params.traffic_phase)
        capacity = params.capacity_mbps * (1.0 - spec.cross_traffic_amplitude_pct / 100.0 * traffic)
        cap_noise = spec.capacity_noise_pct / 100.0
        if cap_noise > 0:
            capacity *= max(0.05, 1.0 + rng.normal(0.0, cap_noise))

        if not available:
            loss = 100.0
        return LatentState(
            rtt_ms=float(per_hop[-1]),
            jitter_ms=float(jitter),
            loss_pct=float(min(100.0, loss)),
            capacity_mbps=float(capacity),
            per_hop_rtt_ms=tuple(float(v) for v in per_hop),
            available=available,
        )

    # ---- 事件 ----

    def with_events(self, events: Iterable[GroundTruthEvent]) -> "SimNet":
        grouped: dict[str, list[GroundTruthEvent]] = {}
        for event in events:
            record = self.path(event.fingerprint)
            if event.kind == EventKind.BOTTLENECK and int(event.hop_index or 0) >= len(record.hops):
                raise InvalidEvent(
                    f"hop_index {event.hop_index} 超出路径跳数 {len(record.hops)}",
                    details={"fingerprint": event.fingerprint},
                )
            grouped.setdefault(event.fingerprint, []).append(event)
        for fingerprint, group in grouped.items():
            group.sort(key=lambda e: (e.first_cycle, e.start_cycle))
            for prev, cur in zip(group, group[1:]):
                if cur.first_cycle < prev.end_cycle:
                    raise OverlappingEvents(
                        f"同一路径上的事件重叠: {fingerprint} 周期 {prev.first_cycle}-{prev.end_cycle} 与 "
                        f"{cur.first_cycle}-{cur.end_cycle}",
                        details={"fingerprint": fingerprint},
                    )
        return replace(self, events={fp: tuple(group) for fp, group in grouped.items()})


def build(spec: SimSpec) -> SimNet:
    """同一份 spec 构建两次得到完全相同的拓扑。"""
    check_spec(spec)
    rng = np.random.default_rng([spec.seed, 1])
    ases = tuple(sim_as(i) for i in range(spec.as_count))
    pool = [transit_as(i) for i in range(MAX_TRANSIT_HOPS)]
    lo_h, hi_h = spec.hops_range
    paths: dict[tuple[IsdAs, IsdAs], tuple[PathRecord, ...]] = {}
    params: dict[str, PathParams] = {}
    expiry = spec.epoch + PATH_EXPIRY

    for src in ases:
        for dst in ases:
            if src == dst:
                continue
            records: list[PathRecord] = []
            seen: set[str] = set()
            while len(records) < spec.paths_per_pair:
                hop_count = int(rng.integers(lo_h, hi_h + 1))
                picks = rng.choice(len(pool), size=hop_count - 2, replace=False) if hop_count > 2 else []
                chain = [src, *(pool[int(i)] for i in picks), dst]
                links = rng.integers(1, MAX_INTERFACE_ID + 1, size=(hop_count - 1, 2))
                hops = []
                for i, isd_as in enumerate(chain):
                    ingress = int(links[i - 1][1]) if i > 0 else 0
                    egress = int(links[i][0]) if i < hop_count - 1 else 0
                    hops.append(HopRef(isd_as=isd_as, ingress_if=ingress, egress_if=egress))
                record = PathRecord.from_hops(
                    hops,
                    mtu=int(rng.choice([1280, 1400, 1472])),
                    status=PathStatus.ALIVE,
                    expiry=expiry,
                )
                if record.fingerprint in seen or record.fingerprint in params:
                    continue
                seen.add(record.fingerprint)
                records.append(record)
                params[record.fingerprint] = PathParams(
                    base_hop_ms=tuple(float(v) for v in rng.uniform(*spec.base_rtt_ms_range, size=hop_count)),
                    base_loss_pct=float(rng.uniform(*spec.base_loss_pct_range)),
                    capacity_mbps=float(rng.uniform(*spec.link_capacity_mbps_range)),
                    jitter_ms=float(spec.noise_sigma_ms * rng.uniform(0.5, 1.5)),
                    diurnal_phase=float(rng.uniform(0.0, 2.0 * math.pi)),
                    traffic_phase=float(rng.uniform(0.0, 2.0 * math.pi)),
                )
            paths[(src, dst)] = tuple(records)
    return SimNet(spec=spec, ases=ases, paths=paths, params=params)


def schedule_events(sim: SimNet, plan: EventPlan) -> SimNet:
    return sim.with_events(list(sim.plan().events) + list(plan.events))
