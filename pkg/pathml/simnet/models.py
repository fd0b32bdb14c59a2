"""模拟器的输入文档：simspec.json 与 events.json。"""

from __future__ import annotations

from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable

from pydantic import AwareDatetime, Field, model_validator

from pathml.domain.enums import EventKind
from pathml.domain.errors import InvalidSpec, IoError
from pathml.domain.models.paths import FINGERPRINT_RE
from pathml.domain.models.campaign import SEED_MAX
from pathml.schemas.common import DocumentModel, validate_json_document

DEFAULT_EPOCH = datetime(2025, 1, 1, tzinfo=timezone.utc)
MAX_TRANSIT_HOPS = 16


class SimSpec(DocumentModel):
    as_count: int = 4
    paths_per_pair: int = 4
    hops_range: tuple[int, int] = (3, 7)
    base_rtt_ms_range: tuple[float, float] = (1.0, 30.0)
    base_loss_pct_range: tuple[float, float] = (0.0, 0.5)
    diurnal_amplitude_pct: float = 10.0
    noise_sigma_ms: float = 1.5
    link_capacity_mbps_range: tuple[float, float] = (20.0, 200.0)
    cross_traffic_amplitude_pct: float = 30.0
    capacity_noise_pct: float = 5.0
    hop_timeout_pct: float = 0.5
    precursor_final_loss_pct: float = 50.0
    cycle_minutes: int = 30
    epoch: AwareDatetime = DEFAULT_EPOCH
    seed: int = Field(default=0, ge=0, le=SEED_MAX)

    @property
    def cycles_per_day(self) -> float:
        return 24 * 60 / self.cycle_minutes


def check_spec(spec: SimSpec) -> SimSpec:
    """语义校验（类型校验由 pydantic 完成）；不满足时抛 InvalidSpec。"""
    problems: list[str] = []
    if spec.as_count < 2:
        problems.append(f"as_count 至少为 2（实际 {spec.as_count}）")
    if spec.paths_per_pair < 1:
        problems.append("paths_per_pair 至少为 1")
    lo, hi = spec.hops_range
    if not 2 <= lo <= hi:
        problems.append(f"hops_range 需满足 2 ≤ min ≤ max（实际 {spec.hops_range}）")
    if hi - 2 > MAX_TRANSIT_HOPS:
        problems.append(f"hops_range 上限过大（中转 AS 最多 {MAX_TRANSIT_HOPS} 个）")
    for name in ("base_rtt_ms_range", "link_capacity_mbps_range"):
        a, b = getattr(spec, name)
        if not 0 < a <= b:
            problems.append(f"{name} 需满足 0 < min ≤ max（实际 {(a, b)}）")
    a, b = spec.base_loss_pct_range
    if not 0 <= a <= b <= 100:
        problems.append(f"base_loss_pct_range 需在 [0, 100] 内且 min ≤ max（实际 {(a, b)}）")
    for name in (
        "diurnal_amplitude_pct",
        "noise_sigma_ms",
        "cross_traffic_amplitude_pct",
        "capacity_noise_pct",
        "hop_timeout_pct",
        "precursor_final_loss_pct",
    ):
        if getattr(spec, name) < 0:
            problems.append(f"{name} 不能为负")
    if spec.diurnal_amplitude_pct >= 100 or spec.cross_traffic_amplitude_pct >= 100:
        problems.append("振幅百分比必须小于 100")
    if spec.hop_timeout_pct > 100 or spec.precursor_final_loss_pct > 100:
        problems.append("百分比不能超过 100")
    if spec.cycle_minutes <= 0:
        problems.append("cycle_minutes 必须为正")
    if problems:
        raise InvalidSpec("; ".join(problems), details=problems)
    return spec


class GroundTruthEvent(DocumentModel):
    kind: EventKind
    fingerprint: str
    start_cycle: int = Field(ge=0)
    duration_cycles: int = Field(default=1, ge=1)
    precursor_cycles: int = Field(default=0, ge=0)
    rtt_factor: float | None = None
    extra_loss_pct: float = Field(default=0.0, ge=0, le=100)
    hop_index: int | None = Field(default=None, ge=0)
    added_delay_ms: float | None = None

    @model_validator(mode="after")
    def _kind_params(self) -> "GroundTruthEvent":
        if not FINGERPRINT_RE.match(self.fingerprint):
            raise ValueError(f"非法 fingerprint: {self.fingerprint!r}")
        match self.kind:
            case EventKind.FAILURE:
                pass
            case EventKind.ANOMALY:
                if self.rtt_factor is None or self.rtt_factor <= 1:
                    raise ValueError("anomaly 需要 rtt_factor > 1")
            case EventKind.BOTTLENECK:
                if self.hop_index is None:
                    raise ValueError("bottleneck 需要 hop_index")
                if self.added_delay_ms is None or self.added_delay_ms <= 0:
                    raise ValueError("bottleneck 需要 added_delay_ms > 0")
        if self.kind != EventKind.FAILURE and self.precursor_cycles:
            raise ValueError("只有 failure 事件可以带 precursor_cycles")
        return self

    @property
    def first_cycle(self) -> int:
        """事件影响的第一个周期（含前兆）。"""
        return max(0, self.start_cycle - self.precursor_cycles)

    @property
    def end_cycle(self) -> int:
        """不含。"""
        return self.start_cycle + self.duration_cycles

    def active(self, cycle: int) -> bool:
        return self.start_cycle <= cycle < self.end_cycle

    def precursor_step(self, cycle: int) -> int:
        """处于前兆窗口时返回 1..k，否则 0。"""
        if self.kind != EventKind.FAILURE or self.precursor_cycles <= 0:
            return 0
        offset = cycle - (self.start_cycle - self.precursor_cycles)
        if 0 <= offset < self.precursor_cycles:
            return offset + 1
        return 0


class EventPlan(DocumentModel):
    events: tuple[GroundTruthEvent, ...] = ()

    def of_kind(self, kind: EventKind) -> list[GroundTruthEvent]:
        return [e for e in self.events if e.kind == kind]

    @classmethod
    def of(cls, events: Iterable[GroundTruthEvent]) -> "EventPlan":
        ordered = sorted(events, key=lambda e: (e.start_cycle, e.fingerprint, e.kind.value))
        return cls(events=tuple(ordered))


def _read(path: Path) -> str:
    try:
        return path.read_text(encoding="utf-8")
    except OSError as exc:
        raise IoError(f"无法读取文件: {path}（{exc.strerror or exc}）") from exc


def load_simspec(path: Path) -> SimSpec:
    return check_spec(validate_json_document(SimSpec, _read(path), source=str(path)))


def load_event_plan(path: Path) -> EventPlan:
    return validate_json_document(EventPlan, _read(path), source=str(path))
