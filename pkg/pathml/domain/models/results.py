"""各测量类别的结果类型（同时也是信封 payload 的 schema）。"""

from __future__ import annotations

from pydantic import Field, field_validator, model_validator

from pathml.schemas.common import DocumentModel

from .paths import HopRef, PathRecord, check_endpoints, check_fingerprint
from .topology import IsdAsField, ServerDescriptor

LOSS_TOLERANCE_PCT = 0.01
BANDWIDTH_MARGIN = 1.05


def loss_from_counts(sent: int, received: int) -> float:
    return 100.0 * (sent - received) / sent


class ShowpathsResult(DocumentModel):
    dst: IsdAsField
    paths: tuple[PathRecord, ...] = ()

    @property
    def fingerprints(self) -> list[str]:
        return [p.fingerprint for p in self.paths]


class PingResult(DocumentModel):
    dst: IsdAsField
    fingerprint: str | None = None
    sent: int = Field(gt=0)
    received: int = Field(ge=0)
    loss_pct: float = Field(ge=0, le=100)
    rtt_min_ms: float | None = Field(default=None, ge=0)
    rtt_avg_ms: float | None = Field(default=None, ge=0)
    rtt_max_ms: float | None = Field(default=None, ge=0)
    jitter_ms: float | None = Field(default=None, ge=0)

    @field_validator("fingerprint")
    @classmethod
    def _fp(cls, v: str | None) -> str | None:
        return check_fingerprint(v)

    @model_validator(mode="after")
    def _invariants(self) -> "PingResult":
        if self.received > self.sent:
            raise ValueError(f"received({self.received}) > sent({self.sent})")
        if abs(self.loss_pct - loss_from_counts(self.sent, self.received)) > LOSS_TOLERANCE_PCT:
            raise ValueError("loss_pct 与 sent/received 不一致")
        rtts = (self.rtt_min_ms, self.rtt_avg_ms, self.rtt_max_ms, self.jitter_ms)
        if self.received == 0:
            if any(v is not None for v in rtts):
                raise ValueError("全部丢包时 RTT 字段必须缺省")
        else:
            if any(v is None for v in rtts):
                raise ValueError("有回包时 RTT 字段必须齐全")
            assert self.rtt_min_ms is not None and self.rtt_avg_ms is not None and self.rtt_max_ms is not None
            if not self.rtt_min_ms <= self.rtt_avg_ms <= self.rtt_max_ms:
                raise ValueError("RTT 需满足 min ≤ avg ≤ max")
        return self

    @property
    def available(self) -> bool:
        return self.received > 0


class BandwidthResult(DocumentModel):
    server: ServerDescriptor | None = None
    fingerprint: str | None = None
    target_mbps: float = Field(gt=0)
    achieved_cs_mbps: float = Field(ge=0)
    achieved_sc_mbps: float = Field(ge=0)
    loss_pct: float = Field(ge=0, le=100)

    @field_validator("fingerprint")
    @classmethod
    def _fp(cls, v: str | None) -> str | None:
        return check_fingerprint(v)

    @model_validator(mode="after")
    def _invariants(self) -> "BandwidthResult":
        limit = BANDWIDTH_MARGIN * self.target_mbps
        if self.achieved_cs_mbps > limit or self.achieved_sc_mbps > limit:
            raise ValueError(f"实测带宽超过目标的 {BANDWIDTH_MARGIN} 倍")
        return self


class TracerouteHop(DocumentModel):
    index: int = Field(ge=0)
    hop: HopRef
    rtts_ms: tuple[float, ...] = ()

    @field_validator("rtts_ms")
    @classmethod
    def _rtts(cls, v: tuple[float, ...]) -> tuple[float, ...]:
        if len(v) not in (0, 3):
            raise ValueError("每跳 RTT 为 3 个值，超时为空")
        if any(x < 0 for x in v):
            raise ValueError("RTT 不能为负")
        return v

    @property
    def timed_out(self) -> bool:
        return not self.rtts_ms


class TracerouteResult(DocumentModel):
    dst: IsdAsField
    fingerprint: str | None = None
    hops: tuple[TracerouteHop, ...] = Field(min_length=1)

    @field_validator("fingerprint")
    @classmethod
    def _fp(cls, v: str | None) -> str | None:
        return check_fingerprint(v)

    @model_validator(mode="after")
    def _invariants(self) -> "TracerouteResult":
        for expected, hop in enumerate(self.hops):
            if hop.index != expected:
                raise ValueError(f"hop 序号不连续: 期望 {expected}，实际 {hop.index}")
        check_endpoints([h.hop for h in self.hops])
        return self


class ComparerResult(DocumentModel):
    src: IsdAsField
    dst: IsdAsField
    added: tuple[str, ...] = ()
    removed: tuple[str, ...] = ()
    persisted: tuple[str, ...] = ()
    prev_total: int = Field(ge=0)
    cur_total: int = Field(ge=0)

    @model_validator(mode="after")
    def _invariants(self) -> "ComparerResult":
        added, removed, persisted = set(self.added), set(self.removed), set(self.persisted)
        if added & removed:
            raise ValueError("added 与 removed 不能相交")
        if len(persisted) + len(added) != self.cur_total:
            raise ValueError("|persisted| + |added| 必须等于 cur_total")
        if len(persisted) + len(removed) != self.prev_total:
            raise ValueError("|persisted| + |removed| 必须等于 prev_total")
        return self


class MpBandwidthResult(DocumentModel):
    """同一档位、两条不同路径上同时进行的带宽测试。"""

    target_mbps: float = Field(gt=0)
    results: tuple[BandwidthResult, BandwidthResult]

    @model_validator(mode="after")
    def _distinct(self) -> "MpBandwidthResult":
        a, b = self.results
        if a.fingerprint is not None and a.fingerprint == b.fingerprint:
            raise ValueError("并发带宽测试必须使用两条不同路径")
        return self


class MpProberResult(DocumentModel):
    """两条不同路径上同时进行的 ping。"""

    results: tuple[PingResult, PingResult]

    @model_validator(mode="after")
    def _distinct(self) -> "MpProberResult":
        a, b = self.results
        if a.fingerprint is not None and a.fingerprint == b.fingerprint:
            raise ValueError("并发 ping 必须使用两条不同路径")
        return self
