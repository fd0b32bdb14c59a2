from __future__ import annotations

from pydantic import Field, field_validator, model_validator

from pathml.domain.enums import CATEGORIES, Category
from pathml.schemas.common import DocumentModel

from .topology import AsDescriptor, IsdAs, IsdAsField, ServerDescriptor

DEFAULT_INTERVAL_MINUTES = 30
DEFAULT_TIERS_MBPS: tuple[float, ...] = (10.0, 50.0, 100.0)
DEFAULT_PING_COUNT = 10
DEFAULT_PATHS_PER_PAIR = 3
MP_CONCURRENCY = 2
SEED_MAX = 2**64 - 1


def dependency_problem(enabled: dict[Category, bool], tiers: tuple[float, ...]) -> str | None:
    """返回第一条被违反的依赖关系说明；全部满足时返回 None。"""
    if enabled.get(Category.COMPARER) and not enabled.get(Category.SHOWPATHS):
        return "启用 comparer 需要先启用 showpaths（comparer 依赖 showpaths 历史）"
    if enabled.get(Category.MP_BANDWIDTH) and not tiers:
        return "启用 mp_bandwidth 需要至少一个带宽档位"
    return None


class PipelineConfig(DocumentModel):
    enabled: dict[Category, bool]
    interval_minutes: int = Field(default=DEFAULT_INTERVAL_MINUTES, gt=0)
    bandwidth_tiers_mbps: tuple[float, ...] = DEFAULT_TIERS_MBPS
    ping_count: int = Field(default=DEFAULT_PING_COUNT, gt=0)
    paths_per_pair: int = Field(default=DEFAULT_PATHS_PER_PAIR, gt=0)
    mp_concurrency: int = MP_CONCURRENCY

    @field_validator("enabled")
    @classmethod
    def _all_categories(cls, v: dict[Category, bool]) -> dict[Category, bool]:
        missing = [c.value for c in CATEGORIES if c not in v]
        if missing:
            raise ValueError(f"缺少测量类别开关: {', '.join(missing)}")
        return {c: bool(v[c]) for c in CATEGORIES}

    @field_validator("bandwidth_tiers_mbps")
    @classmethod
    def _tiers(cls, v: tuple[float, ...]) -> tuple[float, ...]:
        if any(t <= 0 for t in v):
            raise ValueError("带宽档位必须为正数")
        return tuple(float(t) for t in v)

    @field_validator("mp_concurrency")
    @classmethod
    def _concurrency(cls, v: int) -> int:
        if v != MP_CONCURRENCY:
            raise ValueError(f"mp_concurrency 固定为 {MP_CONCURRENCY}")
        return v

    @model_validator(mode="after")
    def _dependencies(self) -> "PipelineConfig":
        problem = dependency_problem(self.enabled, self.bandwidth_tiers_mbps)
        if problem:
            raise ValueError(problem)
        return self

    def is_enabled(self, category: Category) -> bool:
        return bool(self.enabled.get(category, False))


def default_pipeline(*, all_on: bool = True) -> PipelineConfig:
    return PipelineConfig(enabled={c: all_on for c in CATEGORIES})


class CampaignConfig(DocumentModel):
    local_as: IsdAsField
    ases: tuple[AsDescriptor, ...] = ()
    servers: tuple[ServerDescriptor, ...] = ()
    pipeline: PipelineConfig = Field(default_factory=default_pipeline)
    storage_root: str = Field(min_length=1)
    seed: int = Field(default=0, ge=0, le=SEED_MAX)

    @field_validator("storage_root")
    @classmethod
    def _root(cls, v: str) -> str:
        if not v.strip():
            raise ValueError("storage_root 不能为空")
        return v

    @model_validator(mode="after")
    def _registries(self) -> "CampaignConfig":
        seen: set[IsdAs] = set()
        for entry in self.ases:
            if entry.isd_as == self.local_as:
                raise ValueError(f"local_as 不能出现在远端 AS 列表中: {entry.isd_as}")
            if entry.isd_as in seen:
                raise ValueError(f"重复的 AS: {entry.isd_as}")
            seen.add(entry.isd_as)
        servers: set[IsdAs] = set()
        for server in self.servers:
            if server.isd_as in servers:
                raise ValueError(f"重复的带宽服务器: {server.isd_as}")
            servers.add(server.isd_as)
        return self

    def remote_ases(self) -> list[IsdAs]:
        return [entry.isd_as for entry in self.ases]

    def destinations(self) -> list[IsdAs]:
        """探测目的地：注册的远端 AS，加上只出现在服务器列表里的 AS（保持注册顺序）。"""
        out = self.remote_ases()
        for server in self.servers:
            if server.isd_as not in out and server.isd_as != self.local_as:
                out.append(server.isd_as)
        return out

    def servers_at(self, isd_as: IsdAs) -> list[ServerDescriptor]:
        return [s for s in self.servers if s.isd_as == isd_as]
