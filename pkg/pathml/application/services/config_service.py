"""campaign 配置的读写与注册表维护。所有操作都返回新对象；失败时原配置保持不变。"""

from __future__ import annotations

from pathlib import Path
from typing import Any, Iterable

from pathml.domain.enums import CATEGORIES, Category
from pathml.domain.errors import (
    DependencyViolation,
    DuplicateAs,
    DuplicateServer,
    IoError,
    UnknownCategory,
    UnknownEntry,
)
from pathml.domain.models.campaign import CampaignConfig, PipelineConfig, default_pipeline, dependency_problem
from pathml.domain.models.topology import (
    AsDescriptor,
    IsdAs,
    ServerDescriptor,
    check_ip,
    check_port,
    validate_isd_as,
)
from pathml.schemas.common import validate_document, validate_json_document
from pathml.simnet.net import SimNet
from pathml.state import write_text_atomic

DEFAULT_BW_PORT = 30100


def load_config(path: Path) -> CampaignConfig:
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError as exc:
        raise IoError(f"配置文件不存在: {path}") from exc
    except OSError as exc:
        raise IoError(f"无法读取配置文件: {path}（{exc.strerror or exc}）") from exc
    return validate_json_document(CampaignConfig, text, source=str(path))


def dump_config(config: CampaignConfig) -> str:
    return config.model_dump_json(indent=2) + "\n"


def save_config(config: CampaignConfig, path: Path) -> Path:
    try:
        return write_text_atomic(path, dump_config(config))
    except OSError as exc:
        raise IoError(f"无法写入配置文件: {path}（{exc.strerror or exc}）") from exc


def _rebuild(config: CampaignConfig, **changes: Any) -> CampaignConfig:
    data = config.model_dump(mode="json")
    data.update(changes)
    return validate_document(CampaignConfig, data, source="campaign")


def init_config(local_as: str, storage_root: str, *, seed: int = 0) -> CampaignConfig:
    return CampaignConfig(
        local_as=validate_isd_as(local_as),
        storage_root=storage_root,
        seed=seed,
        pipeline=default_pipeline(),
    )


def make_as(isd_as: str, ip: str, name: str) -> AsDescriptor:
    """先逐项做类型化校验（MalformedIsdAs / InvalidIp），再构造描述符。"""
    return AsDescriptor(isd_as=validate_isd_as(isd_as), ip=check_ip(ip), name=name or isd_as)


def make_server(isd_as: str, ip: str, port: int, name: str) -> ServerDescriptor:
    return ServerDescriptor(
        isd_as=validate_isd_as(isd_as),
        ip=check_ip(ip),
        port=check_port(port),
        name=name or isd_as,
    )


def add_as(config: CampaignConfig, entry: AsDescriptor) -> CampaignConfig:
    if entry.isd_as == config.local_as:
        raise DuplicateAs(f"{entry.isd_as} 是本地 AS，不能注册为远端 AS")
    if entry.isd_as in config.remote_ases():
        raise DuplicateAs(f"AS 已注册: {entry.isd_as}")
    return _rebuild(config, ases=[a.model_dump(mode="json") for a in (*config.ases, entry)])


def add_server(config: CampaignConfig, entry: ServerDescriptor) -> CampaignConfig:
    if any(s.isd_as == entry.isd_as for s in config.servers):
        raise DuplicateServer(f"带宽服务器已注册: {entry.isd_as}")
    return _rebuild(config, servers=[s.model_dump(mode="json") for s in (*config.servers, entry)])


def remove_as(config: CampaignConfig, isd_as: IsdAs) -> CampaignConfig:
    kept = [a for a in config.ases if a.isd_as != isd_as]
    if len(kept) == len(config.ases):
        raise UnknownEntry(f"未注册的 AS: {isd_as}")
    return _rebuild(config, ases=[a.model_dump(mode="json") for a in kept])


def remove_server(config: CampaignConfig, isd_as: IsdAs) -> CampaignConfig:
    kept = [s for s in config.servers if s.isd_as != isd_as]
    if len(kept) == len(config.servers):
        raise UnknownEntry(f"未注册的带宽服务器: {isd_as}")
    return _rebuild(config, servers=[s.model_dump(mode="json") for s in kept])


def parse_category(name: str) -> Category:
    try:
        return Category(str(name).strip().lower())
    except ValueError:
        allowed = ", ".join(c.value for c in CATEGORIES)
        raise UnknownCategory(f"未知的测量类别: {name!r}（可选: {allowed}）") from None


def set_category(config: CampaignConfig, category: str | Category, on: bool) -> CampaignConfig:
    cat = parse_category(category)
    enabled = dict(config.pipeline.enabled)
    enabled[cat] = bool(on)
    problem = dependency_problem(enabled, config.pipeline.bandwidth_tiers_mbps)
    if problem:
        raise DependencyViolation(problem)
    pipeline = config.pipeline.model_dump(mode="json")
    pipeline["enabled"] = {c.value: v for c, v in enabled.items()}
    return _rebuild(config, pipeline=pipeline)


def set_pipeline(
    config: CampaignConfig,
    *,
    interval_minutes: int | None = None,
    tiers_mbps: Iterable[float] | None = None,
    ping_count: int | None = None,
    paths_per_pair: int | None = None,
) -> CampaignConfig:
    pipeline = config.pipeline.model_dump(mode="json")
    if interval_minutes is not None:
        pipeline["interval_minutes"] = interval_minutes
    if tiers_mbps is not None:
        tiers = [float(t) for t in tiers_mbps]
        problem = dependency_problem(config.pipeline.enabled, tuple(tiers))
        if problem:
            raise DependencyViolation(problem)
        pipeline["bandwidth_tiers_mbps"] = tiers
    if ping_count is not None:
        pipeline["ping_count"] = ping_count
    if paths_per_pair is not None:
        pipeline["paths_per_pair"] = paths_per_pair
    return _rebuild(config, pipeline=pipeline)


def sim_ip(index: int) -> str:
    return f"10.{index // 250}.{index % 250 + 1}.1"


def campaign_for_sim(
    sim: SimNet,
    *,
    storage_root: str,
    seed: int | None = None,
    pipeline: PipelineConfig | None = None,
) -> CampaignConfig:
    """模拟拓扑的默认 campaign：首个 AS 为本地 AS，其余为远端，每个远端 AS 注册一个带宽服务器。"""
    local, *remotes = sim.ases
    base = pipeline or default_pipeline()
    if pipeline is None:
        base = PipelineConfig(
            enabled=base.enabled,
            interval_minutes=sim.spec.cycle_minutes,
            bandwidth_tiers_mbps=base.bandwidth_tiers_mbps,
            ping_count=base.ping_count,
            paths_per_pair=min(base.paths_per_pair, sim.spec.paths_per_pair),
        )
    return CampaignConfig(
        local_as=local,
        ases=tuple(
            AsDescriptor(isd_as=ia, ip=sim_ip(i), name=f"sim-{i}") for i, ia in enumerate(remotes, start=1)
        ),
        servers=tuple(
            ServerDescriptor(isd_as=ia, ip=sim_ip(i), port=DEFAULT_BW_PORT, name=f"bw-{i}")
            for i, ia in enumerate(remotes, start=1)
        ),
        pipeline=base,
        storage_root=storage_root,
        seed=sim.spec.seed if seed is None else seed,
    )
