"""基准任务的数据来源：内存里跑一遍模拟采集，或读取 export csv 的输出目录。"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace
from pathlib import Path

import pandas as pd

from pathml.application.services.collector_service import run_cycle
from pathml.application.services.config_service import campaign_for_sim
from pathml.domain.enums import EventKind
from pathml.domain.errors import InsufficientData, InvalidParams, SchemaError
from pathml.domain.models.campaign import CampaignConfig, PipelineConfig
from pathml.infrastructure.storage.memory import MemoryRecordStore
from pathml.logger import get_logger
from pathml.simnet import PlanRates, SimNet, SimNetBackend, SimSpec, auto_plan, build, schedule_events
from pathml.table_contracts import ART_HOPS, ART_MEASUREMENTS, COLUMNS_HOPS, COLUMNS_MEASUREMENTS, table_contract
from pathml.transform.export import frames_from_envelopes, read_frame

from .report import DataProvenance

BENCH_AS_COUNT = 5
DEFAULT_BENCH_CYCLES = 400
# 每条被测路径每 40 个周期约一次故障：400 个周期、16 条路径时约 160 次。
FAILURE_DENSITY = 1.0 / 40.0
MEMORY_ROOT = "memory"


@dataclass(frozen=True)
class BenchData:
    measurements: pd.DataFrame
    hops: pd.DataFrame
    provenance: DataProvenance


@dataclass(frozen=True, slots=True)
class SimCampaign:
    """基准用的模拟 campaign：本地 AS 到其余每个 AS 的全部路径都测，故障只放在这些路径上。"""

    spec: SimSpec = field(default_factory=lambda: SimSpec(as_count=BENCH_AS_COUNT))
    cycles: int = DEFAULT_BENCH_CYCLES
    failures: int | None = None
    abrupt_fraction: float = 0.2
    precursor_choices: tuple[int, ...] = (2, 3, 4)

    def __post_init__(self) -> None:
        if self.cycles < 1:
            raise InvalidParams(f"cycles 必须为正: {self.cycles}")
        if self.failures is not None and self.failures < 0:
            raise InvalidParams(f"failures 不能为负: {self.failures}")
        if not 0.0 <= self.abrupt_fraction <= 1.0:
            raise InvalidParams(f"abrupt_fraction 需在 [0, 1]: {self.abrupt_fraction}")

    def with_seed(self, seed: int) -> "SimCampaign":
        return replace(self, spec=self.spec.model_copy(update={"seed": seed}))


def bench_pipeline(sim: SimNet, config: CampaignConfig) -> PipelineConfig:
    base = config.pipeline
    return PipelineConfig(
        enabled=base.enabled,
        interval_minutes=sim.spec.cycle_minutes,
        bandwidth_tiers_mbps=base.bandwidth_tiers_mbps,
        ping_count=base.ping_count,
        paths_per_pair=sim.spec.paths_per_pair,
        mp_concurrency=base.mp_concurrency,
    )


def measured_fingerprints(sim: SimNet, config: CampaignConfig) -> list[str]:
    out: list[str] = []
    for dst in config.destinations():
        out.extend(p.fingerprint for p in sim.paths_for(config.local_as, dst)[: config.pipeline.paths_per_pair])
    return out


def planned_failures(campaign: SimCampaign, measured: int) -> int:
    if campaign.failures is not None:
        return campaign.failures
    return int(round(FAILURE_DENSITY * measured * campaign.cycles))


def simulate(campaign: SimCampaign) -> BenchData:
    """逐周期调用采集器写入内存存储，再展开成与 export csv 相同的两张表。"""
    logger = get_logger().bind(category="bench")
    started = time.monotonic()
    sim = build(campaign.spec)
    probe = campaign_for_sim(sim, storage_root=MEMORY_ROOT)
    config = probe.model_copy(update={"pipeline": bench_pipeline(sim, probe)})
    measured = measured_fingerprints(sim, config)

    failures = planned_failures(campaign, len(measured))
    if failures:
        cycles_per_week = 7 * sim.spec.cycles_per_day
        rates = PlanRates(
            failures_per_week=failures * cycles_per_week / campaign.cycles,
            abrupt_fraction=campaign.abrupt_fraction,
            precursor_choices=campaign.precursor_choices,
        )
        sim = schedule_events(sim, auto_plan(sim, cycles=campaign.cycles, rates=rates, fingerprints=measured))
    placed = len(sim.plan().of_kind(EventKind.FAILURE))

    backend = SimNetBackend(sim)
    store = MemoryRecordStore()
    for cycle in range(campaign.cycles):
        run_cycle(config, backend, store, sim.clock(cycle))
    measurements, hops = frames_from_envelopes(store.envelopes())
    logger.info(
        f"模拟采集完成：{campaign.cycles} 个周期、{len(measured)} 条路径、{placed} 次故障，"
        f"{len(measurements)} 行测量，耗时 {time.monotonic() - started:.1f} s"
    )
    return BenchData(
        measurements=measurements,
        hops=hops,
        provenance=DataProvenance(
            source="sim",
            seed=campaign.spec.seed,
            cycles=campaign.cycles,
            paths=len(measured),
            failures=placed,
            abrupt_fraction=campaign.abrupt_fraction,
        ),
    )


def _check_header(path: Path, artifact: str) -> None:
    try:
        header = pd.read_csv(path, nrows=0).columns.tolist()
    except FileNotFoundError:
        return
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as exc:
        raise SchemaError(f"无法读取 CSV 表头: {path}（{exc}）") from exc
    table_contract(artifact).check(header, source=path.name)


def load_csv_dir(data_dir: Path, *, seed: int = 0) -> BenchData:
    """读取 export csv 的输出目录（measurements.csv + hops.csv）。"""
    measurements_path = data_dir / ART_MEASUREMENTS
    hops_path = data_dir / ART_HOPS
    _check_header(measurements_path, ART_MEASUREMENTS)
    _check_header(hops_path, ART_HOPS)
    measurements = read_frame(measurements_path, COLUMNS_MEASUREMENTS)
    hops = read_frame(hops_path, COLUMNS_HOPS) if hops_path.exists() else _empty_hops()
    if measurements.empty:
        raise InsufficientData(f"{measurements_path} 没有任何测量行", details={"required": 1, "actual": 0})
    cycles = int(measurements["cycle_index"].dropna().nunique())
    paths = int(measurements.loc[measurements["fingerprint"] != "", "fingerprint"].nunique())
    get_logger().bind(category="bench").info(f"读取 CSV 数据集 {data_dir}：{len(measurements)} 行测量、{len(hops)} 行逐跳")
    return BenchData(
        measurements=measurements,
        hops=hops,
        provenance=DataProvenance(source="csv", seed=seed, cycles=cycles, paths=paths),
    )


def _empty_hops() -> pd.DataFrame:
    _, hops = frames_from_envelopes(())
    return hops
