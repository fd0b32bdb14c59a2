"""一个采集周期：对 local → 每个远端 AS 依次执行已启用的测量类别。

探测失败是数据（下游任务的故障标签来自它们），只记录不中断；
只有存储不可用才会让整个周期失败。
"""

from __future__ import annotations

import contextvars
import random
import time
from concurrent.futures import ThreadPoolExecutor
from datetime import datetime
from typing import Iterable

from pydantic import BaseModel, Field, model_validator

from pathml.domain.enums import CATEGORIES, Category, ProbeAction
from pathml.domain.errors import BackendError, StoreUnavailable
from pathml.domain.models.campaign import MP_CONCURRENCY, CampaignConfig
from pathml.domain.models.clock import CycleClock
from pathml.domain.models.paths import PathRecord
from pathml.domain.models.probes import DEFAULT_PROBE_TIMEOUT_S, ProbeContext, ProbeRequest
from pathml.domain.models.results import (
    BandwidthResult,
    ComparerResult,
    MpBandwidthResult,
    MpProberResult,
    PingResult,
    ShowpathsResult,
    TracerouteResult,
)
from pathml.domain.models.topology import IsdAs, IsdAsField, ServerDescriptor
from pathml.domain.ports.probe_backend import ProbeBackend
from pathml.domain.ports.record_store import RecordStorePort
from pathml.logger import close_cycle_log, get_logger, open_cycle_log, reset_cycle_id, set_cycle_id
from pathml.schemas.common import DocumentModel
from pathml.schemas.envelope import RecordEnvelope, ToolInfo
from pathml.state import compact_utc, iso_utc

from .probe_service import DEFAULT_RETRIES, run_probe

NEEDS_TWO_PATHS = "needs ≥ 2 paths"


class CategoryCounts(DocumentModel):
    attempted: int = 0
    succeeded: int = 0
    failed: int = 0

    @model_validator(mode="after")
    def _balanced(self) -> "CategoryCounts":
        if self.attempted != self.succeeded + self.failed:
            raise ValueError("attempted 必须等于 succeeded + failed")
        return self


class ProbeFailure(DocumentModel):
    category: Category
    src: IsdAsField
    dst: IsdAsField
    fingerprint: str | None = None
    kind: str
    message: str


class SkippedProbe(DocumentModel):
    category: Category
    src: IsdAsField
    dst: IsdAsField
    reason: str


class CycleReport(DocumentModel):
    cycle: int = Field(ge=0)
    cycle_start: datetime
    counts: dict[Category, CategoryCounts]
    duration_ms: int = Field(ge=0)
    errors: tuple[ProbeFailure, ...] = ()
    skipped: tuple[SkippedProbe, ...] = ()
    lock_skipped: bool = False
    log_path: str | None = None

    def total(self, field: str) -> int:
        return sum(getattr(c, field) for c in self.counts.values())


def compare_paths(
    previous: Iterable[str],
    current: Iterable[str],
    *,
    src: IsdAs,
    dst: IsdAs,
) -> ComparerResult:
    prev, cur = set(previous), set(current)
    return ComparerResult(
        src=src,
        dst=dst,
        added=tuple(sorted(cur - prev)),
        removed=tuple(sorted(prev - cur)),
        persisted=tuple(sorted(cur & prev)),
        prev_total=len(prev),
        cur_total=len(cur),
    )


def order_targets(previous: Iterable[PathRecord], current: Iterable[PathRecord]) -> list[PathRecord]:
    """当前列表的顺序在前，上一版中已被撤回的路径按原顺序追加；同一路径只出现一次。"""
    out: dict[str, PathRecord] = {}
    for record in (*current, *previous):
        out.setdefault(record.fingerprint, record)
    return list(out.values())


def mp_rng(seed: int, cycle: int, src: IsdAs, dst: IsdAs, category: Category) -> random.Random:
    return random.Random(f"{seed}:{cycle}:{src}:{dst}:{category.value}")


class _Cycle:
    def __init__(
        self,
        config: CampaignConfig,
        backend: ProbeBackend,
        store: RecordStorePort,
        clock: CycleClock,
        *,
        cycle_id: str,
        retries: int,
        timeout_s: float,
    ) -> None:
        self.config = config
        self.backend = backend
        self.store = store
        self.clock = clock
        self.cycle_id = cycle_id
        self.retries = retries
        self.timeout_s = timeout_s
        self.timestamp = clock.now()
        self.tool = ToolInfo(name=backend.name, version=backend.version)
        self.counts = {c: [0, 0] for c in CATEGORIES}
        self.errors: list[ProbeFailure] = []
        self.skipped: list[SkippedProbe] = []
        self._logger = get_logger()
        self._cycle_log = get_logger().bind(cycle_log=cycle_id)
        self._known = set(config.destinations())

    # ---- 记录 ----

    def _line(self, category: Category, src: IsdAs, dst: IsdAs, fingerprint: str | None, status: str) -> None:
        self._cycle_log.info(f"{iso_utc(self.timestamp)} | {category.value} | {src}->{dst} | {fingerprint or '-'} | {status}")

    def _ok(self, category: Category, src: IsdAs, dst: IsdAs, fingerprint: str | None) -> None:
        self.counts[category][0] += 1
        self._line(category, src, dst, fingerprint, "ok")

    def _fail(self, category: Category, src: IsdAs, dst: IsdAs, fingerprint: str | None, exc: BackendError) -> None:
        self.counts[category][1] += 1
        self.errors.append(
            ProbeFailure(category=category, src=src, dst=dst, fingerprint=fingerprint, kind=exc.kind, message=exc.message)
        )
        self._line(category, src, dst, fingerprint, f"err({exc.kind})")
        self._logger.bind(category=category.value).warning(f"探测失败 {src}->{dst} {fingerprint or '-'}: [{exc.kind}] {exc.message}")

    def _skip(self, category: Category, src: IsdAs, dst: IsdAs, reason: str) -> None:
        self.skipped.append(SkippedProbe(category=category, src=src, dst=dst, reason=reason))
        self._logger.bind(category=category.value).warning(f"跳过 {src}->{dst}: {reason}")

    def _save(
        self,
        category: Category,
        result: BaseModel,
        src: IsdAs,
        dst: IsdAs,
        *,
        fingerprint: str | None = None,
        seq: int = 0,
    ) -> RecordEnvelope:
        envelope = RecordEnvelope.wrap(
            category=category,
            result=result,
            src=src,
            dst=dst,
            timestamp=self.timestamp,
            cycle=self.clock.cycle,
            tool=self.tool,
            fingerprint=fingerprint,
            seq=seq,
        )
        self.store.store(envelope)
        return envelope

    def _probe(self, request: ProbeRequest) -> BaseModel:
        return run_probe(self.backend, request, known_destinations=self._known, retries=self.retries)

    def _request(
        self,
        action: ProbeAction,
        category: Category,
        src: IsdAs,
        dst: IsdAs,
        *,
        path: PathRecord | None = None,
        server: ServerDescriptor | None = None,
        target_mbps: float = 0.0,
    ) -> ProbeRequest:
        return ProbeRequest(
            action=action,
            src=src,
            dst=dst,
            context=ProbeContext(cycle=self.clock.cycle, category=category, timeout_s=self.timeout_s),
            path=path,
            server=server,
            count=self.config.pipeline.ping_count,
            target_mbps=target_mbps,
        )

    # ---- 各类别 ----

    def run_pair(self, src: IsdAs, dst: IsdAs) -> None:
        pipeline = self.config.pipeline
        previous_env = self.store.current_listing(src, dst)
        previous: list[PathRecord] = list(previous_env.typed_payload().paths) if previous_env else []

        current: list[PathRecord] | None = None
        if pipeline.is_enabled(Category.SHOWPATHS):
            current = self._showpaths(src, dst)
            if current is not None and pipeline.is_enabled(Category.COMPARER):
                result = compare_paths([p.fingerprint for p in previous], [p.fingerprint for p in current], src=src, dst=dst)
                self._save(Category.COMPARER, result, src, dst)
                self._ok(Category.COMPARER, src, dst, None)
            elif pipeline.is_enabled(Category.COMPARER):
                self._skip(Category.COMPARER, src, dst, "本周期没有可用的 showpaths 结果")
        live = current if current is not None else previous

        limit = pipeline.paths_per_pair
        live_fps = {p.fingerprint for p in live}
        ordered = order_targets(previous, live)
        trace_targets = [p for p in ordered if p.fingerprint in live_fps][:limit]
        # 刚被撤回的路径不占配额，也要 ping 一次：撤回表现为全部丢包。
        ping_targets = trace_targets + [p for p in ordered if p.fingerprint not in live_fps]

        if pipeline.is_enabled(Category.PING):
            for path in ping_targets or [None]:
                self._ping(src, dst, path)
        if pipeline.is_enabled(Category.TRACEROUTE):
            for path in trace_targets or [None]:
                self._traceroute(src, dst, path)

        servers = self.config.servers_at(dst)
        pinned = trace_targets[0] if trace_targets else None
        if pipeline.is_enabled(Category.BANDWIDTH):
            for server in servers:
                for seq, tier in enumerate(pipeline.bandwidth_tiers_mbps):
                    self._bandwidth(src, server, pinned, tier, seq)
        if pipeline.is_enabled(Category.MP_BANDWIDTH):
            for server in servers:
                self._mp_bandwidth(src, server, trace_targets)
        if pipeline.is_enabled(Category.MP_PROBER):
            self._mp_prober(src, dst, trace_targets)

    def _showpaths(self, src: IsdAs, dst: IsdAs) -> list[PathRecord] | None:
        try:
            result = self._probe(self._request(ProbeAction.SHOWPATHS, Category.SHOWPATHS, src, dst))
        except StoreUnavailable:
            raise
        except BackendError as exc:
            self._fail(Category.SHOWPATHS, src, dst, None, exc)
            return None
        assert isinstance(result, ShowpathsResult)
        envelope = self._save(Category.SHOWPATHS, result, src, dst)
        self.store.rotate_showpaths(envelope)
        self._ok(Category.SHOWPATHS, src, dst, None)
        return list(result.paths)

    def _ping(self, src: IsdAs, dst: IsdAs, path: PathRecord | None) -> None:
        fp = path.fingerprint if path else None
        try:
            result = self._probe(self._request(ProbeAction.PING, Category.PING, src, dst, path=path))
        except StoreUnavailable:
            raise
        except BackendError as exc:
            self._fail(Category.PING, src, dst, fp, exc)
            return
        assert isinstance(result, PingResult)
        self._save(Category.PING, result, src, dst, fingerprint=fp or result.fingerprint)
        self._ok(Category.PING, src, dst, fp or result.fingerprint)

    def _traceroute(self, src: IsdAs, dst: IsdAs, path: PathRecord | None) -> None:
        fp = path.fingerprint if path else None
        try:
            result = self._probe(self._request(ProbeAction.TRACEROUTE, Category.TRACEROUTE, src, dst, path=path))
        except StoreUnavailable:
            raise
        except BackendError as exc:
            self._fail(Category.TRACEROUTE, src, dst, fp, exc)
            return
        assert isinstance(result, TracerouteResult)
        self._save(Category.TRACEROUTE, result, src, dst, fingerprint=fp or result.fingerprint)
        self._ok(Category.TRACEROUTE, src, dst, fp or result.fingerprint)

    def _bwtest(self, category: Category, src: IsdAs, server: ServerDescriptor, path: PathRecord | None, tier: float) -> BandwidthResult:
        request = self._request(
            ProbeAction.BWTEST, category, src, server.isd_as, path=path, server=server, target_mbps=tier
        )
        result = self._probe(request)
        assert isinstance(result, BandwidthResult)
        return result

    def _bandwidth(self, src: IsdAs, server: ServerDescriptor, path: PathRecord | None, tier: float, seq: int) -> None:
        dst = server.isd_as
        fp = path.fingerprint if path else None
        try:
            result = self._bwtest(Category.BANDWIDTH, src, server, path, tier)
        except StoreUnavailable:
            raise
        except BackendError as exc:
            self._fail(Category.BANDWIDTH, src, dst, fp, exc)
            return
        self._save(Category.BANDWIDTH, result, src, dst, fingerprint=fp, seq=seq)
        self._ok(Category.BANDWIDTH, src, dst, fp)

    def _pick_two(self, category: Category, src: IsdAs, dst: IsdAs, paths: list[PathRecord]) -> tuple[PathRecord, PathRecord] | None:
        if len(paths) < 2:
            self._skip(category, src, dst, NEEDS_TWO_PATHS)
            return None
        a, b = mp_rng(self.config.seed, self.clock.cycle, src, dst, category).sample(paths, 2)
        return a, b

    def _mp_bandwidth(self, src: IsdAs, server: ServerDescriptor, paths: list[PathRecord]) -> None:
        dst = server.isd_as
        picked = self._pick_two(Category.MP_BANDWIDTH, src, dst, paths)
        if picked is None:
            return
        for seq, tier in enumerate(self.config.pipeline.bandwidth_tiers_mbps):
            with ThreadPoolExecutor(max_workers=MP_CONCURRENCY) as pool:
                futures = [
                    pool.submit(contextvars.copy_context().run, self._bwtest, Category.MP_BANDWIDTH, src, server, p, tier)
                    for p in picked
                ]
                outcomes = [_outcome(f) for f in futures]
            failure = next((o for o in outcomes if isinstance(o, BackendError)), None)
            if failure is not None:
                self._fail(Category.MP_BANDWIDTH, src, dst, None, failure)
                continue
            result = MpBandwidthResult(target_mbps=tier, results=(outcomes[0], outcomes[1]))  # type: ignore[arg-type]
            self._save(Category.MP_BANDWIDTH, result, src, dst, seq=seq)
            self._ok(Category.MP_BANDWIDTH, src, dst, None)

    def _mp_ping(self, src: IsdAs, dst: IsdAs, path: PathRecord) -> PingResult:
        result = self._probe(self._request(ProbeAction.PING, Category.MP_PROBER, src, dst, path=path))
        assert isinstance(result, PingResult)
        return result

    def _mp_prober(self, src: IsdAs, dst: IsdAs, paths: list[PathRecord]) -> None:
        picked = self._pick_two(Category.MP_PROBER, src, dst, paths)
        if picked is None:
            return
        with ThreadPoolExecutor(max_workers=MP_CONCURRENCY) as pool:
            futures = [pool.submit(contextvars.copy_context().run, self._mp_ping, src, dst, p) for p in picked]
            outcomes = [_outcome(f) for f in futures]
        failure = next((o for o in outcomes if isinstance(o, BackendError)), None)
        if failure is not None:
            self._fail(Category.MP_PROBER, src, dst, None, failure)
            return
        result = MpProberResult(results=(outcomes[0], outcomes[1]))  # type: ignore[arg-type]
        self._save(Category.MP_PROBER, result, src, dst)
        self._ok(Category.MP_PROBER, src, dst, None)

    def report(self, started_monotonic: float, log_path: str | None) -> CycleReport:
        return CycleReport(
            cycle=self.clock.cycle,
            cycle_start=self.timestamp,
            counts={c: CategoryCounts(attempted=ok + bad, succeeded=ok, failed=bad) for c, (ok, bad) in self.counts.items()},
            duration_ms=int((time.monotonic() - started_monotonic) * 1000),
            errors=tuple(self.errors),
            skipped=tuple(self.skipped),
            log_path=log_path,
        )


def _outcome(future) -> BaseModel | BackendError:
    try:
        return future.result()
    except StoreUnavailable:
        raise
    except BackendError as exc:
        return exc


def run_cycle(
    config: CampaignConfig,
    backend: ProbeBackend,
    store: RecordStorePort,
    clock: CycleClock,
    *,
    retries: int = DEFAULT_RETRIES,
    timeout_s: float = DEFAULT_PROBE_TIMEOUT_S,
) -> CycleReport:
    started = time.monotonic()
    cycle_start = clock.now()
    cycle_id = compact_utc(cycle_start)
    logger = get_logger().bind(cycle_id=cycle_id, category="collector")
    stale_after_s = 2 * config.pipeline.interval_minutes * 60

    with store.cycle_lock(stale_after_s) as acquired:
        if not acquired:
            logger.warning("上一个采集周期仍在运行，跳过本次触发")
            return CycleReport(
                cycle=clock.cycle,
                cycle_start=cycle_start,
                counts={c: CategoryCounts() for c in CATEGORIES},
                duration_ms=int((time.monotonic() - started) * 1000),
                lock_skipped=True,
            )

        log_path = store.cycle_log_path(cycle_start)
        sink = open_cycle_log(log_path, cycle_id) if log_path is not None else None
        token = set_cycle_id(cycle_id)
        try:
            cycle = _Cycle(config, backend, store, clock, cycle_id=cycle_id, retries=retries, timeout_s=timeout_s)
            if config.pipeline.is_enabled(Category.BANDWIDTH) and not config.servers:
                logger.warning("已启用 bandwidth，但没有注册任何带宽服务器")
            for dst in config.destinations():
                cycle.run_pair(config.local_as, dst)
            report = cycle.report(started, str(log_path) if log_path is not None else None)
        finally:
            reset_cycle_id(token)
            if sink is not None:
                close_cycle_log(sink)

    logger.info(
        f"周期 {clock.cycle} 完成：成功 {report.total('succeeded')} / 失败 {report.total('failed')}，"
        f"耗时 {report.duration_ms} ms"
    )
    return report
