from __future__ import annotations

import numpy as np

from pathml.domain.enums import CATEGORIES
from pathml.domain.errors import ServerUnreachable
from pathml.domain.models.paths import PathRecord
from pathml.domain.models.probes import ProbeContext
from pathml.domain.models.results import (
    BANDWIDTH_MARGIN,
    BandwidthResult,
    PingResult,
    TracerouteHop,
    TracerouteResult,
    loss_from_counts,
)
from pathml.domain.models.topology import IsdAs, ServerDescriptor

from .net import PATH_EXPIRY, SimNet

_STREAM_PING = 1
_STREAM_BWTEST = 2
_STREAM_TRACEROUTE = 3
BW_SHORTFALL_MAX = 0.03
RTT_DECIMALS = 3


def _category_index(ctx: ProbeContext) -> int:
    return CATEGORIES.index(ctx.category)


class SimNetBackend:
    """
    ProbeBackend 的模拟实现。结果只取决于 (seed, cycle, 类别, 路径, 动作)，
    与调用顺序和线程交错无关，所以两路并发探测是安全的。
    """

    name = "simnet"
    version = "1"

    def __init__(self, sim: SimNet) -> None:
        self.sim = sim

    def _default_path(self, src: IsdAs, dst: IsdAs, cycle: int) -> PathRecord:
        paths = self.sim.paths_for(src, dst)
        for record in paths:
            if not self.sim.is_failed(record.fingerprint, cycle):
                return record
        return paths[0]

    def _rng(self, ctx: ProbeContext, stream: int, fingerprint: str, extra: int = 0) -> np.random.Generator:
        return self.sim.rng(ctx.cycle, stream * 16 + _category_index(ctx), fingerprint, extra)

    def showpaths(self, src: IsdAs, dst: IsdAs, ctx: ProbeContext) -> list[PathRecord]:
        expiry = self.sim.clock(ctx.cycle).now() + PATH_EXPIRY
        out: list[PathRecord] = []
        for record in self.sim.paths_for(src, dst):
            if self.sim.is_failed(record.fingerprint, ctx.cycle):
                continue
            out.append(record.model_copy(update={"expiry": expiry}))
        return out

    def ping(self, src: IsdAs, dst: IsdAs, path: PathRecord | None, count: int, ctx: ProbeContext) -> PingResult:
        record = path or self._default_path(src, dst, ctx.cycle)
        state = self.sim.metrics_at(record.fingerprint, ctx.cycle)
        fingerprint = record.fingerprint if path is not None else None
        if not state.available:
            return PingResult(dst=dst, fingerprint=fingerprint, sent=count, received=0, loss_pct=100.0)

        rng = self._rng(ctx, _STREAM_PING, record.fingerprint)
        samples = rng.normal(state.rtt_ms, state.jitter_ms, size=count) if state.jitter_ms > 0 else np.full(count, state.rtt_ms)
        kept = rng.random(count) >= state.loss_pct / 100.0
        received = int(kept.sum())
        if received == 0:
            return PingResult(dst=dst, fingerprint=fingerprint, sent=count, received=0, loss_pct=100.0)
        got = np.maximum(samples[kept], 0.0)
        rtt_min = round(float(got.min()), RTT_DECIMALS)
        rtt_max = round(float(got.max()), RTT_DECIMALS)
        rtt_avg = min(max(round(float(got.mean()), RTT_DECIMALS), rtt_min), rtt_max)
        return PingResult(
            dst=dst,
            fingerprint=fingerprint,
            sent=count,
            received=received,
            loss_pct=loss_from_counts(count, received),
            rtt_min_ms=rtt_min,
            rtt_avg_ms=rtt_avg,
            rtt_max_ms=rtt_max,
            jitter_ms=round(float(got.std()), RTT_DECIMALS),
        )

    def bwtest(
        self,
        src: IsdAs,
        server: ServerDescriptor,
        path: PathRecord | None,
        target_mbps: float,
        ctx: ProbeContext,
    ) -> BandwidthResult:
        record = path or self._default_path(src, server.isd_as, ctx.cycle)
        state = self.sim.metrics_at(record.fingerprint, ctx.cycle)
        if not state.available:
            raise ServerUnreachable(
                f"带宽测试服务器不可达（路径失效）: {server.address}",
                details={"server": server.address, "fingerprint": record.fingerprint},
            )
        rng = self._rng(ctx, _STREAM_BWTEST, record.fingerprint, int(round(target_mbps * 1000)))
        ceiling = min(target_mbps, state.capacity_mbps)
        sc = ceiling * (1.0 - rng.uniform(0.0, BW_SHORTFALL_MAX))
        cs = ceiling * (1.0 - rng.uniform(0.0, BW_SHORTFALL_MAX))
        loss = state.loss_pct
        if target_mbps > state.capacity_mbps:
            loss += 100.0 * (target_mbps - state.capacity_mbps) / target_mbps * rng.uniform(0.8, 1.0)
        limit = BANDWIDTH_MARGIN * target_mbps
        return BandwidthResult(
            server=server,
            fingerprint=record.fingerprint if path is not None else None,
            target_mbps=target_mbps,
            achieved_cs_mbps=round(min(cs, limit), RTT_DECIMALS),
            achieved_sc_mbps=round(min(sc, limit), RTT_DECIMALS),
            loss_pct=round(min(loss, 100.0), RTT_DECIMALS),
        )

    def traceroute(self, src: IsdAs, dst: IsdAs, path: PathRecord | None, ctx: ProbeContext) -> TracerouteResult:
        record = path or self._default_path(src, dst, ctx.cycle)
        state = self.sim.metrics_at(record.fingerprint, ctx.cycle)
        rng = self._rng(ctx, _STREAM_TRACEROUTE, record.fingerprint)
        timeout_p = self.sim.spec.hop_timeout_pct / 100.0
        hops: list[TracerouteHop] = []
        for index, (ref, level) in enumerate(zip(record.hops, state.per_hop_rtt_ms)):
            draws = rng.normal(level, state.jitter_ms / 2.0, size=3) if state.jitter_ms > 0 else np.full(3, level)
            lost = (not state.available) or bool(rng.random() < timeout_p)
            rtts = () if lost else tuple(round(max(float(v), 0.0), RTT_DECIMALS) for v in draws)
            hops.append(TracerouteHop(index=index, hop=ref, rtts_ms=rtts))
        return TracerouteResult(dst=dst, fingerprint=record.fingerprint, hops=tuple(hops))
