from __future__ import annotations

from typing import Protocol

from pathml.domain.models.paths import PathRecord
from pathml.domain.models.probes import ProbeContext
from pathml.domain.models.results import BandwidthResult, PingResult, TracerouteResult
from pathml.domain.models.topology import IsdAs, ServerDescriptor


class ProbeBackend(Protocol):
    """四个 SCION 工具动作；要么返回类型化结果，要么抛出类型化错误。需容忍两个并发探测。"""

    name: str
    version: str

    def showpaths(self, src: IsdAs, dst: IsdAs, ctx: ProbeContext) -> list[PathRecord]: ...

    def ping(
        self,
        src: IsdAs,
        dst: IsdAs,
        path: PathRecord | None,
        count: int,
        ctx: ProbeContext,
    ) -> PingResult: ...

    def bwtest(
        self,
        src: IsdAs,
        server: ServerDescriptor,
        path: PathRecord | None,
        target_mbps: float,
        ctx: ProbeContext,
    ) -> BandwidthResult: ...

    def traceroute(
        self,
        src: IsdAs,
        dst: IsdAs,
        path: PathRecord | None,
        ctx: ProbeContext,
    ) -> TracerouteResult: ...
