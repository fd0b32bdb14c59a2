from __future__ import annotations

from typing import Collection

from pydantic import BaseModel

from pathml.domain.enums import ProbeAction
from pathml.domain.errors import DomainError, ProbeTimeout, ToolFailed, UnknownDestination, UsageError
from pathml.domain.models.probes import ProbeRequest
from pathml.domain.models.results import ShowpathsResult
from pathml.domain.models.topology import IsdAs
from pathml.domain.ports.probe_backend import ProbeBackend
from pathml.logger import get_logger

DEFAULT_RETRIES = 1


def _dispatch(backend: ProbeBackend, request: ProbeRequest) -> BaseModel:
    ctx = request.context
    match request.action:
        case ProbeAction.SHOWPATHS:
            paths = backend.showpaths(request.src, request.dst, ctx)
            return ShowpathsResult(dst=request.dst, paths=tuple(paths))
        case ProbeAction.PING:
            return backend.ping(request.src, request.dst, request.path, request.count, ctx)
        case ProbeAction.BWTEST:
            if request.server is None or request.target_mbps <= 0:
                raise UsageError("bwtest 请求需要 server 与正的 target_mbps")
            return backend.bwtest(request.src, request.server, request.path, request.target_mbps, ctx)
        case ProbeAction.TRACEROUTE:
            return backend.traceroute(request.src, request.dst, request.path, ctx)
    raise UsageError(f"未知探测动作: {request.action}")


def run_probe(
    backend: ProbeBackend,
    request: ProbeRequest,
    *,
    known_destinations: Collection[IsdAs] | None = None,
    retries: int = DEFAULT_RETRIES,
) -> BaseModel:
    """
    分派一次探测并返回类型化 payload。

    - 目的地必须已注册（给了 known_destinations 时）；
    - 只对 ProbeTimeout 重试，解析错误与工具失败直接抛出；
    - 后端抛出的非领域异常包装成 ToolFailed(kind="unexpected")。
    """
    if known_destinations is not None and request.dst not in known_destinations:
        raise UnknownDestination(f"目的 AS 未注册: {request.dst}", details={"dst": str(request.dst)})

    logger = get_logger().bind(category=request.context.category.value)
    attempt = 0
    while True:
        try:
            return _dispatch(backend, request)
        except ProbeTimeout:
            if attempt >= retries:
                raise
            attempt += 1
            logger.warning(f"探测超时，重试第 {attempt} 次: {request.action.value} {request.src} -> {request.dst}")
        except DomainError:
            raise
        except Exception as exc:
            raise ToolFailed(
                f"探测后端异常: {type(exc).__name__}: {exc}",
                kind="unexpected",
                details={"action": request.action.value, "src": str(request.src), "dst": str(request.dst)},
            ) from exc
