from __future__ import annotations

from dataclasses import dataclass

from pathml.domain.enums import Category, ProbeAction

from .paths import PathRecord
from .topology import IsdAs, ServerDescriptor

DEFAULT_PROBE_TIMEOUT_S = 60.0


@dataclass(frozen=True, slots=True)
class ProbeContext:
    """一次探测的上下文：确定性后端用 (cycle, category) 作为随机流的键。"""

    cycle: int
    category: Category
    timeout_s: float = DEFAULT_PROBE_TIMEOUT_S


@dataclass(frozen=True, slots=True)
class ProbeRequest:
    action: ProbeAction
    src: IsdAs
    dst: IsdAs
    context: ProbeContext
    path: PathRecord | None = None
    server: ServerDescriptor | None = None
    count: int = 10
    target_mbps: float = 0.0
