from __future__ import annotations

from contextlib import AbstractContextManager
from datetime import datetime
from pathlib import Path
from typing import Protocol

from pathml.domain.models.topology import IsdAs
from pathml.schemas.envelope import RecordEnvelope


class RecordStorePort(Protocol):
    """采集器依赖的最小存储接口：文件实现用于真实采集，内存实现用于基准任务的模拟数据。"""

    def store(self, envelope: RecordEnvelope) -> Path | None: ...

    def rotate_showpaths(self, envelope: RecordEnvelope) -> None: ...

    def current_listing(self, src: IsdAs, dst: IsdAs) -> RecordEnvelope | None: ...

    def cycle_lock(self, stale_after_s: float) -> AbstractContextManager[bool]: ...

    def cycle_log_path(self, started: datetime) -> Path | None: ...
