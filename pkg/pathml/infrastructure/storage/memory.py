from __future__ import annotations

from contextlib import contextmanager
from datetime import datetime
from pathlib import Path
from typing import Iterator

from pathml.domain.enums import Category
from pathml.domain.errors import SchemaError
from pathml.domain.models.topology import IsdAs
from pathml.schemas.envelope import RecordEnvelope


class MemoryRecordStore:
    """
    进程内存储：基准任务直接在内存里跑模拟采集，省掉成千上万次小文件读写。
    与文件存储同一个键（时间、类别、pair、fingerprint、seq），同键后写覆盖先写。
    """

    def __init__(self) -> None:
        self._records: dict[tuple[datetime, Category, IsdAs, IsdAs, str | None, int], RecordEnvelope] = {}
        self._current: dict[tuple[IsdAs, IsdAs], RecordEnvelope] = {}
        self._history: dict[tuple[IsdAs, IsdAs], RecordEnvelope] = {}
        self._locked = False

    def store(self, envelope: RecordEnvelope) -> Path | None:
        key = (envelope.timestamp_utc, envelope.category, envelope.src, envelope.dst, envelope.fingerprint, envelope.seq)
        self._records[key] = envelope
        return None

    def rotate_showpaths(self, envelope: RecordEnvelope) -> None:
        if envelope.category != Category.SHOWPATHS:
            raise SchemaError(f"只有 showpaths 记录可以轮转，实际为 {envelope.category.value}")
        pair = (envelope.src, envelope.dst)
        if pair in self._current:
            self._history[pair] = self._current[pair]
        self._current[pair] = envelope

    def current_listing(self, src: IsdAs, dst: IsdAs) -> RecordEnvelope | None:
        return self._current.get((src, dst))

    def history_listing(self, src: IsdAs, dst: IsdAs) -> RecordEnvelope | None:
        return self._history.get((src, dst))

    @contextmanager
    def cycle_lock(self, stale_after_s: float) -> Iterator[bool]:
        if self._locked:
            yield False
            return
        self._locked = True
        try:
            yield True
        finally:
            self._locked = False

    def cycle_log_path(self, started: datetime) -> Path | None:
        return None

    def envelopes(self) -> list[RecordEnvelope]:
        """按 (时间, 类别, src, dst, fingerprint, seq) 排序，和文件存储的遍历顺序一致。"""
        return [self._records[k] for k in sorted(self._records, key=_sort_key)]

    def __len__(self) -> int:
        return len(self._records)


def _sort_key(key: tuple[datetime, Category, IsdAs, IsdAs, str | None, int]) -> tuple:
    ts, category, src, dst, fp, seq = key
    return (ts, category.value, str(src), str(dst), fp or "", seq)
