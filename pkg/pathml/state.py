from __future__ import annotations

import os
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable

from dateutil import parser as date_parser

_TS_COMPACT = "%Y%m%dT%H%M%SZ"


def utc_now() -> datetime:
    return datetime.now(timezone.utc)


def as_utc(value: datetime) -> datetime:
    if value.tzinfo is None:
        return value.replace(tzinfo=timezone.utc)
    return value.astimezone(timezone.utc)


def iso_utc(value: datetime) -> str:
    return as_utc(value).strftime("%Y-%m-%dT%H:%M:%SZ")


def compact_utc(value: datetime) -> str:
    """文件名用的紧凑时间戳（精确到秒）。"""
    return as_utc(value).strftime(_TS_COMPACT)


def parse_compact_utc(text: str) -> datetime:
    return datetime.strptime(text, _TS_COMPACT).replace(tzinfo=timezone.utc)


def parse_utc(text: str) -> datetime:
    """
    宽松解析用户输入的时间（CLI 的 --from/--to）：
    `2025-01-01`、`2025-01-01T06:00`、`2025-01-01T06:00:00Z` 都可以；无时区按 UTC 处理。
    """
    value = str(text or "").strip()
    if not value:
        raise ValueError("时间不能为空")
    return as_utc(date_parser.isoparse(value))


def write_text_atomic(
    path: Path,
    text: str,
    *,
    before_rename: Callable[[Path], None] | None = None,
) -> Path:
    """
    先写同目录的隐藏临时文件再 rename：读者要么看到旧文件，要么看到完整的新文件。
    `before_rename` 仅用于故障注入测试。
    """
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(f".{path.name}.tmp")
    with tmp.open("w", encoding="utf-8") as f:
        f.write(text)
        f.flush()
        os.fsync(f.fileno())
    if before_rename is not None:
        before_rename(tmp)
    os.replace(tmp, path)
    return path

