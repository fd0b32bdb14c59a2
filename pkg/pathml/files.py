"""测量记录文件名编解码。

文件名形如 `<ts>_<src>_<dst>[_<fp>]_<seq>.json`：
- ts 为 UTC 紧凑时间戳（精确到秒）；
- ISD-AS 中的 `:` 在文件名里写成 `-`（跨平台安全），且 token 不含 `_`，可按 `_` 无歧义切分；
- seq 为 4 位碰撞后缀（同一秒、同一 pair/路径的多条记录，例如不同带宽档位）。
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from datetime import datetime

from .domain.models.topology import IsdAs, validate_isd_as
from .state import compact_utc, parse_compact_utc

_RECORD_NAME_RE = re.compile(
    r"^(?P<ts>\d{8}T\d{6}Z)_(?P<src>\d+-[0-9a-f-]+)_(?P<dst>\d+-[0-9a-f-]+)"
    r"(?:_(?P<fp>[0-9a-f]{16}))?_(?P<seq>\d{4})\.json$"
)


@dataclass(frozen=True, slots=True)
class RecordKey:
    timestamp: datetime
    src: IsdAs
    dst: IsdAs
    fingerprint: str | None
    seq: int


def isd_as_token(isd_as: IsdAs) -> str:
    return f"{isd_as.isd}-{isd_as.as_code.replace(':', '-')}"


def parse_isd_as_token(token: str) -> IsdAs:
    isd, _, as_part = token.partition("-")
    return validate_isd_as(f"{isd}-{as_part.replace('-', ':')}")


def record_filename(
    timestamp: datetime,
    src: IsdAs,
    dst: IsdAs,
    fingerprint: str | None,
    seq: int,
) -> str:
    if not 0 <= seq <= 9999:
        raise ValueError(f"seq 超出 4 位后缀范围: {seq}")
    parts = [compact_utc(timestamp), isd_as_token(src), isd_as_token(dst)]
    if fingerprint:
        parts.append(fingerprint)
    parts.append(f"{seq:04d}")
    return "_".join(parts) + ".json"


def parse_record_filename(name: str) -> RecordKey | None:
    """不匹配（临时文件、手工放入的文件等）时返回 None。"""
    match = _RECORD_NAME_RE.match(name)
    if not match:
        return None
    try:
        return RecordKey(
            timestamp=parse_compact_utc(match.group("ts")),
            src=parse_isd_as_token(match.group("src")),
            dst=parse_isd_as_token(match.group("dst")),
            fingerprint=match.group("fp"),
            seq=int(match.group("seq")),
        )
    except Exception:
        return None


def pair_filename(src: IsdAs, dst: IsdAs) -> str:
    return f"{isd_as_token(src)}_{isd_as_token(dst)}.json"
