"""`scion showpaths` 文本输出解析。

格式（空行忽略）::

    Available paths to 19-ffaa:0:1303
    2 Paths:
    [0] Hops: [17-ffaa:0:1101 2>1 19-ffaa:0:1303] MTU: 1472 NextHop: 127.0.0.17:31002 Expires: 2024-06-01T12:00:00Z Status: alive LocalIP: 127.0.0.1
    [1] Hops: [...] ...

Hops 中 AS 与链路 `出接口>入接口` 交替出现；首跳 ingress 与末跳 egress 记为 0。
"""

from __future__ import annotations

import re
from datetime import datetime
from typing import Final, Literal

from pydantic import ValidationError

from pathml.domain.enums import PathStatus
from pathml.domain.errors import DomainError, ParseError
from pathml.domain.models.paths import HopRef, PathRecord
from pathml.domain.models.results import ShowpathsResult
from pathml.domain.models.topology import IsdAs, validate_isd_as

from ._lines import fail, invalid_result, numbered_lines

TOOL_ID: Final[Literal["showpaths"]] = "showpaths"
TOOL_NAME: Final[str] = "scion showpaths"

_HEADER_RE = re.compile(r"^Available paths to (\S+)$")
_COUNT_RE = re.compile(r"^(\d+) Paths?:$")
_PATH_RE = re.compile(
    r"^\[(?P<idx>\d+)\]\s+Hops:\s+\[(?P<hops>[^\]]*)\]"
    r"\s+MTU:\s+(?P<mtu>\d+)"
    r"\s+NextHop:\s+(?P<next>\S+)"
    r"\s+Expires:\s+(?P<exp>\S+)"
    r"\s+Status:\s+(?P<status>\S+)"
    r"(?:\s+LocalIP:\s+\S+)?$"
)
_LINK_RE = re.compile(r"^(\d+)>(\d+)$")

SAMPLE_TEXT: Final[str] = """Available paths to 19-ffaa:0:1303
2 Paths:
[0] Hops: [17-ffaa:0:1101 2>1 17-ffaa:0:1107 3>4 19-ffaa:0:1303] MTU: 1472 NextHop: 127.0.0.17:31002 Expires: 2024-06-01T18:00:00Z Status: alive LocalIP: 127.0.0.1
[1] Hops: [17-ffaa:0:1101 5>2 19-ffaa:0:1303] MTU: 1400 NextHop: 127.0.0.17:31002 Expires: 2024-06-01T18:00:00Z Status: timeout LocalIP: 127.0.0.1
"""


def _parse_as(token: str, line_no: int, line: str) -> IsdAs:
    try:
        return validate_isd_as(token)
    except DomainError:
        raise fail(line_no, line, "非法的 ISD-AS", token) from None


def _parse_hops(spec: str, line_no: int, line: str) -> list[HopRef]:
    tokens = spec.split()
    if not tokens or len(tokens) % 2 == 0:
        raise fail(line_no, line, "Hops 序列必须以 AS 开头并以 AS 结尾", tokens[-1] if tokens else "[]")
    ases = [_parse_as(t, line_no, line) for t in tokens[0::2]]
    links: list[tuple[int, int]] = []
    for token in tokens[1::2]:
        m = _LINK_RE.match(token)
        if not m:
            raise fail(line_no, line, "非法的链路接口对（应为 out>in）", token)
        links.append((int(m.group(1)), int(m.group(2))))

    hops: list[HopRef] = []
    for i, isd_as in enumerate(ases):
        ingress = links[i - 1][1] if i > 0 else 0
        egress = links[i][0] if i < len(links) else 0
        hops.append(HopRef(isd_as=isd_as, ingress_if=ingress, egress_if=egress))
    return hops


def _parse_expiry(token: str, line_no: int, line: str) -> datetime:
    try:
        value = datetime.fromisoformat(token)
    except ValueError:
        raise fail(line_no, line, "非法的过期时间", token) from None
    if value.tzinfo is None:
        raise fail(line_no, line, "过期时间必须带时区", token)
    return value


def parse_showpaths(text: str, dst: IsdAs) -> ShowpathsResult:
    lines = numbered_lines(text)

    no, line = lines[0]
    header = _HEADER_RE.match(line)
    if not header:
        raise fail(no, line, "缺少表头 `Available paths to <dst>`", line.split()[0])
    if _parse_as(header.group(1), no, line) != dst:
        raise fail(no, line, f"目的 AS 与请求不一致（期望 {dst}）", header.group(1))

    if len(lines) < 2:
        raise ParseError("缺少路径数量行", line=no + 1, token="")
    no, line = lines[1]
    count_match = _COUNT_RE.match(line)
    if not count_match:
        raise fail(no, line, "缺少路径数量行 `N Paths:`", line.split()[0])
    expected = int(count_match.group(1))

    paths: list[PathRecord] = []
    seen: set[str] = set()
    for no, line in lines[2:]:
        m = _PATH_RE.match(line)
        if not m:
            raise fail(no, line, "无法识别的路径行")
        idx = int(m.group("idx"))
        if idx != len(paths):
            raise fail(no, line, f"路径序号不连续（期望 {len(paths)}）", f"[{idx}]")
        hops = _parse_hops(m.group("hops"), no, line)
        if hops[-1].isd_as != dst:
            raise fail(no, line, f"路径终点与目的 AS 不一致（期望 {dst}）", str(hops[-1].isd_as))
        try:
            status = PathStatus(m.group("status").lower())
        except ValueError:
            raise fail(no, line, "未知的路径状态", m.group("status")) from None
        mtu = int(m.group("mtu"))
        if mtu <= 0:
            raise fail(no, line, "MTU 必须为正", m.group("mtu"))
        expiry = _parse_expiry(m.group("exp"), no, line)
        try:
            record = PathRecord.from_hops(hops, mtu=mtu, status=status, expiry=expiry, next_hop=m.group("next"))
        except ValidationError as exc:
            raise invalid_result(exc, no) from None
        if record.fingerprint in seen:
            raise fail(no, line, "重复的路径", record.fingerprint)
        seen.add(record.fingerprint)
        paths.append(record)

    if len(paths) != expected:
        last_no, last_line = lines[-1]
        raise fail(last_no, last_line, f"路径数量不一致：声明 {expected}，实际 {len(paths)}")
    return ShowpathsResult(dst=dst, paths=tuple(paths))
