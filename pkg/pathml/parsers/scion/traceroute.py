"""`scion traceroute` 文本输出解析。

格式::

    traceroute to 19-ffaa:0:1303
    0 17-ffaa:0:1101 0>2 1.21ms 1.10ms 1.09ms
    1 17-ffaa:0:1107 1>3 * * *
    2 19-ffaa:0:1303 4>0 12.3ms 12.1ms 12.6ms

每行为 `序号 ISD-AS 入接口>出接口` 加三个 RTT；任一为 `*` 视为该跳超时。
"""

from __future__ import annotations

import re
from typing import Final, Literal

from pydantic import ValidationError

from pathml.domain.errors import DomainError
from pathml.domain.models.paths import HopRef
from pathml.domain.models.results import TracerouteHop, TracerouteResult
from pathml.domain.models.topology import IsdAs, validate_isd_as
from pathml.transform.fingerprint import path_fingerprint

from ._lines import fail, invalid_result, numbered_lines

TOOL_ID: Final[Literal["traceroute"]] = "traceroute"
TOOL_NAME: Final[str] = "scion traceroute"

_HEADER_RE = re.compile(r"^traceroute to (\S+)$")
_HOP_RE = re.compile(r"^(\d+)\s+(\S+)\s+(\d+)>(\d+)\s+(\S+)\s+(\S+)\s+(\S+)$")
_RTT_RE = re.compile(r"^(\d+(?:\.\d+)?)ms$")

SAMPLE_TEXT: Final[str] = """traceroute to 19-ffaa:0:1303
0 17-ffaa:0:1101 0>2 1.21ms 1.10ms 1.09ms
1 17-ffaa:0:1107 1>3 6.02ms 5.87ms 6.11ms
2 19-ffaa:0:1303 4>0 12.3ms 12.1ms 12.6ms
"""


def _rtts(tokens: tuple[str, str, str], no: int, line: str) -> tuple[float, ...]:
    if "*" in tokens:
        for token in tokens:
            if token != "*" and not _RTT_RE.match(token):
                raise fail(no, line, "非法的 RTT", token)
        return ()
    values: list[float] = []
    for token in tokens:
        m = _RTT_RE.match(token)
        if not m:
            raise fail(no, line, "非法的 RTT", token)
        values.append(float(m.group(1)))
    return tuple(values)


def parse_traceroute(text: str, dst: IsdAs) -> TracerouteResult:
    lines = numbered_lines(text)

    no, line = lines[0]
    header = _HEADER_RE.match(line)
    if not header:
        raise fail(no, line, "缺少表头 `traceroute to <dst>`", line.split()[0])
    try:
        reported = validate_isd_as(header.group(1))
    except DomainError:
        raise fail(no, line, "非法的 ISD-AS", header.group(1)) from None
    if reported != dst:
        raise fail(no, line, f"目的 AS 与请求不一致（期望 {dst}）", header.group(1))
    if len(lines) < 2:
        raise fail(no, line, "没有任何 hop 行")

    hops: list[TracerouteHop] = []
    for no, line in lines[1:]:
        m = _HOP_RE.match(line)
        if not m:
            raise fail(no, line, "无法识别的 hop 行")
        index = int(m.group(1))
        if index != len(hops):
            raise fail(no, line, f"hop 序号不连续（期望 {len(hops)}）", m.group(1))
        try:
            isd_as = validate_isd_as(m.group(2))
        except DomainError:
            raise fail(no, line, "非法的 ISD-AS", m.group(2)) from None
        ref = HopRef(isd_as=isd_as, ingress_if=int(m.group(3)), egress_if=int(m.group(4)))
        rtts = _rtts((m.group(5), m.group(6), m.group(7)), no, line)
        hops.append(TracerouteHop(index=index, hop=ref, rtts_ms=rtts))

    first_no, first_line = lines[1]
    if hops[0].hop.ingress_if != 0:
        raise fail(first_no, first_line, "首跳的入接口必须为 0", f"{hops[0].hop.ingress_if}>{hops[0].hop.egress_if}")
    last_no, last_line = lines[-1]
    if hops[-1].hop.egress_if != 0:
        raise fail(last_no, last_line, "末跳的出接口必须为 0（输出可能被截断）", f"{hops[-1].hop.ingress_if}>{hops[-1].hop.egress_if}")
    if hops[-1].hop.isd_as != dst:
        raise fail(last_no, last_line, f"末跳与目的 AS 不一致（期望 {dst}）", str(hops[-1].hop.isd_as))

    try:
        return TracerouteResult(dst=dst, fingerprint=path_fingerprint([h.hop for h in hops]), hops=tuple(hops))
    except ValidationError as exc:
        raise invalid_result(exc, last_no) from None
