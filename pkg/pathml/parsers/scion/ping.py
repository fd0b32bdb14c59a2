"""`scion ping` 文本输出解析（iputils 风格统计尾部）。

只依赖统计尾部::

    --- 19-ffaa:0:1303,10.0.0.3 statistics ---
    10 packets transmitted, 9 received, 10% packet loss, time 9012ms
    rtt min/avg/max/mdev = 11.2/12.0/13.1/0.4 ms

全部丢包时没有 rtt 行。丢包率以包数计算，与工具报告值的差不得超过 1 个百分点。
"""

from __future__ import annotations

import re
from typing import Final, Literal

from pydantic import ValidationError

from pathml.domain.errors import DomainError
from pathml.domain.models.results import PingResult, loss_from_counts
from pathml.domain.models.topology import IsdAs, validate_isd_as

from ._lines import fail, invalid_result, numbered_lines

TOOL_ID: Final[Literal["ping"]] = "ping"
TOOL_NAME: Final[str] = "scion ping"

REPORTED_LOSS_TOLERANCE_PCT: Final[float] = 1.0

_NUM = r"(\d+(?:\.\d+)?)"
_STATS_RE = re.compile(r"^--- (\S+) statistics ---$")
_SUMMARY_RE = re.compile(
    r"^(\d+) (?:packets )?transmitted, (\d+) received(?:, \+\d+ errors)?, "
    + _NUM
    + r"% packet loss(?:, time \d+(?:\.\d+)?ms)?$"
)
_RTT_RE = re.compile(r"^(?:rtt )?min/avg/max/mdev = " + "/".join([_NUM] * 4) + r" ms$")

SAMPLE_TEXT: Final[str] = """Resolved local address:
  127.0.0.1
PING 19-ffaa:0:1303,10.0.0.3:0 pld=0B scion_pkt=112B
120 bytes from 19-ffaa:0:1303,10.0.0.3: scmp_seq=0 time=11.9ms
120 bytes from 19-ffaa:0:1303,10.0.0.3: scmp_seq=1 time=12.1ms

--- 19-ffaa:0:1303,10.0.0.3 statistics ---
10 packets transmitted, 9 received, 10% packet loss, time 9012ms
rtt min/avg/max/mdev = 11.2/12.0/13.1/0.4 ms
"""


def parse_ping(text: str, dst: IsdAs, *, fingerprint: str | None = None) -> PingResult:
    lines = numbered_lines(text)

    marker = next((i for i, (_, line) in enumerate(lines) if _STATS_RE.match(line)), None)
    if marker is None:
        no, line = lines[-1]
        raise fail(no, line, "缺少统计行 `--- <dst> statistics ---`")
    no, line = lines[marker]
    host = _STATS_RE.match(line).group(1)  # type: ignore[union-attr]
    try:
        reported_dst = validate_isd_as(host.split(",", 1)[0])
    except DomainError:
        raise fail(no, line, "统计行中的目的地址非法", host) from None
    if reported_dst != dst:
        raise fail(no, line, f"目的 AS 与请求不一致（期望 {dst}）", host)

    rest = lines[marker + 1 :]
    if not rest:
        raise fail(no, line, "缺少发送/接收汇总行")
    no, line = rest[0]
    summary = _SUMMARY_RE.match(line)
    if not summary:
        raise fail(no, line, "无法识别的汇总行")
    sent, received = int(summary.group(1)), int(summary.group(2))
    reported_loss = float(summary.group(3))
    if sent <= 0:
        raise fail(no, line, "发送数必须为正", summary.group(1))
    if received > sent:
        raise fail(no, line, "接收数大于发送数", summary.group(2))
    loss = loss_from_counts(sent, received)
    if abs(loss - reported_loss) > REPORTED_LOSS_TOLERANCE_PCT:
        raise fail(no, line, f"报告丢包率与包数不一致（计算值 {loss:.2f}%）", summary.group(3) + "%")

    rtt: tuple[float, float, float, float] | None = None
    tail = rest[1:]
    if received > 0:
        if not tail:
            raise fail(no, line, "有回包但缺少 rtt 统计行")
        no, line = tail[0]
        m = _RTT_RE.match(line)
        if not m:
            raise fail(no, line, "无法识别的 rtt 统计行")
        rtt = (float(m.group(1)), float(m.group(2)), float(m.group(3)), float(m.group(4)))
        if not rtt[0] <= rtt[1] <= rtt[2]:
            raise fail(no, line, "rtt 需满足 min ≤ avg ≤ max", m.group(0).split("=", 1)[1].strip())
        tail = tail[1:]
    if tail:
        no, line = tail[0]
        raise fail(no, line, "统计尾部之后出现多余内容")

    try:
        if rtt is None:
            return PingResult(dst=dst, fingerprint=fingerprint, sent=sent, received=received, loss_pct=loss)
        return PingResult(
            dst=dst,
            fingerprint=fingerprint,
            sent=sent,
            received=received,
            loss_pct=loss,
            rtt_min_ms=rtt[0],
            rtt_avg_ms=rtt[1],
            rtt_max_ms=rtt[2],
            jitter_ms=rtt[3],
        )
    except ValidationError as exc:
        raise invalid_result(exc, no) from None
