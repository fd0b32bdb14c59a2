"""`scion-bwtestclient` 文本输出解析。

需要 `S->C results` 与 `C->S results` 两段，每段依次包含::

    Attempted bandwidth: 10000000 bps / 10.00 Mbps
    Achieved bandwidth: 9870000 bps / 9.87 Mbps
    Loss rate: 1.3%

段内其它行（例如 Interarrival time）忽略。丢包率取两个方向的均值。
"""

from __future__ import annotations

import re
from typing import Final, Literal

from pydantic import ValidationError

from pathml.domain.errors import InvariantViolation, ParseError, ServerUnreachable
from pathml.domain.models.results import BANDWIDTH_MARGIN, BandwidthResult
from pathml.domain.models.topology import ServerDescriptor

from ._lines import fail, invalid_result, numbered_lines

TOOL_ID: Final[Literal["bwtest"]] = "bwtest"
TOOL_NAME: Final[str] = "scion-bwtestclient"

_NUM = r"(\d+(?:\.\d+)?)"
_SECTION_RE = re.compile(r"^(S->C|C->S) results$")
_ATTEMPTED_RE = re.compile(r"^Attempted bandwidth: (?:\d+ bps / )?" + _NUM + r" Mbps$")
_ACHIEVED_RE = re.compile(r"^Achieved bandwidth: (?:\d+ bps / )?" + _NUM + r" Mbps$")
_LOSS_RE = re.compile(r"^Loss rate: " + _NUM + r" ?%$")
_UNREACHABLE_RE = re.compile(r"connection refused|no route to host|server unreachable", re.IGNORECASE)

SAMPLE_TEXT: Final[str] = """Test parameters:
client->server: 3 seconds, 1000 bytes, 3750 packets
server->client: 3 seconds, 1000 bytes, 3750 packets
We need to sleep for 4 seconds before we can get the results
S->C results
Attempted bandwidth: 10000000 bps / 10.00 Mbps
Achieved bandwidth: 9870000 bps / 9.87 Mbps
Loss rate: 1.3%
Interarrival time min/avg/max/mdev = 0.8/1.0/1.6/0.1 ms
C->S results
Attempted bandwidth: 10000000 bps / 10.00 Mbps
Achieved bandwidth: 9910000 bps / 9.91 Mbps
Loss rate: 0.9%
Interarrival time min/avg/max/mdev = 0.8/1.0/1.5/0.1 ms
"""


def _section(lines: list[tuple[int, str]], start: int, label: str) -> tuple[float, float, float]:
    header_no, header = lines[start]
    wanted = [("attempted", _ATTEMPTED_RE), ("achieved", _ACHIEVED_RE), ("loss", _LOSS_RE)]
    found: dict[str, float] = {}
    i = start + 1
    while i < len(lines) and wanted:
        no, line = lines[i]
        if _SECTION_RE.match(line):
            break
        key, pattern = wanted[0]
        m = pattern.match(line)
        if m:
            found[key] = float(m.group(1))
            wanted.pop(0)
        i += 1
    if wanted:
        key = wanted[0][0]
        raise fail(header_no, header, f"{label} 段缺少 {key} 行", label)
    if not 0.0 <= found["loss"] <= 100.0:
        raise fail(header_no, header, f"{label} 段丢包率超出 [0, 100]", str(found["loss"]))
    return found["attempted"], found["achieved"], found["loss"]


def parse_bwtest(
    text: str,
    target_mbps: float,
    *,
    server: ServerDescriptor | None = None,
    fingerprint: str | None = None,
) -> BandwidthResult:
    if _UNREACHABLE_RE.search(str(text or "")):
        raise ServerUnreachable("带宽测试服务器不可达", details={"server": server.address if server else None})
    lines = numbered_lines(text)

    starts: dict[str, int] = {}
    for i, (_, line) in enumerate(lines):
        m = _SECTION_RE.match(line)
        if m and m.group(1) not in starts:
            starts[m.group(1)] = i
    for label in ("S->C", "C->S"):
        if label not in starts:
            no, line = lines[-1]
            raise ParseError(f"缺少 `{label} results` 段", line=no, token=line.split()[-1])

    _, sc, sc_loss = _section(lines, starts["S->C"], "S->C")
    _, cs, cs_loss = _section(lines, starts["C->S"], "C->S")

    limit = BANDWIDTH_MARGIN * target_mbps
    if sc > limit or cs > limit:
        raise InvariantViolation(
            f"实测带宽超过目标的 {BANDWIDTH_MARGIN} 倍: sc={sc} cs={cs} target={target_mbps}",
            details={"target_mbps": target_mbps, "sc": sc, "cs": cs},
        )
    try:
        return BandwidthResult(
            server=server,
            fingerprint=fingerprint,
            target_mbps=target_mbps,
            achieved_cs_mbps=cs,
            achieved_sc_mbps=sc,
            loss_pct=(sc_loss + cs_loss) / 2.0,
        )
    except ValidationError as exc:
        raise invalid_result(exc) from None
