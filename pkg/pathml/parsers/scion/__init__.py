"""SCION 工具输出解析器 registry。

- 每个探测动作对应一个解析器模块（showpaths / ping / bwtest / traceroute）；
- 对外提供稳定的列表（供 CLI / 文档渲染）以及按 tool_id 获取解析器；
- 解析器只接受文本，不做任何 I/O，真实后端与测试共用同一套解析。
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Callable, Final, Literal, TypeAlias

from .bwtest import SAMPLE_TEXT as BWTEST_SAMPLE, TOOL_ID as BWTEST_ID, TOOL_NAME as BWTEST_NAME, parse_bwtest
from .ping import SAMPLE_TEXT as PING_SAMPLE, TOOL_ID as PING_ID, TOOL_NAME as PING_NAME, parse_ping
from .showpaths import (
    SAMPLE_TEXT as SHOWPATHS_SAMPLE,
    TOOL_ID as SHOWPATHS_ID,
    TOOL_NAME as SHOWPATHS_NAME,
    parse_showpaths,
)
from .traceroute import (
    SAMPLE_TEXT as TRACEROUTE_SAMPLE,
    TOOL_ID as TRACEROUTE_ID,
    TOOL_NAME as TRACEROUTE_NAME,
    parse_traceroute,
)

# 注意：新增解析器时，请在这里把 tool id 加入 Literal 联合类型。
ScionToolId: TypeAlias = Literal["showpaths", "ping", "bwtest", "traceroute"]


@dataclass(frozen=True, slots=True)
class ToolParser:
    tool_id: ScionToolId
    tool_name: str
    parse: Callable[..., Any]
    sample: str


SHOWPATHS_PARSER: Final[ToolParser] = ToolParser(SHOWPATHS_ID, SHOWPATHS_NAME, parse_showpaths, SHOWPATHS_SAMPLE)
PING_PARSER: Final[ToolParser] = ToolParser(PING_ID, PING_NAME, parse_ping, PING_SAMPLE)
BWTEST_PARSER: Final[ToolParser] = ToolParser(BWTEST_ID, BWTEST_NAME, parse_bwtest, BWTEST_SAMPLE)
TRACEROUTE_PARSER: Final[ToolParser] = ToolParser(TRACEROUTE_ID, TRACEROUTE_NAME, parse_traceroute, TRACEROUTE_SAMPLE)

_PARSERS: Final[tuple[ToolParser, ...]] = (SHOWPATHS_PARSER, PING_PARSER, BWTEST_PARSER, TRACEROUTE_PARSER)


def iter_tool_parsers() -> tuple[ToolParser, ...]:
    return _PARSERS


def get_tool_parser(tool_id: str) -> ToolParser:
    """根据 tool_id 获取解析器。"""

    match str(tool_id or "").strip().lower():
        case "showpaths":
            return SHOWPATHS_PARSER
        case "ping":
            return PING_PARSER
        case "bwtest":
            return BWTEST_PARSER
        case "traceroute":
            return TRACEROUTE_PARSER
        case _:
            raise KeyError(f"未知 SCION 工具: {tool_id}")


__all__ = [
    "ToolParser",
    "ScionToolId",
    "get_tool_parser",
    "iter_tool_parsers",
    "parse_bwtest",
    "parse_ping",
    "parse_showpaths",
    "parse_traceroute",
]
