from __future__ import annotations

from pydantic import ValidationError

from pathml.domain.errors import EmptyOutput, ParseError
from pathml.schemas.common import format_validation_error


def numbered_lines(text: str) -> list[tuple[int, str]]:
    """返回 (行号, 去首尾空白的行)，跳过空行；行号从 1 开始。"""
    if not str(text or "").strip():
        raise EmptyOutput("工具输出为空")
    out: list[tuple[int, str]] = []
    for no, raw in enumerate(str(text).splitlines(), start=1):
        line = raw.rstrip()
        if line.strip():
            out.append((no, line.strip()))
    return out


def last_token(line: str) -> str:
    parts = line.split()
    return parts[-1] if parts else ""


def fail(line_no: int, line: str, message: str, token: str | None = None) -> ParseError:
    return ParseError(message, line=line_no, token=last_token(line) if token is None else token)



def invalid_result(exc: ValidationError, line_no: int = 0) -> ParseError:
    return ParseError(f"解析结果不满足类型约束: {format_validation_error(exc)}", line=line_no, token="")
