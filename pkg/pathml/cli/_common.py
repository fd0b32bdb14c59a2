from __future__ import annotations

"""子命令公共工具（统一的参数解析、输出与错误格式）。"""

import argparse
import json
import sys
from datetime import datetime
from pathlib import Path
from typing import Any, Callable, NoReturn

from pydantic import BaseModel, ValidationError

from pathml.application.services.config_service import load_config
from pathml.config import require_config_path
from pathml.domain.errors import DomainError, SchemaError, UsageError
from pathml.domain.models.campaign import CampaignConfig
from pathml.schemas.common import format_validation_error
from pathml.state import parse_utc

Handler = Callable[[argparse.Namespace], int]


class CliParser(argparse.ArgumentParser):
    """用法错误改为抛 UsageError（exit 1），由 dispatch 统一打印。"""

    def error(self, message: str) -> NoReturn:
        raise UsageError(f"{self.prog}: {message}")


def make_parser(description: str) -> CliParser:
    return CliParser(
        prog="pathml",
        description=description,
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )


def add_command(
    subparsers: argparse._SubParsersAction,
    name: str,
    help_text: str,
    *,
    handler: Handler | None = None,
    parents: list[argparse.ArgumentParser] | None = None,
) -> CliParser:
    parser = subparsers.add_parser(
        name,
        help=help_text,
        description=help_text,
        parents=parents or [],
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    if handler is not None:
        parser.set_defaults(handler=handler)
    return parser


def group(parser: argparse.ArgumentParser, dest: str) -> argparse._SubParsersAction:
    subparsers = parser.add_subparsers(dest=dest, metavar="<command>")
    subparsers.required = True
    return subparsers


def config_parent() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument("--config", default=None, help="campaign 配置文件（缺省读取 PATHML_CONFIG）。")
    return parent


def json_parent() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument("--json", action="store_true", help="输出机器可读的 JSON。")
    return parent


def load_campaign(args: argparse.Namespace) -> tuple[CampaignConfig, Path]:
    path = require_config_path(getattr(args, "config", None))
    return load_config(path), path


def parse_when(text: str | None) -> datetime | None:
    if text is None or not str(text).strip():
        return None
    try:
        return parse_utc(text)
    except (ValueError, OverflowError) as exc:
        raise UsageError(f"无法解析的时间: {text!r}") from exc


def parse_floats(text: str, what: str) -> list[float]:
    try:
        return [float(x) for x in str(text).split(",") if x.strip()]
    except ValueError as exc:
        raise UsageError(f"{what} 需要逗号分隔的数字: {text!r}") from exc


def out(text: str = "") -> None:
    print(text, flush=True)


def emit_json(payload: Any) -> None:
    if isinstance(payload, BaseModel):
        out(payload.model_dump_json(indent=2))
        return
    out(json.dumps(payload, ensure_ascii=False, indent=2, default=str))


def report_error(exc: DomainError) -> int:
    print(f"error[{exc.code}]: {exc.message}", file=sys.stderr, flush=True)
    return int(exc.exit_code)


def as_domain_error(exc: ValidationError) -> DomainError:
    return SchemaError(format_validation_error(exc))
