from __future__ import annotations

import logging
import sys
from contextvars import ContextVar, Token
from functools import lru_cache
from pathlib import Path
from typing import cast

from loguru import logger as loguru_logger

from .settings import Settings, load_settings

_CYCLE_ID: ContextVar[str] = ContextVar("pathml_cycle_id", default="-")
_LOGGING_CONFIGURED = False


def current_cycle_id() -> str:
    cycle_id = str(_CYCLE_ID.get() or "").strip()
    return cycle_id or "-"


def set_cycle_id(cycle_id: str) -> Token[str]:
    value = str(cycle_id or "").strip() or "-"
    return _CYCLE_ID.set(value)


def reset_cycle_id(token: Token[str]) -> None:
    _CYCLE_ID.reset(token)


class _InterceptHandler(logging.Handler):
    def emit(self, record: logging.LogRecord) -> None:
        level_name = record.levelname
        try:
            target_level: str | int = loguru_logger.level(level_name).name
        except Exception:
            target_level = record.levelno

        frame = logging.currentframe()
        depth = 2
        while frame and frame.f_code.co_filename == logging.__file__:
            frame = frame.f_back
            depth += 1

        loguru_logger.opt(depth=depth, exception=record.exc_info).log(target_level, record.getMessage())


def _patch_record(record: dict[str, object]) -> None:
    extra = cast(dict[str, object], record["extra"])
    category = str(extra.get("category", "-") or "-").strip() or "-"
    cycle_id = str(extra.get("cycle_id", "") or "").strip()
    if not cycle_id or cycle_id == "-":
        cycle_id = current_cycle_id()
    extra["category"] = category
    extra["cycle_id"] = cycle_id


def setup_logging(settings: Settings | None = None) -> None:
    global _LOGGING_CONFIGURED
    if _LOGGING_CONFIGURED:
        return

    config = settings or load_settings()

    loguru_logger.remove()
    loguru_logger.configure(patcher=_patch_record)
    format_text = (
        "<green>{time:YYYY-MM-DD HH:mm:ss.SSS}</green> | "
        "<level>{level: <8}</level> | "
        "cycle=<cyan>{extra[cycle_id]}</cyan> "
        "category=<magenta>{extra[category]}</magenta> | "
        "{message}"
    )
    # stdout 留给命令输出（含 --json），日志一律走 stderr。
    loguru_logger.add(
        sys.stderr,
        level=config.log_level,
        format=format_text,
        colorize=not config.log_json,
        serialize=config.log_json,
        backtrace=True,
        diagnose=False,
        filter=lambda record: "cycle_log" not in record["extra"],
    )

    if config.log_path:
        path = Path(config.log_path)
        path.parent.mkdir(parents=True, exist_ok=True)
        loguru_logger.add(
            str(path),
            level=config.log_level,
            serialize=True,
            enqueue=True,
            backtrace=True,
            diagnose=False,
            rotation=f"{config.log_rotation_mb} MB",
            retention=f"{config.log_retention_days} days",
            compression="gz",
        )

    intercept = _InterceptHandler()
    root_logger = logging.getLogger()
    root_logger.handlers = [intercept]
    root_logger.setLevel(config.log_level)

    for name in ("asyncio", "concurrent.futures"):
        logger_obj = logging.getLogger(name)
        logger_obj.handlers = [intercept]
        logger_obj.propagate = False
        logger_obj.setLevel(config.log_level)

    _LOGGING_CONFIGURED = True


@lru_cache(maxsize=1)
def get_logger():
    setup_logging(load_settings())
    return loguru_logger.bind(category="-")


def open_cycle_log(path: Path, cycle_id: str) -> int:
    """
    为单个采集周期挂一个专用 sink：只接收 `cycle_log == cycle_id` 的记录，
    每行就是调用方拼好的 `ts | category | pair | fingerprint | status`。
    """
    get_logger()
    path.parent.mkdir(parents=True, exist_ok=True)
    return loguru_logger.add(
        str(path),
        level="INFO",
        format="{message}",
        mode="w",
        encoding="utf-8",
        filter=lambda record: record["extra"].get("cycle_log") == cycle_id,
    )


def close_cycle_log(sink_id: int) -> None:
    loguru_logger.remove(sink_id)
