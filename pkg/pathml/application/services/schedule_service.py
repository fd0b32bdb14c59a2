from __future__ import annotations

import shlex
import subprocess
from pathlib import Path
from typing import Callable

from pathml.domain.errors import ToolFailed, UnsupportedInterval
from pathml.domain.models.campaign import CampaignConfig
from pathml.infrastructure.probes.subprocess_adapter import CommandOutput
from pathml.logger import get_logger

CRON_MARKER = "# pathml run-cycle"
MINUTES_PER_DAY = 24 * 60

CrontabRunner = Callable[[list[str], str | None], CommandOutput]


def cron_schedule(interval_minutes: int) -> str:
    """五段式 cron 表达式。只接受能整除 60 的分钟数，或能整除 24 小时的整小时数。"""
    i = int(interval_minutes)
    if 0 < i < 60 and 60 % i == 0:
        return f"*/{i} * * * *"
    if i == 60:
        return "0 * * * *"
    if i > 60 and i % 60 == 0 and MINUTES_PER_DAY % i == 0:
        hours = i // 60
        return "0 0 * * *" if hours == 24 else f"0 */{hours} * * *"
    raise UnsupportedInterval(
        f"无法用 cron 表达的采集间隔: {i} 分钟（请选择 60 的约数，或能整除 24 小时的 60 的倍数）",
        details={"interval_minutes": i},
    )


def cron_line(config: CampaignConfig, *, config_path: Path | str, binary: str = "pathml") -> str:
    command = f"{shlex.quote(binary)} run-cycle --config {shlex.quote(str(config_path))}"
    return f"{cron_schedule(config.pipeline.interval_minutes)} {command} {CRON_MARKER}"


def _run_crontab(cmd: list[str], stdin: str | None) -> CommandOutput:
    try:
        proc = subprocess.run(cmd, input=stdin, capture_output=True, text=True, check=False)
    except FileNotFoundError as exc:
        raise ToolFailed("找不到 crontab 命令", kind="tool_missing") from exc
    return CommandOutput(exit_code=proc.returncode, stdout=proc.stdout or "", stderr=proc.stderr or "")


def merge_crontab(existing: str, line: str) -> str:
    kept = [row for row in existing.splitlines() if row.strip() and CRON_MARKER not in row]
    return "\n".join([*kept, line]) + "\n"


def install_cron(line: str, *, runner: CrontabRunner | None = None) -> str:
    """写入用户 crontab，替换之前安装的 pathml 行；返回写入后的完整 crontab。"""
    run = runner or _run_crontab
    current = run(["crontab", "-l"], None)
    # 没有 crontab 时 `crontab -l` 以非零退出，视为空表。
    existing = current.stdout if current.exit_code == 0 else ""
    merged = merge_crontab(existing, line)
    written = run(["crontab", "-"], merged)
    if written.exit_code != 0:
        raise ToolFailed(f"写入 crontab 失败: {written.tail()}", kind="tool_exit", details={"exit_code": written.exit_code})
    get_logger().bind(category="schedule").info(f"已安装 cron 条目: {line}")
    return merged
