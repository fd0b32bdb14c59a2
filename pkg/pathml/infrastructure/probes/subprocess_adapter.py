"""真实 SCION 工具的子进程适配器。

只负责拼命令、跑子进程、把输出交给 `pathml.parsers.scion`；
不同 SCION 版本的参数差异属于适配器自身的问题，核心逻辑不感知。
"""

from __future__ import annotations

import subprocess
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Mapping

from pathml.domain.errors import BackendError, ParseError, ProbeTimeout, ToolFailed
from pathml.domain.models.paths import PathRecord
from pathml.domain.models.probes import ProbeContext
from pathml.domain.models.results import BandwidthResult, PingResult, TracerouteResult
from pathml.domain.models.topology import IsdAs, ServerDescriptor
from pathml.logger import get_logger
from pathml.parsers.scion import parse_bwtest, parse_ping, parse_showpaths, parse_traceroute

STDERR_TAIL_CHARS = 400
BWTEST_DURATION_S = 3
BWTEST_PACKET_BYTES = 1000


@dataclass(frozen=True, slots=True)
class CommandOutput:
    exit_code: int
    stdout: str
    stderr: str

    def tail(self) -> str:
        text = (self.stderr or self.stdout).strip()
        return text[-STDERR_TAIL_CHARS:]


CommandRunner = Callable[[list[str], float], CommandOutput]


def run_command(cmd: list[str], timeout_s: float) -> CommandOutput:
    try:
        proc = subprocess.run(
            cmd,
            capture_output=True,
            text=True,
            encoding="utf-8",
            errors="replace",
            timeout=timeout_s,
            check=False,
        )
    except subprocess.TimeoutExpired as exc:
        raise ProbeTimeout(f"命令超时（{timeout_s:g}s）: {' '.join(cmd)}", details={"cmd": cmd}) from exc
    except FileNotFoundError as exc:
        raise ToolFailed(f"找不到可执行文件: {cmd[0]}", kind="tool_missing", details={"cmd": cmd}) from exc
    return CommandOutput(exit_code=proc.returncode, stdout=proc.stdout or "", stderr=proc.stderr or "")


def _tool(bin_dir: str, name: str) -> str:
    return str(Path(bin_dir) / name) if bin_dir else name


def _sequence_args(path: PathRecord | None) -> list[str]:
    return ["--sequence", path.sequence()] if path is not None else []


def showpaths_command(bin_dir: str, dst: IsdAs) -> list[str]:
    return [_tool(bin_dir, "scion"), "showpaths", str(dst), "--format", "human"]


def ping_command(bin_dir: str, target: str, count: int, path: PathRecord | None) -> list[str]:
    return [_tool(bin_dir, "scion"), "ping", target, "-c", str(count), *_sequence_args(path)]


def bwtest_command(bin_dir: str, server: ServerDescriptor, target_mbps: float, path: PathRecord | None) -> list[str]:
    params = f"{BWTEST_DURATION_S},{BWTEST_PACKET_BYTES},?,{target_mbps:g}Mbps"
    return [
        _tool(bin_dir, "scion-bwtestclient"),
        "-s",
        f"{server.isd_as},{server.address}",
        "-cs",
        params,
        *_sequence_args(path),
    ]


def traceroute_command(bin_dir: str, target: str, path: PathRecord | None) -> list[str]:
    return [_tool(bin_dir, "scion"), "traceroute", target, *_sequence_args(path)]


class SubprocessAdapter:
    """ProbeBackend 的真实实现；`runner` 可替换，测试里注入固定输出。"""

    name = "scion"

    def __init__(
        self,
        *,
        bin_dir: str = "",
        hosts: Mapping[IsdAs, str] | None = None,
        runner: CommandRunner | None = None,
        version: str | None = None,
    ) -> None:
        self._bin_dir = bin_dir
        self._hosts = dict(hosts or {})
        self._runner = runner or run_command
        self._version = version
        self._logger = get_logger().bind(category="probe")

    @property
    def version(self) -> str:
        if self._version is None:
            try:
                out = self._runner([_tool(self._bin_dir, "scion"), "version"], 10.0)
                first = out.stdout.strip().splitlines()[0] if out.exit_code == 0 and out.stdout.strip() else ""
            except BackendError:
                first = ""
            self._version = first.strip() or "unknown"
        return self._version

    def _target(self, dst: IsdAs) -> str:
        host = self._hosts.get(dst)
        return f"{dst},{host}" if host else str(dst)

    def _run(self, cmd: list[str], ctx: ProbeContext) -> CommandOutput:
        self._logger.debug(f"执行命令: {' '.join(cmd)}")
        return self._runner(cmd, ctx.timeout_s)

    def _failed(self, cmd: list[str], out: CommandOutput) -> ToolFailed:
        return ToolFailed(
            f"{Path(cmd[0]).name} 退出码 {out.exit_code}: {out.tail()}",
            kind="tool_exit",
            details={"exit_code": out.exit_code, "stderr_tail": out.tail()},
        )

    def showpaths(self, src: IsdAs, dst: IsdAs, ctx: ProbeContext) -> list[PathRecord]:
        cmd = showpaths_command(self._bin_dir, dst)
        out = self._run(cmd, ctx)
        if out.exit_code != 0:
            raise self._failed(cmd, out)
        return list(parse_showpaths(out.stdout, dst).paths)

    def ping(self, src: IsdAs, dst: IsdAs, path: PathRecord | None, count: int, ctx: ProbeContext) -> PingResult:
        cmd = ping_command(self._bin_dir, self._target(dst), count, path)
        out = self._run(cmd, ctx)
        fingerprint = path.fingerprint if path else None
        if out.exit_code == 0:
            return parse_ping(out.stdout, dst, fingerprint=fingerprint)
        # 全部丢包时工具以非零码退出，但统计尾部仍然完整。
        try:
            return parse_ping(out.stdout, dst, fingerprint=fingerprint)
        except ParseError:
            raise self._failed(cmd, out) from None

    def bwtest(
        self,
        src: IsdAs,
        server: ServerDescriptor,
        path: PathRecord | None,
        target_mbps: float,
        ctx: ProbeContext,
    ) -> BandwidthResult:
        cmd = bwtest_command(self._bin_dir, server, target_mbps, path)
        out = self._run(cmd, ctx)
        fingerprint = path.fingerprint if path else None
        text = out.stdout if out.exit_code == 0 else f"{out.stdout}\n{out.stderr}"
        try:
            return parse_bwtest(text, target_mbps, server=server, fingerprint=fingerprint)
        except ParseError:
            if out.exit_code != 0:
                raise self._failed(cmd, out) from None
            raise

    def traceroute(self, src: IsdAs, dst: IsdAs, path: PathRecord | None, ctx: ProbeContext) -> TracerouteResult:
        cmd = traceroute_command(self._bin_dir, self._target(dst), path)
        out = self._run(cmd, ctx)
        if out.exit_code != 0:
            raise self._failed(cmd, out)
        return parse_traceroute(out.stdout, dst)
