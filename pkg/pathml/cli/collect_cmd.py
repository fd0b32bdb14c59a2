"""run-cycle 与 schedule：单次采集周期，以及把它交给 cron。"""

from __future__ import annotations

import argparse
from pathlib import Path

from pathml.application.services.collector_service import CycleReport, run_cycle
from pathml.application.services.schedule_service import cron_line, install_cron
from pathml.domain.errors import BackendError
from pathml.domain.models.campaign import CampaignConfig
from pathml.domain.models.clock import CycleClock
from pathml.domain.ports.probe_backend import ProbeBackend
from pathml.infrastructure.probes.subprocess_adapter import SubprocessAdapter
from pathml.infrastructure.storage.files.measurement_store import MeasurementStore
from pathml.settings import load_settings
from pathml.simnet import SimNet, SimNetBackend, SimSpec, build, load_event_plan, load_simspec, schedule_events
from pathml.state import utc_now

from ._common import add_command, config_parent, emit_json, group, json_parent, load_campaign, out


def load_sim(spec_path: str | None, events_path: str | None, *, seed: int | None = None) -> SimNet:
    spec = load_simspec(Path(spec_path)) if spec_path else SimSpec()
    if seed is not None:
        spec = spec.model_copy(update={"seed": seed})
    sim = build(spec)
    if events_path:
        sim = schedule_events(sim, load_event_plan(Path(events_path)))
    return sim


def _sim_cycle(sim: SimNet, requested: int | None) -> int:
    if requested is not None:
        return requested
    elapsed = (utc_now() - sim.spec.epoch).total_seconds() // 60
    return max(0, int(elapsed // sim.spec.cycle_minutes))


def _backend(args: argparse.Namespace, config: CampaignConfig) -> tuple[ProbeBackend, CycleClock]:
    if args.backend == "sim":
        sim = load_sim(args.simspec, args.events)
        return SimNetBackend(sim), sim.clock(_sim_cycle(sim, args.cycle))
    settings = load_settings()
    hosts = {a.isd_as: a.ip for a in config.ases}
    backend = SubprocessAdapter(bin_dir=settings.scion_bin, hosts=hosts)
    return backend, CycleClock.from_wall(utc_now(), config.pipeline.interval_minutes)


def print_cycle(report: CycleReport) -> None:
    if report.lock_skipped:
        out(f"cycle {report.cycle}: skipped (previous cycle still running)")
        return
    out(f"cycle {report.cycle} @ {report.cycle_start.strftime('%Y-%m-%dT%H:%M:%SZ')} ({report.duration_ms} ms)")
    for category, counts in report.counts.items():
        if counts.attempted:
            out(f"  {category.value:<13} {counts.succeeded}/{counts.attempted} ok")
    for skipped in report.skipped:
        out(f"  skipped {skipped.category.value} {skipped.src} -> {skipped.dst}: {skipped.reason}")
    if report.log_path:
        out(f"  log: {report.log_path}")


def cmd_run_cycle(args: argparse.Namespace) -> int:
    config, _ = load_campaign(args)
    settings = load_settings()
    backend, clock = _backend(args, config)
    store = MeasurementStore(Path(config.storage_root))
    report = run_cycle(
        config,
        backend,
        store,
        clock,
        retries=settings.probe_retries,
        timeout_s=settings.probe_timeout_s,
    )
    if args.json:
        emit_json(report)
    else:
        print_cycle(report)
    attempted = report.total("attempted")
    if attempted and report.total("succeeded") == 0:
        # 整个周期没有一次成功，通常是工具缺失或网络不可用。
        raise BackendError(
            f"周期 {report.cycle} 的 {attempted} 次探测全部失败（详见周期日志）",
            kind="all_probes_failed",
            details={"attempted": attempted},
        )
    return 0


def _cron_line(args: argparse.Namespace) -> str:
    config, path = load_campaign(args)
    return cron_line(config, config_path=path.resolve(), binary=args.binary)


def cmd_schedule_print(args: argparse.Namespace) -> int:
    out(_cron_line(args))
    return 0


def cmd_schedule_install(args: argparse.Namespace) -> int:
    line = _cron_line(args)
    install_cron(line)
    out(line)
    return 0


def register(subparsers: argparse._SubParsersAction) -> None:
    cfg = config_parent()
    run = add_command(
        subparsers,
        "run-cycle",
        "执行一个采集周期：按启用的类别探测每个远端 AS 并写入存储。",
        handler=cmd_run_cycle,
        parents=[cfg, json_parent()],
    )
    run.add_argument("--backend", choices=("scion", "sim"), default="scion")
    run.add_argument("--simspec", default=None, help="模拟后端使用的 simspec.json。")
    run.add_argument("--events", default=None, help="模拟后端使用的 events.json。")
    run.add_argument("--cycle", type=int, default=None, help="模拟后端的周期序号（缺省按当前时间推算）。")

    schedule = add_command(subparsers, "schedule", "生成或安装 cron 调度条目。")
    sub = group(schedule, "schedule_command")
    for name, handler, help_text in (
        ("print", cmd_schedule_print, "打印 cron 条目。"),
        ("install", cmd_schedule_install, "写入用户 crontab（替换之前的 pathml 条目）。"),
    ):
        cmd = add_command(sub, name, help_text, handler=handler, parents=[cfg])
        cmd.add_argument("--binary", default="pathml", help="cron 中调用的可执行文件。")
