"""sim：模拟拓扑查看、事件计划生成，以及完整的模拟采集 campaign。"""

from __future__ import annotations

import argparse
import time
from pathlib import Path

from pydantic import BaseModel

from pathml.application.services.collector_service import run_cycle
from pathml.application.services.config_service import campaign_for_sim, dump_config
from pathml.domain.enums import EventKind
from pathml.domain.errors import IoError, UsageError
from pathml.infrastructure.storage.files.measurement_store import MeasurementStore
from pathml.logger import get_logger
from pathml.simnet import EventPlan, PlanRates, SimNet, SimNetBackend, auto_plan, load_event_plan, schedule_events
from pathml.state import write_text_atomic

from ._common import add_command, emit_json, group, json_parent, out
from .collect_cmd import load_sim

CAMPAIGN_FILE = "campaign.json"
SIMSPEC_FILE = "simspec.json"
EVENTS_FILE = "events.json"


def _spec_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--spec", default=None, help="simspec.json（缺省使用内置默认拓扑）。")
    parser.add_argument("--seed", type=int, default=None, help="覆盖 simspec 中的 seed。")


def _rate_args(parser: argparse.ArgumentParser) -> None:
    defaults = PlanRates()
    parser.add_argument("--failures-per-week", type=float, default=20.0)
    parser.add_argument("--abrupt-fraction", type=float, default=defaults.abrupt_fraction)
    parser.add_argument("--contamination", type=float, default=0.01, help="异常事件占路径-周期的比例。")
    parser.add_argument("--bottlenecks", type=int, default=5)


def _rates(args: argparse.Namespace) -> PlanRates:
    return PlanRates(
        failures_per_week=args.failures_per_week,
        abrupt_fraction=args.abrupt_fraction,
        anomaly_contamination=args.contamination,
        bottleneck_count=args.bottlenecks,
    )


def _write_doc(path: Path, doc: BaseModel | str) -> Path:
    text = doc if isinstance(doc, str) else doc.model_dump_json(indent=2) + "\n"
    try:
        return write_text_atomic(path, text)
    except OSError as exc:
        raise IoError(f"无法写入: {path}（{exc.strerror or exc}）") from exc


def _plan_counts(plan: EventPlan) -> dict[str, int]:
    return {kind.value: len(plan.of_kind(kind)) for kind in EventKind}


def cmd_paths(args: argparse.Namespace) -> int:
    sim = load_sim(args.spec, None, seed=args.seed)
    rows = [
        {
            "src": str(src),
            "dst": str(dst),
            "fingerprint": record.fingerprint,
            "hops": len(record.hops),
            "mtu": record.mtu,
        }
        for src, dst in sim.pairs()
        for record in sim.paths_for(src, dst)
    ]
    if args.json:
        emit_json(rows)
        return 0
    for row in rows:
        out(f"{row['src']} -> {row['dst']}  {row['fingerprint']}  hops={row['hops']}  mtu={row['mtu']}")
    out(f"# {len(sim.ases)} 个 AS，{len(rows)} 条路径")
    return 0


def cmd_plan(args: argparse.Namespace) -> int:
    sim = load_sim(args.spec, None, seed=args.seed)
    plan = auto_plan(sim, cycles=args.cycles, rates=_rates(args))
    schedule_events(sim, plan)
    path = _write_doc(Path(args.out), plan)
    counts = _plan_counts(plan)
    out(f"已写入 {path}：" + "，".join(f"{k} {v}" for k, v in counts.items()))
    return 0


def _campaign_sim(args: argparse.Namespace) -> SimNet:
    if args.events and args.auto:
        raise UsageError("--events 与 --auto 只能二选一")
    sim = load_sim(args.spec, args.events, seed=args.seed)
    if args.auto:
        sim = schedule_events(sim, auto_plan(sim, cycles=args.cycles, rates=_rates(args)))
    return sim


def cmd_campaign(args: argparse.Namespace) -> int:
    """逐周期驱动采集器写入文件存储；同时写出 campaign/simspec/events 以便复现与后续 run-cycle。"""
    if args.cycles < 1:
        raise UsageError(f"--cycles 必须为正: {args.cycles}")
    logger = get_logger().bind(category="sim")
    sim = _campaign_sim(args)
    root = Path(args.out)
    config = campaign_for_sim(sim, storage_root=str(root))
    _write_doc(root / CAMPAIGN_FILE, dump_config(config))
    _write_doc(root / SIMSPEC_FILE, sim.spec)
    _write_doc(root / EVENTS_FILE, sim.plan())

    started = time.monotonic()
    backend = SimNetBackend(sim)
    store = MeasurementStore(root)
    failed = 0
    for cycle in range(args.cycles):
        report = run_cycle(config, backend, store, sim.clock(cycle))
        failed += report.total("failed")
    status = store.status()
    elapsed = time.monotonic() - started
    logger.info(f"模拟 campaign 完成：{args.cycles} 个周期，{status.total_files} 个文件，耗时 {elapsed:.1f} s")

    summary = {
        "root": str(root),
        "cycles": args.cycles,
        "seed": sim.spec.seed,
        "ases": len(sim.ases),
        "files": status.total_files,
        "failed_probes": failed,
        "events": _plan_counts(sim.plan()),
        "categories": {c.value: s.files for c, s in status.categories.items()},
    }
    if args.json:
        emit_json(summary)
        return 0
    out(f"{root}: {args.cycles} 个周期，{status.total_files} 个测量文件（失败探测 {failed}）")
    for category, files in summary["categories"].items():
        out(f"  {category:<13} {files}")
    out(f"campaign: {root / CAMPAIGN_FILE}")
    return 0


def register(subparsers: argparse._SubParsersAction) -> None:
    js = json_parent()
    sim = add_command(subparsers, "sim", "确定性网络模拟器。")
    sub = group(sim, "sim_command")

    paths = add_command(sub, "paths", "列出模拟拓扑的全部路径。", handler=cmd_paths, parents=[js])
    _spec_args(paths)

    plan = add_command(sub, "plan", "按速率生成事件计划（events.json）。", handler=cmd_plan)
    _spec_args(plan)
    _rate_args(plan)
    plan.add_argument("--cycles", type=int, required=True)
    plan.add_argument("--out", default=EVENTS_FILE)

    campaign = add_command(sub, "campaign", "运行模拟采集 campaign 并写入文件存储。", handler=cmd_campaign, parents=[js])
    _spec_args(campaign)
    _rate_args(campaign)
    campaign.add_argument("--cycles", type=int, required=True)
    campaign.add_argument("--events", default=None, help="显式事件计划 events.json。")
    campaign.add_argument("--auto", action="store_true", help="按速率自动生成事件计划。")
    campaign.add_argument("--out", default="sim-data", help="存储根目录。")
