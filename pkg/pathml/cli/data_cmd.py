"""data 与 export：测量存储的检索、归档、清理、状态，以及 CSV 导出。"""

from __future__ import annotations

import argparse
from pathlib import Path

from pathml.application.services.config_service import load_config, parse_category
from pathml.config import require_config_path
from pathml.domain.errors import UsageError
from pathml.domain.models.topology import validate_isd_as
from pathml.infrastructure.storage.files.measurement_store import MeasurementStore, SearchCriteria
from pathml.transform.export import export_csv

from ._common import add_command, config_parent, emit_json, group, json_parent, out, parse_when

DEFAULT_LOG_TAIL = 20


def open_store(args: argparse.Namespace) -> MeasurementStore:
    """--root 直接指定存储目录；否则取 campaign 配置里的 storage_root。"""
    if getattr(args, "root", None):
        return MeasurementStore(Path(args.root))
    config = load_config(require_config_path(args.config))
    return MeasurementStore(Path(config.storage_root))


def _criteria(args: argparse.Namespace) -> SearchCriteria:
    return SearchCriteria(
        src=validate_isd_as(args.src) if args.src else None,
        dst=validate_isd_as(args.dst) if args.dst else None,
        categories=tuple(parse_category(c) for c in args.category or ()),
        start=parse_when(args.start),
        end=parse_when(args.end),
        fingerprint=args.fingerprint,
        include_archives=args.include_archives,
    )


def cmd_status(args: argparse.Namespace) -> int:
    status = open_store(args).status()
    if args.json:
        emit_json(status)
        return 0
    out(f"root: {status.root}")
    out(f"span: {status.first_timestamp or '-'} .. {status.last_timestamp or '-'}")
    for category, s in status.categories.items():
        out(f"  {category.value:<13} files={s.files:<6} cycles={s.cycles:<6} bytes={s.bytes}")
    out(f"archived: files={status.archived_files} bytes={status.archived_bytes}")
    out(f"listings: current={status.current_pairs} history={status.history_pairs}")
    out(f"cycle logs: {status.log_files}")
    return 0


def cmd_search(args: argparse.Namespace) -> int:
    paths = open_store(args).search(_criteria(args))
    if args.json:
        emit_json([str(p) for p in paths])
        return 0
    for path in paths:
        out(str(path))
    out(f"# {len(paths)} 个文件")
    return 0


def cmd_archive(args: argparse.Namespace) -> int:
    moved = open_store(args).archive(
        parse_when(args.start),
        parse_when(args.end),
        [parse_category(c) for c in args.category or ()],
        dest=Path(args.dest) if args.dest else None,
    )
    out(f"已归档 {moved} 个文件")
    return 0


def cmd_purge(args: argparse.Namespace) -> int:
    if not args.dry_run and not args.yes:
        raise UsageError("purge 会删除文件：确认请加 --yes，或先用 --dry-run 查看数量")
    count = open_store(args).purge(_criteria(args), dry_run=args.dry_run)
    out(f"{'将删除' if args.dry_run else '已删除'} {count} 个文件")
    return 0


def cmd_logs(args: argparse.Namespace) -> int:
    latest = open_store(args).latest_cycle_log()
    if latest is None:
        out("没有周期日志")
        return 0
    lines = latest.read_text(encoding="utf-8").splitlines()
    out(f"# {latest}")
    for line in lines[-args.tail :] if args.tail > 0 else lines:
        out(line)
    return 0


def cmd_export_csv(args: argparse.Namespace) -> int:
    summary = export_csv(
        open_store(args),
        Path(args.out),
        start=parse_when(args.start),
        end=parse_when(args.end),
        include_archives=args.include_archives,
    )
    if args.json:
        emit_json(summary.to_dict())
        return 0
    out(f"{summary.measurements_path}: {summary.measurement_rows} 行")
    out(f"{summary.hops_path}: {summary.hop_rows} 行")
    if summary.skipped:
        out(f"跳过 {summary.skipped} 个无法解析的文件")
    return 0


def _store_parent() -> argparse.ArgumentParser:
    parent = config_parent()
    parent.add_argument("--root", default=None, help="直接指定存储根目录（不读取 campaign 配置）。")
    return parent


def _range_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--from", dest="start", default=None, help="起始时间（UTC，含）。")
    parser.add_argument("--to", dest="end", default=None, help="结束时间（UTC，含）。")


def _filter_args(parser: argparse.ArgumentParser) -> None:
    _range_args(parser)
    parser.add_argument("--src", default=None)
    parser.add_argument("--dst", default=None)
    parser.add_argument("--category", action="append", default=None, help="可重复。")
    parser.add_argument("--fingerprint", default=None)
    parser.add_argument("--include-archives", action="store_true")


def register(subparsers: argparse._SubParsersAction) -> None:
    store = _store_parent()
    js = json_parent()

    data = add_command(subparsers, "data", "测量数据管理。")
    sub = group(data, "data_command")
    add_command(sub, "status", "存储概况：各类别文件数、覆盖周期数与归档量。", handler=cmd_status, parents=[store, js])
    _filter_args(add_command(sub, "search", "按条件检索测量文件。", handler=cmd_search, parents=[store, js]))

    archive = add_command(sub, "archive", "把时间范围内的测量移入归档目录。", handler=cmd_archive, parents=[store])
    _range_args(archive)
    archive.add_argument("--category", action="append", default=None, help="可重复。")
    archive.add_argument("--dest", default=None, help="自定义归档目录。")

    purge = add_command(sub, "purge", "删除符合条件的测量文件。", handler=cmd_purge, parents=[store])
    _filter_args(purge)
    purge.add_argument("--dry-run", action="store_true")
    purge.add_argument("--yes", action="store_true", help="确认删除。")

    logs = add_command(sub, "logs", "查看最近一次采集周期的日志。", handler=cmd_logs, parents=[store])
    logs.add_argument("--tail", type=int, default=DEFAULT_LOG_TAIL, help="只显示最后 N 行（0 表示全部）。")

    export = add_command(subparsers, "export", "导出数据集。")
    export_sub = group(export, "export_command")
    csv = add_command(export_sub, "csv", "导出 measurements.csv 与 hops.csv。", handler=cmd_export_csv, parents=[store, js])
    _range_args(csv)
    csv.add_argument("--out", required=True, help="输出目录。")
    csv.add_argument("--include-archives", action="store_true")
