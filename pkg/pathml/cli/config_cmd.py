"""config：campaign 配置的初始化、查看与注册表维护。"""

from __future__ import annotations

import argparse
from pathlib import Path

from pathml.application.services import config_service as svc
from pathml.config import config_path_for_edit
from pathml.domain.errors import UsageError
from pathml.domain.models.campaign import CampaignConfig
from pathml.domain.models.topology import validate_isd_as

from ._common import add_command, config_parent, emit_json, group, json_parent, out, parse_floats


def _paths(args: argparse.Namespace) -> tuple[Path, Path]:
    return config_path_for_edit(args.config, Path.cwd())


def _edit(args: argparse.Namespace, change) -> CampaignConfig:
    read_path, write_path = _paths(args)
    updated = change(svc.load_config(read_path))
    svc.save_config(updated, write_path)
    return updated


def _summary(config: CampaignConfig) -> list[str]:
    pipeline = config.pipeline
    enabled = [c.value for c, on in pipeline.enabled.items() if on]
    lines = [
        f"local_as: {config.local_as}",
        f"storage_root: {config.storage_root}",
        f"seed: {config.seed}",
        f"interval: {pipeline.interval_minutes} min",
        f"tiers: {', '.join(f'{t:g}' for t in pipeline.bandwidth_tiers_mbps)} Mbps",
        f"ping_count: {pipeline.ping_count}",
        f"paths_per_pair: {pipeline.paths_per_pair}",
        f"enabled: {', '.join(enabled) or '-'}",
        f"ases: {len(config.ases)}",
    ]
    lines += [f"  {a.isd_as}  {a.ip}  {a.name}" for a in config.ases]
    lines.append(f"servers: {len(config.servers)}")
    lines += [f"  {s.isd_as}  {s.ip}:{s.port}  {s.name}" for s in config.servers]
    return lines


def cmd_init(args: argparse.Namespace) -> int:
    _, write_path = _paths(args)
    if write_path.exists() and not args.force:
        raise UsageError(f"配置文件已存在: {write_path}（使用 --force 覆盖）")
    config = svc.init_config(args.local_as, args.storage_root, seed=args.seed)
    svc.save_config(config, write_path)
    out(f"已写入 {write_path}")
    return 0


def cmd_show(args: argparse.Namespace) -> int:
    read_path, _ = _paths(args)
    config = svc.load_config(read_path)
    if args.json:
        emit_json(config)
    else:
        out(f"# {read_path}")
        for line in _summary(config):
            out(line)
    return 0


def cmd_as_add(args: argparse.Namespace) -> int:
    entry = svc.make_as(args.isd_as, args.ip, args.name or "")
    _edit(args, lambda c: svc.add_as(c, entry))
    out(f"已注册 AS {entry.isd_as}")
    return 0


def cmd_as_remove(args: argparse.Namespace) -> int:
    target = validate_isd_as(args.isd_as)
    _edit(args, lambda c: svc.remove_as(c, target))
    out(f"已移除 AS {target}")
    return 0


def cmd_as_list(args: argparse.Namespace) -> int:
    config = svc.load_config(_paths(args)[0])
    if args.json:
        emit_json([a.model_dump(mode="json") for a in config.ases])
        return 0
    for entry in config.ases:
        out(f"{entry.isd_as}\t{entry.ip}\t{entry.name}")
    return 0


def cmd_server_add(args: argparse.Namespace) -> int:
    entry = svc.make_server(args.isd_as, args.ip, args.port, args.name or "")
    _edit(args, lambda c: svc.add_server(c, entry))
    out(f"已注册带宽服务器 {entry.isd_as} ({entry.ip}:{entry.port})")
    return 0


def cmd_server_remove(args: argparse.Namespace) -> int:
    target = validate_isd_as(args.isd_as)
    _edit(args, lambda c: svc.remove_server(c, target))
    out(f"已移除带宽服务器 {target}")
    return 0


def cmd_server_list(args: argparse.Namespace) -> int:
    config = svc.load_config(_paths(args)[0])
    if args.json:
        emit_json([s.model_dump(mode="json") for s in config.servers])
        return 0
    for entry in config.servers:
        out(f"{entry.isd_as}\t{entry.ip}:{entry.port}\t{entry.name}")
    return 0


def _toggle(on: bool):
    def run(args: argparse.Namespace) -> int:
        category = svc.parse_category(args.category)
        _edit(args, lambda c: svc.set_category(c, category, on))
        out(f"{category.value}: {'enabled' if on else 'disabled'}")
        return 0

    return run


def cmd_pipeline_set(args: argparse.Namespace) -> int:
    tiers = parse_floats(args.tiers, "--tiers") if args.tiers is not None else None
    if all(v is None for v in (args.interval, tiers, args.ping_count, args.paths_per_pair)):
        raise UsageError("pipeline set 至少需要一个参数（--interval/--tiers/--ping-count/--paths-per-pair）")
    updated = _edit(
        args,
        lambda c: svc.set_pipeline(
            c,
            interval_minutes=args.interval,
            tiers_mbps=tiers,
            ping_count=args.ping_count,
            paths_per_pair=args.paths_per_pair,
        ),
    )
    p = updated.pipeline
    out(
        f"interval={p.interval_minutes} tiers={','.join(f'{t:g}' for t in p.bandwidth_tiers_mbps)} "
        f"ping_count={p.ping_count} paths_per_pair={p.paths_per_pair}"
    )
    return 0


def register(subparsers: argparse._SubParsersAction) -> None:
    cfg = config_parent()
    js = json_parent()
    config = add_command(subparsers, "config", "campaign 配置：AS / 带宽服务器注册表与测量流水线。")
    sub = group(config, "config_command")

    init = add_command(sub, "init", "创建新的 campaign 配置。", handler=cmd_init, parents=[cfg])
    init.add_argument("--local-as", required=True, help="本地 ISD-AS，例如 17-ffaa:0:1101。")
    init.add_argument("--storage-root", required=True, help="测量数据根目录。")
    init.add_argument("--seed", type=int, default=0)
    init.add_argument("--force", action="store_true", help="覆盖已存在的配置。")

    add_command(sub, "show", "查看当前配置。", handler=cmd_show, parents=[cfg, js])

    as_cmd = add_command(sub, "as", "远端 AS 注册表。")
    as_sub = group(as_cmd, "as_command")
    as_add = add_command(as_sub, "add", "注册远端 AS。", handler=cmd_as_add, parents=[cfg])
    as_add.add_argument("isd_as")
    as_add.add_argument("--ip", required=True)
    as_add.add_argument("--name", default=None)
    add_command(as_sub, "remove", "移除远端 AS。", handler=cmd_as_remove, parents=[cfg]).add_argument("isd_as")
    add_command(as_sub, "list", "列出远端 AS。", handler=cmd_as_list, parents=[cfg, js])

    server = add_command(sub, "server", "带宽测试服务器注册表。")
    server_sub = group(server, "server_command")
    server_add = add_command(server_sub, "add", "注册带宽服务器。", handler=cmd_server_add, parents=[cfg])
    server_add.add_argument("isd_as")
    server_add.add_argument("--ip", required=True)
    server_add.add_argument("--port", type=int, default=svc.DEFAULT_BW_PORT)
    server_add.add_argument("--name", default=None)
    add_command(server_sub, "remove", "移除带宽服务器。", handler=cmd_server_remove, parents=[cfg]).add_argument("isd_as")
    add_command(server_sub, "list", "列出带宽服务器。", handler=cmd_server_list, parents=[cfg, js])

    pipeline = add_command(sub, "pipeline", "测量流水线开关与参数。")
    pipe_sub = group(pipeline, "pipeline_command")
    add_command(pipe_sub, "enable", "启用一个测量类别。", handler=_toggle(True), parents=[cfg]).add_argument("category")
    add_command(pipe_sub, "disable", "停用一个测量类别。", handler=_toggle(False), parents=[cfg]).add_argument("category")
    pipe_set = add_command(pipe_sub, "set", "修改流水线参数。", handler=cmd_pipeline_set, parents=[cfg])
    pipe_set.add_argument("--interval", type=int, default=None, help="采集间隔（分钟）。")
    pipe_set.add_argument("--tiers", default=None, help="带宽档位，逗号分隔（Mbps）。")
    pipe_set.add_argument("--ping-count", type=int, default=None)
    pipe_set.add_argument("--paths-per-pair", type=int, default=None)
