"""pathml 命令行入口：一个可执行文件，子命令树覆盖配置、采集、调度、数据管理、导出、模拟与基准。"""

from __future__ import annotations

import sys
from typing import Sequence

from pydantic import ValidationError

from pathml.domain.enums import ExitCode
from pathml.domain.errors import DomainError
from pathml.logger import get_logger

from . import bench_cmd, collect_cmd, config_cmd, data_cmd, sim_cmd
from ._common import CliParser, as_domain_error, group, make_parser, report_error


def build_parser() -> CliParser:
    parser = make_parser("SCION 路径测量、数据集与机器学习基准工具。")
    subparsers = group(parser, "command")
    for module in (config_cmd, collect_cmd, data_cmd, sim_cmd, bench_cmd):
        module.register(subparsers)
    return parser


def dispatch(argv: Sequence[str] | None = None) -> int:
    """解析并执行一条命令，返回退出码；领域错误打印 `error[<code>]: <message>`。"""
    parser = build_parser()
    try:
        args = parser.parse_args(list(sys.argv[1:] if argv is None else argv))
        return int(args.handler(args))
    except SystemExit as exc:
        # --help 与 argparse 自身的退出。
        return int(exc.code or 0) if isinstance(exc.code, int) else ExitCode.OK
    except ValidationError as exc:
        return report_error(as_domain_error(exc))
    except DomainError as exc:
        get_logger().bind(category="cli").debug(f"{exc.code}: {exc.details}")
        return report_error(exc)


def main() -> None:
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
