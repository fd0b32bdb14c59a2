"""bench run：在模拟数据或导出的 CSV 上运行五个基准任务并写出报告。"""

from __future__ import annotations

import argparse
from pathlib import Path

from pathml.bench import BenchOptions, SimCampaign, emit_report, load_csv_dir, resolve_tasks, run_benchmark, simulate
from pathml.bench.data import BENCH_AS_COUNT, DEFAULT_BENCH_CYCLES, BenchData
from pathml.bench.qoe import QoeWeights
from pathml.bench.report import BenchmarkReport
from pathml.domain.errors import InsufficientData
from pathml.simnet import SimSpec, load_simspec

from ._common import add_command, emit_json, group, json_parent, out

DATA_SIM = "sim"


def _options(args: argparse.Namespace) -> BenchOptions:
    defaults = BenchOptions()
    return BenchOptions(
        seed=args.seed,
        train_fraction=args.train_fraction,
        n_trees=args.n_trees,
        n_jobs=args.jobs,
        contamination=args.contamination,
        factor_range=(args.factor_min, args.factor_max),
        delay_range=(args.delay_min, args.delay_max),
        weights=QoeWeights.parse(args.weights) if args.weights else defaults.weights,
    )


def _data(args: argparse.Namespace) -> BenchData:
    if args.data != DATA_SIM:
        return load_csv_dir(Path(args.data), seed=args.seed)
    spec = load_simspec(Path(args.spec)) if args.spec else SimSpec(as_count=BENCH_AS_COUNT)
    campaign = SimCampaign(spec=spec, cycles=args.cycles, abrupt_fraction=1.0 if args.abrupt_only else 0.2)
    return simulate(campaign.with_seed(args.seed))


def print_report(report: BenchmarkReport) -> None:
    for task in report.tasks:
        if task.status == "skipped":
            code = task.error.code if task.error else "-"
            out(f"{task.task}: skipped [{code}] {task.error.message if task.error else ''}")
            continue
        for metric in task.metrics:
            out(f"{task.task}: {metric.key} = {metric.value:.4f} (train {metric.train}, test {metric.test})")


def cmd_run(args: argparse.Namespace) -> int:
    tasks = resolve_tasks(args.task)
    options = _options(args)
    data = _data(args)
    report, predictions = run_benchmark(data, tasks, options, task_jobs=args.task_jobs)
    written = emit_report(report, Path(args.out), predictions)
    if args.json:
        emit_json(report)
    else:
        print_report(report)
        out(f"报告: {written[0]}")
    if all(t.status == "skipped" for t in report.tasks):
        raise InsufficientData("所有任务都因数据不足被跳过", details={"tasks": list(tasks)})
    return 0


def register(subparsers: argparse._SubParsersAction) -> None:
    defaults = BenchOptions()
    bench = add_command(subparsers, "bench", "机器学习基准任务。")
    sub = group(bench, "bench_command")
    run = add_command(sub, "run", "运行一个任务（task1..task5）或全部（all）。", handler=cmd_run, parents=[json_parent()])
    run.add_argument("task", help="task1..task5 或 all。")
    run.add_argument("--data", default=DATA_SIM, help="'sim' 或 export csv 的输出目录。")
    run.add_argument("--spec", default=None, help="--data sim 时使用的 simspec.json。")
    run.add_argument("--cycles", type=int, default=DEFAULT_BENCH_CYCLES, help="--data sim 的模拟周期数。")
    run.add_argument("--abrupt-only", action="store_true", help="模拟故障全部为突发（无前兆）。")
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--out", default="bench-out", help="报告输出目录。")
    run.add_argument("--train-fraction", type=float, default=defaults.train_fraction)
    run.add_argument("--n-trees", type=int, default=defaults.n_trees)
    run.add_argument("--jobs", type=int, default=defaults.n_jobs, help="森林训练的并行线程数。")
    run.add_argument("--task-jobs", type=int, default=1, help="任务级并行数。")
    run.add_argument("--contamination", type=float, default=defaults.contamination)
    run.add_argument("--factor-min", type=float, default=defaults.factor_range[0])
    run.add_argument("--factor-max", type=float, default=defaults.factor_range[1])
    run.add_argument("--delay-min", type=float, default=defaults.delay_range[0])
    run.add_argument("--delay-max", type=float, default=defaults.delay_range[1])
    run.add_argument("--weights", default=None, help="QoE 权重 rtt,loss,bw（自动归一化）。")
