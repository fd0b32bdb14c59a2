from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Final, Sequence

import pandas as pd

from pathml.domain.errors import DataError, UsageError
from pathml.logger import get_logger

from .anomaly import run_task3
from .bottleneck import run_task5
from .common import BenchOptions, TaskOutcome
from .data import BenchData
from .failure import run_task2
from .forecast import run_task1
from .report import TASK_IDS, BenchmarkReport, TaskId, skipped_report
from .selection import run_task4

TaskRunner = Callable[[BenchData, BenchOptions], TaskOutcome]

TASKS: Final[dict[TaskId, TaskRunner]] = {
    "task1": run_task1,
    "task2": run_task2,
    "task3": run_task3,
    "task4": run_task4,
    "task5": run_task5,
}


def resolve_tasks(selector: str) -> list[TaskId]:
    if selector == "all":
        return list(TASK_IDS)
    for task_id in TASK_IDS:
        if task_id == selector:
            return [task_id]
    raise UsageError(f"未知的任务: {selector}（可选: {', '.join(TASK_IDS)}, all）")


def run_benchmark(
    data: BenchData,
    tasks: Sequence[TaskId],
    options: BenchOptions | None = None,
    *,
    keep_going: bool | None = None,
    task_jobs: int = 1,
) -> tuple[BenchmarkReport, dict[str, pd.DataFrame]]:
    """
    各任务互不依赖，随机流各自独立，所以可以并行（task_jobs > 1），结果与串行一致。
    keep_going（缺省：多于一个任务时开启）下，数据不足类错误记为 skipped 而不是中断整次运行。
    """
    options = options or BenchOptions()
    logger = get_logger().bind(category="bench")
    keep_going = len(tasks) > 1 if keep_going is None else keep_going

    def run_one(task_id: TaskId) -> TaskOutcome | DataError:
        started = time.monotonic()
        try:
            outcome = TASKS[task_id](data, options)
        except DataError as exc:
            if not keep_going:
                raise
            logger.warning(f"{task_id} 跳过：[{exc.code}] {exc.message}")
            return exc
        logger.info(f"{task_id} 耗时 {time.monotonic() - started:.1f} s")
        return outcome

    if task_jobs > 1:
        with ThreadPoolExecutor(max_workers=task_jobs) as pool:
            results = list(pool.map(run_one, tasks))
    else:
        results = [run_one(t) for t in tasks]

    reports = []
    predictions: dict[str, pd.DataFrame] = {}
    for task_id, result in zip(tasks, results):
        if isinstance(result, DataError):
            reports.append(skipped_report(task_id, result.code, result.message))
            continue
        reports.append(result.report)
        predictions[task_id] = result.predictions
    report = BenchmarkReport(seed=options.seed, provenance=data.provenance, tasks=reports)
    return report, predictions
