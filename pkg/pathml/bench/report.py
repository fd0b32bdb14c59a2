"""基准报告：JSON 文档（pydantic）、Markdown 表格和逐任务预测 CSV。"""

from __future__ import annotations

from pathlib import Path
from typing import Final, Literal

import pandas as pd
from pydantic import Field

from pathml.domain.errors import IoError
from pathml.logger import get_logger
from pathml.schemas.common import DocumentModel, validate_json_document
from pathml.state import write_text_atomic
from pathml.transform.export import write_frame

REPORT_SCHEMA_VERSION: Final[int] = 1
REPORT_JSON = "report.json"
REPORT_MD = "report.md"

TaskId = Literal["task1", "task2", "task3", "task4", "task5"]
TASK_IDS: Final[tuple[TaskId, ...]] = ("task1", "task2", "task3", "task4", "task5")

TASK_TITLES: Final[dict[str, str]] = {
    "task1": "性能预测（T+1）",
    "task2": "故障预测",
    "task3": "异常检测",
    "task4": "QoE 路径推荐",
    "task5": "瓶颈定位",
}

# 已发表的基线数值：只用于并排展示，不作为断言。
REFERENCE_VALUES: Final[dict[str, dict[str, float]]] = {
    "task1": {
        "linreg/rtt/mae": 3.878,
        "linreg/bw/mae": 24.078,
        "ensemble/bw/mae": 21.470,
    },
    "task2": {"forest/failure/f1": 0.860541969596},
    "task3": {"iforest/anomaly/auc_roc": 0.774846939561274},
    "task4": {
        "heuristic/video_conference/satisfaction_rate": 0.24,
        "heuristic/online_gaming/satisfaction_rate": 0.21,
        "heuristic/file_transfer/satisfaction_rate": 0.30,
        "heuristic/browsing/satisfaction_rate": 0.26,
        "heuristic/streaming/satisfaction_rate": 0.21,
    },
    "task5": {"forest/hop/accuracy": 0.9914},
}

ParamValue = bool | int | float | str


class DataProvenance(DocumentModel):
    source: Literal["sim", "csv"]
    seed: int = Field(ge=0)
    cycles: int = Field(ge=0)
    paths: int = Field(ge=0)
    failures: int | None = None
    abrupt_fraction: float | None = None


class MetricValue(DocumentModel):
    model: str
    target: str
    metric: str
    value: float
    train: int = Field(ge=0)
    test: int = Field(ge=0)

    @property
    def key(self) -> str:
        return f"{self.model}/{self.target}/{self.metric}"


class ProfileRate(DocumentModel):
    profile: str
    max_rtt_ms: float
    max_loss_pct: float
    min_bw_mbps: float
    satisfied: int = Field(ge=0)
    decisions: int = Field(ge=0)
    rate: float = Field(ge=0, le=1)


class ConfusionTable(DocumentModel):
    labels: list[int]
    counts: list[list[int]]


class TaskError(DocumentModel):
    code: str
    message: str


class TaskReport(DocumentModel):
    task: TaskId
    title: str
    status: Literal["ok", "skipped"] = "ok"
    metrics: list[MetricValue] = Field(default_factory=list)
    profiles: list[ProfileRate] = Field(default_factory=list)
    confusion: ConfusionTable | None = None
    params: dict[str, ParamValue] = Field(default_factory=dict)
    reference_values: dict[str, float] = Field(default_factory=dict)
    error: TaskError | None = None

    def metric(self, model: str, target: str, metric: str) -> float:
        for entry in self.metrics:
            if (entry.model, entry.target, entry.metric) == (model, target, metric):
                return entry.value
        raise KeyError(f"{self.task} 没有指标 {model}/{target}/{metric}")


class BenchmarkReport(DocumentModel):
    schema_version: int = REPORT_SCHEMA_VERSION
    seed: int = Field(ge=0)
    provenance: DataProvenance
    tasks: list[TaskReport]

    def task(self, task_id: str) -> TaskReport:
        for entry in self.tasks:
            if entry.task == task_id:
                return entry
        raise KeyError(f"报告中没有 {task_id}")


def task_report(task: TaskId, **fields) -> TaskReport:
    return TaskReport(task=task, title=TASK_TITLES[task], reference_values=REFERENCE_VALUES[task], **fields)


def skipped_report(task: TaskId, code: str, message: str) -> TaskReport:
    return task_report(task, status="skipped", error=TaskError(code=code, message=message))


def dumps_report(report: BenchmarkReport) -> str:
    return report.model_dump_json(indent=2) + "\n"


def loads_report(text: str, *, source: str = REPORT_JSON) -> BenchmarkReport:
    return validate_json_document(BenchmarkReport, text, source=source)


def _fmt(value: float | None) -> str:
    if value is None:
        return "-"
    return f"{value:.4f}"


def _task_markdown(task: TaskReport) -> list[str]:
    lines = [f"## {task.task}：{task.title}", ""]
    if task.status == "skipped":
        code = task.error.code if task.error else "unknown"
        message = task.error.message if task.error else ""
        return lines + [f"跳过：`{code}` {message}", ""]

    if task.profiles:
        lines += ["| Profile | 最大 RTT (ms) | 最大丢包 (%) | 最小带宽 (Mbps) | 满足 / 决策 | 满足率 | 参考值 |"]
        lines += ["|---|---|---|---|---|---|---|"]
        for p in task.profiles:
            ref = task.reference_values.get(f"heuristic/{p.profile}/satisfaction_rate")
            lines.append(
                f"| {p.profile} | {p.max_rtt_ms:g} | {p.max_loss_pct:g} | {p.min_bw_mbps:g} | "
                f"{p.satisfied} / {p.decisions} | {_fmt(p.rate)} | {_fmt(ref)} |"
            )
    else:
        lines += ["| 模型 | 目标 | 指标 | 数值 | 训练 | 测试 | 参考值 |", "|---|---|---|---|---|---|---|"]
        for m in task.metrics:
            lines.append(
                f"| {m.model} | {m.target} | {m.metric} | {_fmt(m.value)} | {m.train} | {m.test} | "
                f"{_fmt(task.reference_values.get(m.key))} |"
            )
    lines.append("")

    if task.confusion is not None:
        labels = task.confusion.labels
        lines += ["混淆矩阵（行 = 真实跳，列 = 预测跳）：", ""]
        lines += ["| | " + " | ".join(str(x) for x in labels) + " |", "|---" * (len(labels) + 1) + "|"]
        for label, row in zip(labels, task.confusion.counts):
            lines.append(f"| {label} | " + " | ".join(str(c) for c in row) + " |")
        lines.append("")
    if task.params:
        lines.append("参数：" + "，".join(f"`{k}={v}`" for k, v in sorted(task.params.items())))
        lines.append("")
    return lines


def render_markdown(report: BenchmarkReport) -> str:
    prov = report.provenance
    lines = [
        "# pathml 基准报告",
        "",
        f"- 数据来源：{prov.source}（seed {report.seed}，{prov.cycles} 个周期，{prov.paths} 条路径）",
    ]
    if prov.failures is not None:
        lines.append(f"- 注入故障：{prov.failures}（突发比例 {prov.abrupt_fraction}）")
    lines.append("")
    for task in report.tasks:
        lines += _task_markdown(task)
    return "\n".join(lines).rstrip("\n") + "\n"


def emit_report(
    report: BenchmarkReport,
    out_dir: Path,
    predictions: dict[str, pd.DataFrame] | None = None,
) -> list[Path]:
    """写 report.json、report.md 与 task<k>_predictions.csv；返回写出的文件。"""
    logger = get_logger().bind(category="bench")
    written: list[Path] = []
    try:
        written.append(write_text_atomic(out_dir / REPORT_JSON, dumps_report(report)))
        written.append(write_text_atomic(out_dir / REPORT_MD, render_markdown(report)))
    except OSError as exc:
        raise IoError(f"无法写入报告: {out_dir}（{exc.strerror or exc}）") from exc
    for task_id, frame in sorted((predictions or {}).items()):
        path = out_dir / f"{task_id}_predictions.csv"
        write_frame(frame, path)
        written.append(path)
    logger.info(f"报告已写入 {out_dir}（{len(written)} 个文件）")
    return written
