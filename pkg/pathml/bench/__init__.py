"""五个基准任务：数据准备、模型训练、评估与报告。"""

from .bottleneck import argmax_oracle, task5_inject
from .common import BenchOptions, TaskOutcome, task_rng
from .data import BenchData, SimCampaign, load_csv_dir, simulate
from .qoe import PROFILES, Candidate, QoeProfile, QoeWeights, qoe_score, qoe_scores, recommend, satisfied
from .report import BenchmarkReport, TaskReport, emit_report, loads_report, render_markdown
from .runner import TASKS, resolve_tasks, run_benchmark

__all__ = [
    "PROFILES",
    "TASKS",
    "BenchData",
    "BenchOptions",
    "BenchmarkReport",
    "Candidate",
    "QoeProfile",
    "QoeWeights",
    "SimCampaign",
    "TaskOutcome",
    "TaskReport",
    "argmax_oracle",
    "emit_report",
    "load_csv_dir",
    "loads_report",
    "qoe_score",
    "qoe_scores",
    "recommend",
    "render_markdown",
    "resolve_tasks",
    "run_benchmark",
    "satisfied",
    "simulate",
    "task5_inject",
    "task_rng",
]
