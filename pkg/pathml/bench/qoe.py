"""QoE 感知的路径推荐：指标在候选集内做 min-max 归一化，加权打分后排序。"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Final, Sequence

import numpy as np

from pathml.domain.errors import InvalidParams, NoCandidates

DEFAULT_WEIGHTS: Final[tuple[float, float, float]] = (0.4, 0.2, 0.4)
CONSTANT_NORMALIZED: Final[float] = 0.5


@dataclass(frozen=True, slots=True)
class QoeProfile:
    name: str
    max_rtt_ms: float
    max_loss_pct: float
    min_bw_mbps: float

    def __post_init__(self) -> None:
        if not self.name:
            raise InvalidParams("QoE profile 需要名称")
        if min(self.max_rtt_ms, self.max_loss_pct, self.min_bw_mbps) <= 0:
            raise InvalidParams(
                f"QoE profile 的阈值必须为正: {self.name}",
                details={"max_rtt_ms": self.max_rtt_ms, "max_loss_pct": self.max_loss_pct, "min_bw_mbps": self.min_bw_mbps},
            )

    def relaxed(self, *, rtt_ms: float = 0.0, loss_pct: float = 0.0, bw_mbps: float = 0.0) -> "QoeProfile":
        return QoeProfile(
            name=self.name,
            max_rtt_ms=self.max_rtt_ms + rtt_ms,
            max_loss_pct=self.max_loss_pct + loss_pct,
            min_bw_mbps=max(self.min_bw_mbps - bw_mbps, 1e-9),
        )


# 应用类型 → (最大 RTT ms, 最大丢包 %, 最小带宽 Mbps)
PROFILES: Final[tuple[QoeProfile, ...]] = (
    QoeProfile("video_conference", 150.0, 2.0, 1.0),
    QoeProfile("online_gaming", 50.0, 1.0, 0.5),
    QoeProfile("file_transfer", 500.0, 5.0, 10.0),
    QoeProfile("browsing", 300.0, 3.0, 0.1),
    QoeProfile("streaming", 200.0, 1.0, 5.0),
)


def profile_by_name(name: str) -> QoeProfile:
    for profile in PROFILES:
        if profile.name == name:
            return profile
    raise InvalidParams(f"未知的 QoE profile: {name}（可选: {', '.join(p.name for p in PROFILES)}）")


@dataclass(frozen=True, slots=True)
class QoeWeights:
    """构造时归一化，三项之和恒为 1。"""

    w_rtt: float = DEFAULT_WEIGHTS[0]
    w_loss: float = DEFAULT_WEIGHTS[1]
    w_bw: float = DEFAULT_WEIGHTS[2]

    def __post_init__(self) -> None:
        raw = (self.w_rtt, self.w_loss, self.w_bw)
        if any(w < 0 or not np.isfinite(w) for w in raw):
            raise InvalidParams(f"权重必须为非负有限数: {raw}")
        total = sum(raw)
        if total <= 0:
            raise InvalidParams("权重之和必须为正")
        object.__setattr__(self, "w_rtt", self.w_rtt / total)
        object.__setattr__(self, "w_loss", self.w_loss / total)
        object.__setattr__(self, "w_bw", self.w_bw / total)

    @classmethod
    def parse(cls, text: str) -> "QoeWeights":
        """'rtt,loss,bw' 形式，例如 '0.4,0.2,0.4'。"""
        parts = [p.strip() for p in text.split(",")]
        if len(parts) != 3:
            raise InvalidParams(f"权重格式应为 rtt,loss,bw: {text!r}")
        try:
            values = [float(p) for p in parts]
        except ValueError as exc:
            raise InvalidParams(f"权重不是数字: {text!r}") from exc
        return cls(*values)


@dataclass(frozen=True, slots=True)
class Candidate:
    key: str
    rtt_ms: float
    loss_pct: float
    bw_mbps: float


@dataclass(frozen=True, slots=True)
class RankedCandidate:
    candidate: Candidate
    score: float


def _normalize(values: np.ndarray) -> np.ndarray:
    lo, hi = float(values.min()), float(values.max())
    if hi == lo:
        return np.full(values.shape, CONSTANT_NORMALIZED)
    return (values - lo) / (hi - lo)


def qoe_scores(candidates: Sequence[Candidate], weights: QoeWeights | None = None) -> np.ndarray:
    """score = w_rtt(1 − rtt_n) + w_loss(1 − loss_n) + w_bw·bw_n，归一化只在给定候选集内进行。"""
    if not candidates:
        raise NoCandidates("没有候选路径")
    weights = weights or QoeWeights()
    rtt = _normalize(np.array([c.rtt_ms for c in candidates], dtype=float))
    loss = _normalize(np.array([c.loss_pct for c in candidates], dtype=float))
    bw = _normalize(np.array([c.bw_mbps for c in candidates], dtype=float))
    return weights.w_rtt * (1.0 - rtt) + weights.w_loss * (1.0 - loss) + weights.w_bw * bw


def qoe_score(candidate: Candidate, candidates: Sequence[Candidate], weights: QoeWeights | None = None) -> float:
    """candidate 必须是 candidates 中的一个。"""
    for i, other in enumerate(candidates):
        if other is candidate or other == candidate:
            return float(qoe_scores(candidates, weights)[i])
    raise InvalidParams(f"候选 {candidate.key} 不在候选集中")


def recommend(candidates: Sequence[Candidate], weights: QoeWeights | None = None) -> list[RankedCandidate]:
    """按得分降序；同分时保持输入顺序。打分与 profile 无关，profile 只用于 satisfied 判定。"""
    scores = qoe_scores(candidates, weights)
    order = sorted(range(len(candidates)), key=lambda i: (-scores[i], i))
    return [RankedCandidate(candidate=candidates[i], score=float(scores[i])) for i in order]


def satisfied(candidate: Candidate, profile: QoeProfile) -> bool:
    return (
        candidate.rtt_ms <= profile.max_rtt_ms
        and candidate.loss_pct <= profile.max_loss_pct
        and candidate.bw_mbps >= profile.min_bw_mbps
    )
