from __future__ import annotations

from dataclasses import dataclass, replace
from datetime import datetime, timedelta, timezone

UNIX_EPOCH = datetime(1970, 1, 1, tzinfo=timezone.utc)


@dataclass(frozen=True, slots=True)
class CycleClock:
    """逻辑时钟：wall time = epoch + cycle × cycle_minutes。"""

    cycle: int
    epoch: datetime
    cycle_minutes: int

    def __post_init__(self) -> None:
        if self.cycle < 0:
            raise ValueError(f"cycle 不能为负: {self.cycle}")
        if self.cycle_minutes <= 0:
            raise ValueError(f"cycle_minutes 必须为正: {self.cycle_minutes}")

    def now(self) -> datetime:
        return self.epoch + timedelta(minutes=self.cycle * self.cycle_minutes)

    def advance(self, steps: int = 1) -> "CycleClock":
        if steps < 0:
            raise ValueError("时钟只能前进")
        return replace(self, cycle=self.cycle + steps)

    @classmethod
    def from_wall(cls, now: datetime, cycle_minutes: int) -> "CycleClock":
        """真实运行：以 Unix 纪元为起点，把当前时间对齐到所在的调度槽。"""
        minutes = int((now - UNIX_EPOCH).total_seconds() // 60)
        return cls(cycle=minutes // cycle_minutes, epoch=UNIX_EPOCH, cycle_minutes=cycle_minutes)
