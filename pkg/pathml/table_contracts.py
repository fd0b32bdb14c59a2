"""export csv 两张表的列契约。列名与顺序即文件格式，读回时逐列核对。"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .domain.errors import SchemaError

ART_MEASUREMENTS = "measurements.csv"
ART_HOPS = "hops.csv"

COLUMNS_MEASUREMENTS = (
    "timestamp_utc",
    "cycle_index",
    "src",
    "dst",
    "fingerprint",
    "category",
    "rtt_min_ms",
    "rtt_avg_ms",
    "rtt_max_ms",
    "jitter_ms",
    "loss_pct",
    "bw_target_mbps",
    "bw_achieved_cs_mbps",
    "bw_achieved_sc_mbps",
    "hop_count",
    "concurrent",
    "available",
)

COLUMNS_HOPS = (
    "timestamp_utc",
    "fingerprint",
    "hop_index",
    "isd_as",
    "rtt1_ms",
    "rtt2_ms",
    "rtt3_ms",
)

# 可空的整数列：写 CSV 时不能变成 `5.0`。
INTEGER_COLUMNS = frozenset({"cycle_index", "hop_count", "concurrent", "available", "hop_index"})
TEXT_COLUMNS = frozenset({"timestamp_utc", "src", "dst", "fingerprint", "category", "isd_as"})


@dataclass(frozen=True, slots=True)
class TableContract:
    artifact: str
    columns: tuple[str, ...]
    description: str = ""

    def diff(self, header: Sequence[str]) -> tuple[list[str], list[str]]:
        """(缺失列, 多余列)。"""
        present = [str(c).strip() for c in header]
        missing = [c for c in self.columns if c not in present]
        known = set(self.columns)
        return missing, [c for c in present if c not in known]

    def check(self, header: Sequence[str], *, source: str | None = None) -> None:
        missing, extra = self.diff(header)
        if missing or extra:
            raise SchemaError(
                f"{source or self.artifact} 的列与契约不符",
                details={"missing": missing, "unexpected": extra},
            )


TABLE_CONTRACTS: dict[str, TableContract] = {
    ART_MEASUREMENTS: TableContract(ART_MEASUREMENTS, COLUMNS_MEASUREMENTS, "每条记录一行（mp_* 两行）"),
    ART_HOPS: TableContract(ART_HOPS, COLUMNS_HOPS, "每条 traceroute 每跳一行"),
}


def table_contract(artifact: str) -> TableContract:
    try:
        return TABLE_CONTRACTS[artifact]
    except KeyError:
        raise KeyError(f"未知的表格: {artifact}") from None
