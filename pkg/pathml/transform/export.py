"""把存储里的信封展开成 measurements / hops 两张表。

不适用的字段留空（NaN / 空单元格），绝不补 0：下游模型不能把“没测”当成测量值。
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path
from typing import Any, Iterable

import pandas as pd

from pathml.domain.enums import Category
from pathml.domain.errors import DomainError, IoError
from pathml.domain.models.results import (
    BandwidthResult,
    ComparerResult,
    MpBandwidthResult,
    MpProberResult,
    PingResult,
    ShowpathsResult,
    TracerouteResult,
)
from pathml.infrastructure.storage.files.measurement_store import MeasurementStore, SearchCriteria
from pathml.logger import get_logger
from pathml.schemas.envelope import RecordEnvelope
from pathml.state import iso_utc
from pathml.table_contracts import ART_HOPS, ART_MEASUREMENTS, COLUMNS_HOPS, COLUMNS_MEASUREMENTS, INTEGER_COLUMNS, TEXT_COLUMNS

SORT_KEYS = ["timestamp_utc", "src", "dst", "fingerprint"]

Row = dict[str, Any]


def _base(env: RecordEnvelope, fingerprint: str | None, *, concurrent: bool = False) -> Row:
    return {
        "timestamp_utc": iso_utc(env.timestamp_utc),
        "cycle_index": env.cycle,
        "src": str(env.src),
        "dst": str(env.dst),
        "fingerprint": fingerprint or "",
        "category": env.category.value,
        "concurrent": int(concurrent),
    }


def _ping_row(env: RecordEnvelope, result: PingResult, *, concurrent: bool = False) -> Row:
    row = _base(env, result.fingerprint or env.fingerprint, concurrent=concurrent)
    row.update(
        rtt_min_ms=result.rtt_min_ms,
        rtt_avg_ms=result.rtt_avg_ms,
        rtt_max_ms=result.rtt_max_ms,
        jitter_ms=result.jitter_ms,
        loss_pct=result.loss_pct,
        available=int(result.available),
    )
    return row


def _bw_row(env: RecordEnvelope, result: BandwidthResult, *, concurrent: bool = False) -> Row:
    row = _base(env, result.fingerprint or env.fingerprint, concurrent=concurrent)
    row.update(
        loss_pct=result.loss_pct,
        bw_target_mbps=result.target_mbps,
        bw_achieved_cs_mbps=result.achieved_cs_mbps,
        bw_achieved_sc_mbps=result.achieved_sc_mbps,
        available=1,
    )
    return row


def envelope_rows(env: RecordEnvelope) -> tuple[list[Row], list[Row]]:
    """一个信封 → (measurement 行, hop 行)。"""
    payload = env.typed_payload()
    match payload:
        case ShowpathsResult():
            rows = []
            for path in payload.paths:
                row = _base(env, path.fingerprint)
                row.update(hop_count=len(path.hops), available=1)
                rows.append(row)
            return rows, []
        case ComparerResult():
            rows = []
            for fp in payload.added:
                rows.append({**_base(env, fp), "available": 1})
            for fp in payload.removed:
                rows.append({**_base(env, fp), "available": 0})
            return rows, []
        case PingResult():
            return [_ping_row(env, payload)], []
        case MpProberResult():
            return [_ping_row(env, r, concurrent=True) for r in payload.results], []
        case BandwidthResult():
            return [_bw_row(env, payload)], []
        case MpBandwidthResult():
            return [_bw_row(env, r, concurrent=True) for r in payload.results], []
        case TracerouteResult():
            fp = env.fingerprint or payload.fingerprint
            row = _base(env, fp)
            row.update(hop_count=len(payload.hops), available=int(not all(h.timed_out for h in payload.hops)))
            hops: list[Row] = []
            for hop in payload.hops:
                rtts: tuple[float | None, ...] = hop.rtts_ms or (None, None, None)
                hops.append(
                    {
                        "timestamp_utc": row["timestamp_utc"],
                        "fingerprint": fp or "",
                        "hop_index": hop.index,
                        "isd_as": str(hop.hop.isd_as),
                        "rtt1_ms": rtts[0],
                        "rtt2_ms": rtts[1],
                        "rtt3_ms": rtts[2],
                    }
                )
            return [row], hops
    raise ValueError(f"未知的 payload 类型: {type(payload).__name__}")


def _frame(rows: list[Row], columns: tuple[str, ...]) -> pd.DataFrame:
    df = pd.DataFrame.from_records(rows, columns=list(columns))
    for col in columns:
        if col in TEXT_COLUMNS:
            df[col] = df[col].fillna("").astype(str)
        elif col in INTEGER_COLUMNS:
            df[col] = pd.to_numeric(df[col], errors="coerce").astype("Int64")
        else:
            df[col] = pd.to_numeric(df[col], errors="coerce").astype("float64")
    return df


def frames_from_envelopes(envelopes: Iterable[RecordEnvelope]) -> tuple[pd.DataFrame, pd.DataFrame]:
    measurements: list[Row] = []
    hops: list[Row] = []
    for env in envelopes:
        m, h = envelope_rows(env)
        measurements.extend(m)
        hops.extend(h)
    mdf = _frame(measurements, COLUMNS_MEASUREMENTS)
    hdf = _frame(hops, COLUMNS_HOPS)
    mdf = mdf.sort_values(SORT_KEYS + ["category"], kind="mergesort").reset_index(drop=True)
    hdf = hdf.sort_values(["timestamp_utc", "fingerprint", "hop_index"], kind="mergesort").reset_index(drop=True)
    return mdf, hdf


@dataclass
class ExportSummary:
    measurements_path: Path
    hops_path: Path
    measurement_rows: int = 0
    hop_rows: int = 0
    skipped: int = 0
    skipped_files: list[str] = field(default_factory=list)

    def to_dict(self) -> dict[str, Any]:
        return {
            "measurements_path": str(self.measurements_path),
            "hops_path": str(self.hops_path),
            "measurement_rows": self.measurement_rows,
            "hop_rows": self.hop_rows,
            "skipped": self.skipped,
            "skipped_files": list(self.skipped_files),
        }


def write_frame(df: pd.DataFrame, path: Path) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        df.to_csv(path, index=False, na_rep="", lineterminator="\n")
    except OSError as exc:
        raise IoError(f"无法写入 CSV: {path}（{exc.strerror or exc}）") from exc


def export_csv(
    store: MeasurementStore,
    out_dir: Path,
    *,
    start: datetime | None = None,
    end: datetime | None = None,
    include_archives: bool = False,
) -> ExportSummary:
    """损坏的 JSON 文件不会让导出失败，但一定计入 skipped。"""
    logger = get_logger().bind(category="export")
    criteria = SearchCriteria(start=start, end=end, include_archives=include_archives)
    summary = ExportSummary(measurements_path=out_dir / ART_MEASUREMENTS, hops_path=out_dir / ART_HOPS)
    envelopes: list[RecordEnvelope] = []
    for path in store.search(criteria):
        try:
            envelopes.append(store.load(path))
        except DomainError as exc:
            summary.skipped += 1
            summary.skipped_files.append(str(path))
            logger.warning(f"跳过无法解析的记录 {path.name}: {exc.message}")
    mdf, hdf = frames_from_envelopes(envelopes)
    write_frame(mdf, summary.measurements_path)
    write_frame(hdf, summary.hops_path)
    summary.measurement_rows = len(mdf)
    summary.hop_rows = len(hdf)
    logger.info(f"导出完成：{summary.measurement_rows} 行测量、{summary.hop_rows} 行逐跳，跳过 {summary.skipped} 个文件")
    return summary


def read_frame(path: Path, columns: tuple[str, ...]) -> pd.DataFrame:
    """读回导出的 CSV，列类型与 frames_from_envelopes 一致。"""
    try:
        raw = pd.read_csv(path, dtype=str, keep_default_na=False)
    except FileNotFoundError as exc:
        raise IoError(f"找不到 CSV: {path}") from exc
    except OSError as exc:
        raise IoError(f"无法读取 CSV: {path}（{exc.strerror or exc}）") from exc
    rows = raw.where(raw != "", None).to_dict(orient="records")
    return _frame(rows, columns)
