from __future__ import annotations

import os
from dataclasses import dataclass


def _env(key: str, default: str | None = None) -> str | None:
    """
    将空字符串视为“未设置”，避免用户 export 了变量但忘记赋值时出现意外行为。
    """
    v = os.environ.get(key)
    if v is not None and str(v).strip() != "":
        return v
    return default


def _parse_bool(v: str | None, default: bool) -> bool:
    if v is None:
        return default
    s = str(v).strip().lower()
    if s in {"1", "true", "yes", "y", "on"}:
        return True
    if s in {"0", "false", "no", "n", "off"}:
        return False
    return default


def _parse_int(v: str | None, default: int) -> int:
    if v is None:
        return default
    try:
        return int(str(v).strip())
    except Exception:
        return default


def _parse_float(v: str | None, default: float) -> float:
    if v is None:
        return default
    try:
        return float(str(v).strip())
    except Exception:
        return default


@dataclass(frozen=True)
class Settings:
    log_level: str
    log_json: bool
    log_path: str
    log_rotation_mb: int
    log_retention_days: int
    scion_bin: str
    probe_timeout_s: float
    probe_retries: int
    config_path: str


def load_settings() -> Settings:
    log_level = (_env("PATHML_LOG_LEVEL", "INFO") or "INFO").upper()
    log_json = _parse_bool(_env("PATHML_LOG_JSON", None), False)
    log_path = (_env("PATHML_LOG_PATH", "") or "").strip()
    log_rotation_mb = _parse_int(_env("PATHML_LOG_ROTATION_MB", "100"), 100)
    if log_rotation_mb <= 0:
        log_rotation_mb = 100
    log_retention_days = _parse_int(_env("PATHML_LOG_RETENTION_DAYS", "14"), 14)
    if log_retention_days <= 0:
        log_retention_days = 14

    scion_bin = (_env("PATHML_SCION_BIN", "") or "").strip()

    probe_timeout_s = _parse_float(_env("PATHML_PROBE_TIMEOUT_S", "60"), 60.0)
    if probe_timeout_s <= 0:
        # 0 会让每个探测立即超时；保持工具默认值。
        probe_timeout_s = 60.0
    probe_retries = _parse_int(_env("PATHML_PROBE_RETRIES", "1"), 1)
    if probe_retries < 0:
        probe_retries = 1

    config_path = (_env("PATHML_CONFIG", "") or "").strip()

    return Settings(
        log_level=log_level,
        log_json=log_json,
        log_path=log_path,
        log_rotation_mb=log_rotation_mb,
        log_retention_days=log_retention_days,
        scion_bin=scion_bin,
        probe_timeout_s=probe_timeout_s,
        probe_retries=probe_retries,
        config_path=config_path,
    )
