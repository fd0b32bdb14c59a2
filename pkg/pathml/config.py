from __future__ import annotations

from pathlib import Path

from .domain.errors import UsageError
from .settings import Settings, load_settings


def resolve_campaign_config(root: Path) -> Path:
    """
    优先使用本地覆盖配置（已被 gitignore）；否则使用仓库提交的样本配置。
    """
    local_cfg = root / "config" / "campaign.local.json"
    if local_cfg.exists():
        return local_cfg
    return root / "config" / "campaign.sample.json"


def campaign_write_path(root: Path) -> Path:
    """
    始终写入本地覆盖配置，避免误改动仓库样本配置。
    """
    return root / "config" / "campaign.local.json"


def explicit_config_path(flag: str | None, settings: Settings | None = None) -> Path | None:
    """`--config` 优先，其次 `PATHML_CONFIG`；都没有时返回 None。"""
    if flag and str(flag).strip():
        return Path(str(flag).strip())
    config = settings or load_settings()
    if config.config_path:
        return Path(config.config_path)
    return None


def require_config_path(flag: str | None, settings: Settings | None = None) -> Path:
    path = explicit_config_path(flag, settings)
    if path is None:
        raise UsageError("缺少 campaign 配置：请传入 --config 或设置 PATHML_CONFIG")
    return path


def config_path_for_edit(flag: str | None, root: Path, settings: Settings | None = None) -> tuple[Path, Path]:
    """
    `config` 子命令的读/写路径：显式路径时读写同一个文件；
    否则读 local → sample，写 local。
    """
    path = explicit_config_path(flag, settings)
    if path is not None:
        return path, path
    return resolve_campaign_config(root), campaign_write_path(root)
