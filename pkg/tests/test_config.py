import tempfile
import unittest
from pathlib import Path

from pathml.config import campaign_write_path, config_path_for_edit, require_config_path, resolve_campaign_config
from pathml.domain.errors import UsageError
from pathml.settings import Settings


def _settings(config_path: str = "") -> Settings:
    return Settings(
        log_level="INFO",
        log_json=False,
        log_path="",
        log_rotation_mb=100,
        log_retention_days=14,
        scion_bin="",
        probe_timeout_s=60.0,
        probe_retries=1,
        config_path=config_path,
    )


class TestConfigPaths(unittest.TestCase):
    def test_prefers_local_override_if_present(self) -> None:
        with tempfile.TemporaryDirectory() as d:
            root = Path(d)
            (root / "config").mkdir(parents=True, exist_ok=True)
            sample = root / "config" / "campaign.sample.json"
            local = root / "config" / "campaign.local.json"
            sample.write_text("{}", encoding="utf-8")
            local.write_text("{}", encoding="utf-8")
            self.assertEqual(resolve_campaign_config(root), local)

    def test_uses_sample_when_local_missing(self) -> None:
        with tempfile.TemporaryDirectory() as d:
            root = Path(d)
            (root / "config").mkdir(parents=True, exist_ok=True)
            sample = root / "config" / "campaign.sample.json"
            sample.write_text("{}", encoding="utf-8")
            self.assertEqual(resolve_campaign_config(root), sample)

    def test_write_path_is_local_override(self) -> None:
        with tempfile.TemporaryDirectory() as d:
            root = Path(d)
            self.assertEqual(campaign_write_path(root), root / "config" / "campaign.local.json")

    def test_flag_beats_environment(self) -> None:
        path = require_config_path("a.json", _settings("b.json"))
        self.assertEqual(path, Path("a.json"))
        self.assertEqual(require_config_path(None, _settings("b.json")), Path("b.json"))

    def test_missing_config_is_usage_error(self) -> None:
        with self.assertRaises(UsageError) as ctx:
            require_config_path(None, _settings())
        self.assertEqual(ctx.exception.exit_code, 1)

    def test_edit_paths(self) -> None:
        with tempfile.TemporaryDirectory() as d:
            root = Path(d)
            read, write = config_path_for_edit(None, root, _settings())
            self.assertEqual(read, root / "config" / "campaign.sample.json")
            self.assertEqual(write, root / "config" / "campaign.local.json")
            read, write = config_path_for_edit("x.json", root, _settings())
            self.assertEqual(read, write)
