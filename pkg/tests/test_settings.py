import os
import unittest
from contextlib import contextmanager

from pathml.settings import load_settings


@contextmanager
def temp_environ(update: dict[str, str | None]):
    old = dict(os.environ)
    try:
        for k, v in update.items():
            if v is None:
                os.environ.pop(k, None)
            else:
                os.environ[k] = v
        yield
    finally:
        os.environ.clear()
        os.environ.update(old)


class TestSettings(unittest.TestCase):
    def test_env_vars(self) -> None:
        with temp_environ(
            {
                "PATHML_LOG_LEVEL": "debug",
                "PATHML_PROBE_TIMEOUT_S": "12.5",
                "PATHML_PROBE_RETRIES": "3",
                "PATHML_CONFIG": "/etc/pathml/campaign.json",
            }
        ):
            s = load_settings()
            self.assertEqual(s.log_level, "DEBUG")
            self.assertEqual(s.probe_timeout_s, 12.5)
            self.assertEqual(s.probe_retries, 3)
            self.assertEqual(s.config_path, "/etc/pathml/campaign.json")

    def test_empty_values_are_unset(self) -> None:
        with temp_environ({"PATHML_LOG_LEVEL": "  ", "PATHML_CONFIG": ""}):
            s = load_settings()
            self.assertEqual(s.log_level, "INFO")
            self.assertEqual(s.config_path, "")

    def test_non_positive_numbers_fall_back(self) -> None:
        with temp_environ({"PATHML_PROBE_TIMEOUT_S": "0", "PATHML_LOG_ROTATION_MB": "-1", "PATHML_PROBE_RETRIES": "x"}):
            s = load_settings()
            self.assertEqual(s.probe_timeout_s, 60.0)
            self.assertEqual(s.log_rotation_mb, 100)
            self.assertEqual(s.probe_retries, 1)
