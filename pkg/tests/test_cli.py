import io
import json
import os
import tempfile
import unittest
from contextlib import redirect_stderr, redirect_stdout
from pathlib import Path
from unittest import mock

from pathml.application.services.config_service import load_config
from pathml.bench import loads_report
from pathml.cli import dispatch
from pathml.domain.enums import CATEGORIES, Category
from pathml.domain.models.campaign import CampaignConfig
from pathml.logger import get_logger
from pathml.schemas.common import validate_json_document
from pathml.simnet import load_event_plan

get_logger()


def _run(*argv: str) -> tuple[int, str, str]:
    stdout, stderr = io.StringIO(), io.StringIO()
    with mock.patch.dict(os.environ, {"PATHML_CONFIG": ""}), redirect_stdout(stdout), redirect_stderr(stderr):
        code = dispatch(list(argv))
    return code, stdout.getvalue(), stderr.getvalue()


class UsageTests(unittest.TestCase):
    def test_help_lists_every_command(self) -> None:
        code, stdout, _ = _run("--help")
        self.assertEqual(code, 0)
        for name in ("config", "run-cycle", "schedule", "data", "export", "sim", "bench"):
            self.assertIn(name, stdout)

    def test_nested_help(self) -> None:
        code, stdout, _ = _run("config", "pipeline", "set", "--help")
        self.assertEqual(code, 0)
        self.assertIn("--paths-per-pair", stdout)

    def test_unknown_command_is_usage_error(self) -> None:
        code, _, stderr = _run("frobnicate")
        self.assertEqual(code, 1)
        self.assertIn("error[usage]:", stderr)

    def test_run_cycle_without_config(self) -> None:
        code, _, stderr = _run("run-cycle")
        self.assertEqual(code, 1)
        self.assertIn("error[usage]:", stderr)

    def test_unknown_task(self) -> None:
        code, _, stderr = _run("bench", "run", "task9")
        self.assertEqual(code, 1)
        self.assertIn("error[usage]:", stderr)


class ConfigCommandTests(unittest.TestCase):
    def setUp(self) -> None:
        self._tmp = tempfile.TemporaryDirectory()
        self.path = Path(self._tmp.name) / "campaign.json"
        code, _, _ = _run("config", "init", "--config", str(self.path), "--local-as", "17-ffaa:0:1101", "--storage-root", "data")
        self.assertEqual(code, 0)

    def tearDown(self) -> None:
        self._tmp.cleanup()

    def test_pipeline_enable_updates_file(self) -> None:
        self.assertEqual(_run("config", "pipeline", "disable", "traceroute", "--config", str(self.path))[0], 0)
        self.assertFalse(load_config(self.path).pipeline.is_enabled(Category.TRACEROUTE))
        code, stdout, _ = _run("config", "pipeline", "enable", "traceroute", "--config", str(self.path))
        self.assertEqual(code, 0)
        self.assertIn("traceroute: enabled", stdout)
        self.assertTrue(load_config(self.path).pipeline.is_enabled(Category.TRACEROUTE))

    def test_dependency_violation_keeps_file(self) -> None:
        before = self.path.read_text(encoding="utf-8")
        code, _, stderr = _run("config", "pipeline", "disable", "showpaths", "--config", str(self.path))
        self.assertEqual(code, 2)
        self.assertIn("error[dependency_violation]:", stderr)
        self.assertEqual(self.path.read_text(encoding="utf-8"), before)

    def test_registry_commands(self) -> None:
        self.assertEqual(_run("config", "as", "add", "17-ffaa:0:1102", "--ip", "10.0.0.2", "--config", str(self.path))[0], 0)
        code, _, stderr = _run("config", "as", "add", "17-ffaa:0:1102", "--ip", "10.0.0.2", "--config", str(self.path))
        self.assertEqual(code, 2)
        self.assertIn("error[duplicate_as]:", stderr)
        code, _, stderr = _run("config", "as", "add", "17ffaa", "--ip", "10.0.0.3", "--config", str(self.path))
        self.assertEqual(code, 2)
        self.assertIn("error[malformed_isd_as]:", stderr)
        self.assertEqual(_run("config", "server", "add", "17-ffaa:0:1102", "--ip", "10.0.0.2", "--config", str(self.path))[0], 0)
        code, stdout, _ = _run("config", "server", "list", "--json", "--config", str(self.path))
        self.assertEqual(code, 0)
        self.assertEqual(json.loads(stdout)[0]["port"], 30100)
        self.assertEqual(_run("config", "as", "remove", "17-ffaa:0:1102", "--config", str(self.path))[0], 0)
        self.assertEqual(load_config(self.path).ases, ())

    def test_pipeline_set(self) -> None:
        code, stdout, _ = _run("config", "pipeline", "set", "--interval", "60", "--tiers", "5,20", "--config", str(self.path))
        self.assertEqual(code, 0)
        self.assertIn("interval=60 tiers=5,20", stdout)
        self.assertEqual(_run("config", "pipeline", "set", "--config", str(self.path))[0], 1)
        code, _, stderr = _run("config", "pipeline", "set", "--ping-count", "0", "--config", str(self.path))
        self.assertEqual(code, 2)
        self.assertIn("error[schema_error]:", stderr)

    def test_show_json_round_trips(self) -> None:
        code, stdout, _ = _run("config", "show", "--json", "--config", str(self.path))
        self.assertEqual(code, 0)
        self.assertEqual(validate_json_document(CampaignConfig, stdout), load_config(self.path))

    def test_init_refuses_to_overwrite(self) -> None:
        code, _, _ = _run("config", "init", "--config", str(self.path), "--local-as", "17-ffaa:0:1101", "--storage-root", "x")
        self.assertEqual(code, 1)

    def test_schedule_print(self) -> None:
        code, stdout, _ = _run("schedule", "print", "--config", str(self.path))
        self.assertEqual(code, 0)
        self.assertTrue(stdout.startswith("*/30 * * * * pathml run-cycle --config "))

    def test_missing_config_file(self) -> None:
        code, _, stderr = _run("config", "show", "--config", str(self.path.with_name("missing.json")))
        self.assertEqual(code, 2)
        self.assertIn("error[io_error]:", stderr)


class SimCommandTests(unittest.TestCase):
    def test_paths_json(self) -> None:
        code, stdout, _ = _run("sim", "paths", "--json", "--seed", "42")
        self.assertEqual(code, 0)
        rows = json.loads(stdout)
        self.assertEqual(len(rows), 4 * 3 * 4)
        self.assertEqual(len({r["fingerprint"] for r in rows}), len(rows))

    def test_plan_writes_events(self) -> None:
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "events.json"
            code, stdout, _ = _run("sim", "plan", "--cycles", "200", "--seed", "3", "--out", str(path))
            self.assertEqual(code, 0)
            plan = load_event_plan(path)
        self.assertIn("bottleneck 5", stdout)
        self.assertEqual(len(plan.of_kind("bottleneck")), 5)

    def test_events_and_auto_are_exclusive(self) -> None:
        code, _, _ = _run("sim", "campaign", "--cycles", "2", "--auto", "--events", "x.json")
        self.assertEqual(code, 1)


class CampaignPipelineTests(unittest.TestCase):
    """sim campaign → data / export → bench 的完整链路（48 个周期，seed 42）。"""

    @classmethod
    def setUpClass(cls) -> None:
        cls._tmp = tempfile.TemporaryDirectory()
        cls.base = Path(cls._tmp.name)
        cls.root = cls.base / "store"
        cls.code, cls.stdout, _ = _run("sim", "campaign", "--cycles", "48", "--seed", "42", "--out", str(cls.root), "--json")

    @classmethod
    def tearDownClass(cls) -> None:
        cls._tmp.cleanup()

    def test_campaign_writes_every_category(self) -> None:
        self.assertEqual(self.code, 0)
        summary = json.loads(self.stdout)
        self.assertEqual((summary["cycles"], summary["seed"], summary["ases"]), (48, 42, 4))
        for category in CATEGORIES:
            self.assertGreater(summary["categories"][category.value], 0, category)
        self.assertTrue((self.root / "campaign.json").exists())
        self.assertEqual(load_config(self.root / "campaign.json").storage_root, str(self.root))

    def test_status_and_search(self) -> None:
        code, stdout, _ = _run("data", "status", "--root", str(self.root), "--json")
        self.assertEqual(code, 0)
        status = json.loads(stdout)
        self.assertEqual(status["categories"]["ping"]["cycles"], 48)
        self.assertEqual(status["current_pairs"], 3)
        code, stdout, _ = _run("data", "search", "--root", str(self.root), "--category", "traceroute", "--json")
        self.assertEqual(code, 0)
        self.assertEqual(len(json.loads(stdout)), status["categories"]["traceroute"]["files"])

    def test_export_twice_is_byte_identical(self) -> None:
        config = str(self.root / "campaign.json")
        first, second = self.base / "export-a", self.base / "export-b"
        self.assertEqual(_run("export", "csv", "--config", config, "--out", str(first))[0], 0)
        code, stdout, _ = _run("export", "csv", "--config", config, "--out", str(second), "--json")
        self.assertEqual(code, 0)
        self.assertGreater(json.loads(stdout)["measurement_rows"], 0)
        for name in ("measurements.csv", "hops.csv"):
            self.assertEqual((first / name).read_bytes(), (second / name).read_bytes())

    def test_bench_all_on_exported_data(self) -> None:
        data = self.base / "export-bench"
        out = self.base / "bench-out"
        self.assertEqual(_run("export", "csv", "--root", str(self.root), "--out", str(data))[0], 0)
        code, stdout, _ = _run("bench", "run", "all", "--data", str(data), "--out", str(out), "--n-trees", "10")
        self.assertEqual(code, 0)
        self.assertIn("task4: heuristic/online_gaming/satisfaction_rate", stdout)
        report = loads_report((out / "report.json").read_text(encoding="utf-8"))
        self.assertEqual([t.task for t in report.tasks], ["task1", "task2", "task3", "task4", "task5"])
        self.assertEqual(report.task("task2").status, "skipped")
        self.assertEqual(report.task("task4").status, "ok")
        self.assertTrue((out / "report.md").exists())

    def test_purge_requires_confirmation(self) -> None:
        code, _, stderr = _run("data", "purge", "--root", str(self.root), "--category", "ping")
        self.assertEqual(code, 1)
        self.assertIn("error[usage]:", stderr)
        code, stdout, _ = _run("data", "purge", "--root", str(self.root), "--category", "ping", "--dry-run")
        self.assertEqual(code, 0)
        self.assertIn("将删除", stdout)

    def test_inverted_range(self) -> None:
        code, _, stderr = _run("data", "search", "--root", str(self.root), "--from", "2025-01-02", "--to", "2025-01-01")
        self.assertEqual(code, 2)
        self.assertIn("error[invalid_criteria]:", stderr)


class RunCycleCommandTests(unittest.TestCase):
    def test_sim_backend_continues_a_campaign(self) -> None:
        with tempfile.TemporaryDirectory() as tmp:
            root = Path(tmp)
            self.assertEqual(_run("sim", "campaign", "--cycles", "2", "--seed", "5", "--out", str(root))[0], 0)
            code, stdout, _ = _run(
                "run-cycle",
                "--config",
                str(root / "campaign.json"),
                "--backend",
                "sim",
                "--simspec",
                str(root / "simspec.json"),
                "--events",
                str(root / "events.json"),
                "--cycle",
                "2",
            )
            status = json.loads(_run("data", "status", "--root", str(root), "--json")[1])
        self.assertEqual(code, 0)
        self.assertIn("cycle 2 @ 2025-01-01T01:00:00Z", stdout)
        self.assertIn("ping", stdout)
        self.assertEqual(status["categories"]["ping"]["cycles"], 3)
        self.assertEqual(status["log_files"], 3)


if __name__ == "__main__":
    unittest.main()
