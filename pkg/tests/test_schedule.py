import unittest

from pathml.application.services.config_service import init_config, set_pipeline
from pathml.application.services.schedule_service import CRON_MARKER, cron_line, cron_schedule, install_cron
from pathml.domain.errors import ToolFailed, UnsupportedInterval
from pathml.infrastructure.probes.subprocess_adapter import CommandOutput


class _FakeCrontab:
    def __init__(self, existing: CommandOutput, write_exit: int = 0) -> None:
        self.existing = existing
        self.write_exit = write_exit
        self.written: str | None = None

    def __call__(self, cmd: list[str], stdin: str | None) -> CommandOutput:
        if cmd == ["crontab", "-l"]:
            return self.existing
        self.written = stdin
        return CommandOutput(self.write_exit, "", "permission denied" if self.write_exit else "")


class TestCronSchedule(unittest.TestCase):
    def test_minute_divisors(self) -> None:
        self.assertEqual(cron_schedule(30), "*/30 * * * *")
        self.assertEqual(cron_schedule(5), "*/5 * * * *")
        self.assertEqual(cron_schedule(60), "0 * * * *")

    def test_hour_multiples(self) -> None:
        self.assertEqual(cron_schedule(120), "0 */2 * * *")
        self.assertEqual(cron_schedule(1440), "0 0 * * *")

    def test_unsupported(self) -> None:
        for minutes in (45, 7, 300, 0):
            with self.assertRaises(UnsupportedInterval):
                cron_schedule(minutes)

    def test_line(self) -> None:
        cfg = init_config("17-ffaa:0:1101", "data")
        line = cron_line(cfg, config_path="/etc/pathml/campaign.json")
        self.assertTrue(line.startswith("*/30 * * * * pathml run-cycle --config /etc/pathml/campaign.json"))
        self.assertTrue(line.endswith(CRON_MARKER))
        with self.assertRaises(UnsupportedInterval):
            cron_line(set_pipeline(cfg, interval_minutes=45), config_path="c.json")


class TestInstall(unittest.TestCase):
    def test_replaces_previous_line(self) -> None:
        existing = f"0 3 * * * backup.sh\n*/15 * * * * pathml run-cycle --config old.json {CRON_MARKER}\n"
        fake = _FakeCrontab(CommandOutput(0, existing, ""))
        merged = install_cron(f"*/30 * * * * pathml run-cycle --config new.json {CRON_MARKER}", runner=fake)
        self.assertEqual(fake.written, merged)
        rows = merged.splitlines()
        self.assertEqual(rows[0], "0 3 * * * backup.sh")
        self.assertEqual(len(rows), 2)
        self.assertIn("new.json", rows[1])

    def test_empty_crontab(self) -> None:
        fake = _FakeCrontab(CommandOutput(1, "", "no crontab for user"))
        merged = install_cron("x " + CRON_MARKER, runner=fake)
        self.assertEqual(merged, "x " + CRON_MARKER + "\n")

    def test_write_failure(self) -> None:
        fake = _FakeCrontab(CommandOutput(0, "", ""), write_exit=1)
        with self.assertRaises(ToolFailed):
            install_cron("x " + CRON_MARKER, runner=fake)


if __name__ == "__main__":
    unittest.main()
