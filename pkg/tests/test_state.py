import tempfile
import unittest
from datetime import datetime, timezone
from pathlib import Path

from pathml.state import as_utc, compact_utc, parse_compact_utc, parse_utc, write_text_atomic


class TestTimestamps(unittest.TestCase):
    def test_compact_round_trip(self) -> None:
        ts = datetime(2025, 1, 1, 6, 30, 5, tzinfo=timezone.utc)
        self.assertEqual(compact_utc(ts), "20250101T063005Z")
        self.assertEqual(parse_compact_utc("20250101T063005Z"), ts)

    def test_naive_is_utc(self) -> None:
        self.assertEqual(as_utc(datetime(2025, 1, 1)).tzinfo, timezone.utc)

    def test_parse_utc_is_lenient(self) -> None:
        expected = datetime(2025, 1, 1, 6, 0, tzinfo=timezone.utc)
        self.assertEqual(parse_utc("2025-01-01T06:00"), expected)
        self.assertEqual(parse_utc("2025-01-01T06:00:00Z"), expected)
        self.assertEqual(parse_utc("2025-01-01"), datetime(2025, 1, 1, tzinfo=timezone.utc))
        with self.assertRaises(ValueError):
            parse_utc(" ")


class TestAtomicWrite(unittest.TestCase):
    def test_failed_rename_keeps_old_content(self) -> None:
        def boom(_tmp: Path) -> None:
            raise RuntimeError("crash")

        with tempfile.TemporaryDirectory() as d:
            target = Path(d) / "a.json"
            write_text_atomic(target, "old")
            with self.assertRaises(RuntimeError):
                write_text_atomic(target, "new", before_rename=boom)
            self.assertEqual(target.read_text(encoding="utf-8"), "old")
