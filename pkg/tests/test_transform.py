import random
import tempfile
import unittest
from datetime import datetime, timezone
from pathlib import Path

import numpy as np
import pandas as pd

from pathml.application.services.collector_service import run_cycle
from pathml.application.services.config_service import campaign_for_sim
from pathml.domain.errors import EmptyPath, InvalidParams
from pathml.domain.models.paths import HopRef
from pathml.domain.models.topology import validate_isd_as
from pathml.infrastructure.storage.files.measurement_store import MeasurementStore
from pathml.simnet import SimNetBackend, SimSpec, build
from pathml.table_contracts import COLUMNS_HOPS, COLUMNS_MEASUREMENTS
from pathml.transform.export import export_csv, read_frame
from pathml.transform.fingerprint import path_fingerprint
from pathml.transform.series import assemble_path_series
from pathml.transform.windows import (
    HOP_PAD,
    WindowSpec,
    build_failure_samples,
    build_forecast_samples,
    build_hop_samples,
    contiguous_runs,
)

FIXTURES = Path(__file__).parent / "fixtures" / "export"
A = validate_isd_as("17-ffaa:0:1101")
B = validate_isd_as("19-ffaa:0:1303")


def _series(cycles, values, column="rtt_avg_ms") -> pd.DataFrame:
    return pd.DataFrame({"fingerprint": "0123456789abcdef", "cycle_index": cycles, column: values})


def _brute_force_count(cycles: list[int], n: int) -> int:
    count = 0
    for i in range(len(cycles) - n):
        if all(cycles[i + m + 1] == cycles[i + m] + 1 for m in range(n)):
            count += 1
    return count


def _campaign_store(root: Path, cycles: int = 2) -> MeasurementStore:
    sim = build(SimSpec(seed=42))
    store = MeasurementStore(root)
    config = campaign_for_sim(sim, storage_root=str(root))
    backend = SimNetBackend(sim)
    for c in range(cycles):
        run_cycle(config, backend, store, sim.clock(c))
    return store


class TestFingerprint(unittest.TestCase):
    def test_properties(self) -> None:
        hops = [HopRef(isd_as=A, ingress_if=0, egress_if=1), HopRef(isd_as=B, ingress_if=2, egress_if=0)]
        fp = path_fingerprint(hops)
        self.assertRegex(fp, r"^[0-9a-f]{16}$")
        self.assertEqual(fp, path_fingerprint(list(hops)))
        self.assertNotEqual(fp, path_fingerprint(list(reversed(hops))))
        with self.assertRaises(EmptyPath):
            path_fingerprint([])


class TestExport(unittest.TestCase):
    def test_deterministic_and_golden_headers(self) -> None:
        with tempfile.TemporaryDirectory() as d:
            store = _campaign_store(Path(d) / "store")
            first = export_csv(store, Path(d) / "a")
            second = export_csv(store, Path(d) / "b")
            self.assertEqual(first.measurements_path.read_bytes(), second.measurements_path.read_bytes())
            self.assertEqual(first.hops_path.read_bytes(), second.hops_path.read_bytes())
            header = first.measurements_path.read_text(encoding="utf-8").splitlines()[0] + "\n"
            self.assertEqual(header, (FIXTURES / "measurements.header.csv").read_text(encoding="utf-8"))
            hop_header = first.hops_path.read_text(encoding="utf-8").splitlines()[0] + "\n"
            self.assertEqual(hop_header, (FIXTURES / "hops.header.csv").read_text(encoding="utf-8"))
            self.assertEqual(first.skipped, 0)
            self.assertGreater(first.hop_rows, 0)

    def test_rows_are_sorted_and_empty_not_zero(self) -> None:
        with tempfile.TemporaryDirectory() as d:
            store = _campaign_store(Path(d) / "store")
            summary = export_csv(store, Path(d) / "out")
            df = read_frame(summary.measurements_path, COLUMNS_MEASUREMENTS)
            keys = list(zip(df["timestamp_utc"], df["src"], df["dst"], df["fingerprint"]))
            self.assertEqual(keys, sorted(keys))
            ping = df[df["category"] == "ping"]
            self.assertTrue(ping["bw_target_mbps"].isna().all())
            self.assertEqual(len(ping), 18)
            bw = df[df["category"] == "bandwidth"]
            self.assertTrue(bw["rtt_avg_ms"].isna().all())
            mp = df[df["category"] == "mp_prober"]
            self.assertTrue((mp["concurrent"] == 1).all())
            self.assertEqual(len(mp), 12)
            unavailable = df[df["available"] == 0]
            self.assertTrue(unavailable["rtt_avg_ms"].isna().all())

    def test_empty_range_header_only(self) -> None:
        with tempfile.TemporaryDirectory() as d:
            store = _campaign_store(Path(d) / "store", cycles=1)
            start = datetime(2030, 1, 1, tzinfo=timezone.utc)
            summary = export_csv(store, Path(d) / "out", start=start)
            self.assertEqual(summary.measurement_rows, 0)
            self.assertEqual(len(summary.measurements_path.read_text(encoding="utf-8").splitlines()), 1)
            self.assertEqual(read_frame(summary.hops_path, COLUMNS_HOPS).shape, (0, len(COLUMNS_HOPS)))

    def test_corrupt_file_is_counted(self) -> None:
        with tempfile.TemporaryDirectory() as d:
            store = _campaign_store(Path(d) / "store", cycles=1)
            bad = Path(d) / "store" / "measurements" / "2025-01-01" / "ping"
            (bad / "20250101T000000Z_17-ffaa-0-1101_18-ffaa-0-1102_ffffffffffffffff_0000.json").write_text("{oops", encoding="utf-8")
            summary = export_csv(store, Path(d) / "out")
            self.assertEqual(summary.skipped, 1)
            self.assertEqual(len(summary.skipped_files), 1)


class TestForecastWindows(unittest.TestCase):
    def test_counts(self) -> None:
        spec = WindowSpec(n=12)
        self.assertEqual(len(build_forecast_samples(_series(range(15), range(15)), "rtt_avg", spec)), 3)
        self.assertEqual(len(build_forecast_samples(_series(range(12), range(12)), "rtt_avg", spec)), 0)

    def test_constant_series(self) -> None:
        samples = build_forecast_samples(_series(range(20), [7.0] * 20), "rtt_avg", WindowSpec(n=12))
        self.assertTrue(all(s.label == 7.0 and set(s.features) == {7.0} for s in samples))

    def test_labels_follow_window(self) -> None:
        samples = build_forecast_samples(_series(range(5), [1.0, 2.0, 3.0, 4.0, 5.0]), "rtt_avg", WindowSpec(n=3))
        self.assertEqual([(s.features, s.label) for s in samples], [((1.0, 2.0, 3.0), 4.0), ((2.0, 3.0, 4.0), 5.0)])

    def test_bandwidth_metric(self) -> None:
        df = _series(range(4), [10.0, 20.0, 30.0, 40.0], column="bw_achieved_sc_mbps")
        self.assertEqual(len(build_forecast_samples(df, "bw_achieved", WindowSpec(n=2))), 2)

    def test_window_law_against_brute_force(self) -> None:
        rng = random.Random(5)
        for _ in range(1000):
            length = rng.randint(0, 60)
            cycles = sorted(rng.sample(range(80), length))
            n = rng.randint(1, 8)
            samples = build_forecast_samples(_series(cycles, [float(c) for c in cycles]), "rtt_avg", WindowSpec(n=n))
            self.assertEqual(len(samples), _brute_force_count(cycles, n))
            for s in samples:
                self.assertLess(max(s.feature_t), s.t_index)
                self.assertEqual(s.label, float(s.t_index))

    def test_missing_value_is_a_gap(self) -> None:
        samples = build_forecast_samples(_series(range(6), [1.0, 2.0, np.nan, 4.0, 5.0, 6.0]), "rtt_avg", WindowSpec(n=2))
        self.assertEqual([s.t_index for s in samples], [5])

    def test_invalid_window(self) -> None:
        with self.assertRaises(InvalidParams):
            WindowSpec(n=0)

    def test_contiguous_runs(self) -> None:
        self.assertEqual(contiguous_runs([1, 2, 3, 7, 8, 10]), [(0, 3), (3, 5), (5, 6)])
        self.assertEqual(contiguous_runs([]), [])


def _path_series(available: list[int], rtt: list[float] | None = None) -> pd.DataFrame:
    n = len(available)
    rtt = rtt or [10.0] * n
    return pd.DataFrame(
        {
            "fingerprint": "0123456789abcdef",
            "cycle_index": range(n),
            "rtt_avg_ms": [r if a else np.nan for r, a in zip(rtt, available)],
            "jitter_ms": [0.5 if a else np.nan for a in available],
            "loss_pct": [0.0 if a else 100.0 for a in available],
            "available": available,
            "bw_mbps": [np.nan] * n,
        }
    )


class TestFailureWindows(unittest.TestCase):
    def test_always_available(self) -> None:
        samples = build_failure_samples(_path_series([1] * 10))
        self.assertEqual(len(samples), 4)
        self.assertTrue(all(s.label == 0.0 for s in samples))
        self.assertTrue(all(len(s.features) == 14 for s in samples))

    def test_flip_labels_target(self) -> None:
        samples = build_failure_samples(_path_series([1] * 7 + [0, 1, 1]))
        by_target = {s.t_index: s.label for s in samples}
        self.assertEqual(by_target[7], 1.0)
        self.assertEqual(by_target[6], 0.0)
        self.assertNotIn(8, by_target)

    def test_flat_rtt_has_zero_deltas(self) -> None:
        (sample,) = build_failure_samples(_path_series([1] * 7))
        self.assertEqual(sample.features[6:11], (0.0,) * 5)
        self.assertEqual(sample.features[-1], -1.0)


class TestHopSamples(unittest.TestCase):
    def _rows(self, records: list[tuple[str, str, list[tuple[float, float, float] | None]]]) -> pd.DataFrame:
        rows = []
        for ts, fp, hops in records:
            for i, rtts in enumerate(hops):
                r1, r2, r3 = rtts if rtts else (np.nan, np.nan, np.nan)
                rows.append({"timestamp_utc": ts, "fingerprint": fp, "hop_index": i, "isd_as": "1-1", "rtt1_ms": r1, "rtt2_ms": r2, "rtt3_ms": r3})
        return pd.DataFrame(rows, columns=list(COLUMNS_HOPS))

    def test_padding_and_imputation(self) -> None:
        rows = self._rows(
            [
                ("t0", "a" * 16, [(1.0, 1.0, 1.0), (2.0, 2.0, 2.0), (3.0, 3.0, 3.0)]),
                ("t0", "b" * 16, [(1.0, 2.0, 3.0), None, (5.0, 5.0, 5.0), (6.0, 6.0, 6.0), (7.0, 7.0, 7.0)]),
                ("t1", "c" * 16, [None, (2.0, 2.0, 2.0)]),
            ]
        )
        samples = build_hop_samples(rows)
        self.assertEqual(len(samples), 2)
        self.assertEqual(samples[0].features, (1.0, 2.0, 3.0, HOP_PAD, HOP_PAD))
        self.assertEqual(samples[0].hop_count, 3)
        self.assertEqual(samples[1].features, (2.0, 2.0, 5.0, 6.0, 7.0))


class TestPathSeries(unittest.TestCase):
    def test_assemble(self) -> None:
        fp = "0123456789abcdef"
        base = {"src": str(A), "dst": str(B), "fingerprint": fp, "timestamp_utc": "x"}
        frame = pd.DataFrame(
            [
                {**base, "cycle_index": 0, "category": "ping", "concurrent": 0, "rtt_avg_ms": 10.0, "jitter_ms": 1.0, "loss_pct": 0.0, "available": 1},
                {**base, "cycle_index": 0, "category": "bandwidth", "concurrent": 0, "bw_achieved_sc_mbps": 9.5, "available": 1},
                {**base, "cycle_index": 0, "category": "bandwidth", "concurrent": 0, "bw_achieved_sc_mbps": 48.0, "available": 1},
                {**base, "cycle_index": 1, "category": "ping", "concurrent": 0, "rtt_avg_ms": 11.0, "jitter_ms": 1.0, "loss_pct": 0.0, "available": 1},
                {**base, "cycle_index": 1, "category": "mp_prober", "concurrent": 1, "rtt_avg_ms": 99.0, "available": 1},
                {**base, "cycle_index": 2, "category": "comparer", "concurrent": 0, "available": 0},
            ],
            columns=list(COLUMNS_MEASUREMENTS),
        )
        frame["concurrent"] = frame["concurrent"].astype("Int64")
        frame["available"] = frame["available"].astype("Int64")
        series = assemble_path_series(frame)
        self.assertEqual(series["cycle_index"].tolist(), [0, 1, 2])
        self.assertEqual(series["available"].tolist(), [1, 1, 0])
        self.assertEqual(series["bw_mbps"].tolist(), [48.0, 48.0, 48.0])
        self.assertEqual(series["rtt_avg_ms"].tolist()[:2], [10.0, 11.0])


if __name__ == "__main__":
    unittest.main()
