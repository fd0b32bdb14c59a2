import functools
import tempfile
import unittest
from pathlib import Path

import numpy as np
import pandas as pd

from pathml.bench import (
    BenchOptions,
    SimCampaign,
    argmax_oracle,
    emit_report,
    load_csv_dir,
    loads_report,
    resolve_tasks,
    run_benchmark,
    simulate,
    task5_inject,
    task_rng,
)
from pathml.bench.anomaly import inject_anomalies, raw_window_dataset, run_task3
from pathml.bench.bottleneck import hop_differences, hop_feature_names, hop_features, run_task5
from pathml.bench.data import BenchData
from pathml.bench.failure import run_task2
from pathml.bench.forecast import run_task1
from pathml.bench.qoe import PROFILES
from pathml.bench.selection import run_task4
from pathml.domain.enums import Category
from pathml.domain.errors import (
    DegenerateLabels,
    InsufficientData,
    InsufficientHops,
    InvalidContamination,
    NoCandidates,
    SchemaError,
    SingleClassAuc,
    UsageError,
)
from pathml.ml import dataset_from_samples
from pathml.simnet import SimSpec
from pathml.table_contracts import COLUMNS_HOPS, COLUMNS_MEASUREMENTS
from pathml.transform.export import write_frame
from pathml.transform.windows import HOP_PAD, FeatureSample, build_hop_samples

FAST = BenchOptions(n_trees=30, min_forecast_samples=50)


def _quiet_campaign(seed: int = 11, cycles: int = 120) -> SimCampaign:
    """默认噪声、没有故障、没有逐跳超时。"""
    return SimCampaign(spec=SimSpec(as_count=3, hop_timeout_pct=0.0, seed=seed), cycles=cycles, failures=0)


@functools.cache
def _quiet_data() -> BenchData:
    return simulate(_quiet_campaign())


class _QuietData(unittest.TestCase):
    data: BenchData

    @classmethod
    def setUpClass(cls) -> None:
        cls.data = _quiet_data()


class SimulateTests(_QuietData):
    def test_provenance_and_tables(self) -> None:
        prov = self.data.provenance
        self.assertEqual((prov.source, prov.seed, prov.cycles, prov.paths, prov.failures), ("sim", 11, 120, 8, 0))
        self.assertEqual(list(self.data.measurements.columns), list(COLUMNS_MEASUREMENTS))
        self.assertEqual(list(self.data.hops.columns), list(COLUMNS_HOPS))
        pings = self.data.measurements[
            (self.data.measurements["category"] == Category.PING.value) & (self.data.measurements["concurrent"] == 0)
        ]
        self.assertEqual(len(pings), 120 * 8)

    def test_failures_land_on_measured_paths(self) -> None:
        data = simulate(SimCampaign(spec=SimSpec(as_count=3, seed=2), cycles=60, failures=4))
        self.assertEqual(data.provenance.failures, 4)
        unavailable = data.measurements[
            (data.measurements["category"] == Category.PING.value) & (data.measurements["available"] == 0)
        ]
        self.assertGreaterEqual(unavailable["fingerprint"].nunique(), 1)

    def test_csv_directory_round_trip(self) -> None:
        with tempfile.TemporaryDirectory() as tmp:
            root = Path(tmp)
            write_frame(self.data.measurements, root / "measurements.csv")
            write_frame(self.data.hops, root / "hops.csv")
            loaded = load_csv_dir(root, seed=5)
        pd.testing.assert_frame_equal(loaded.measurements, self.data.measurements)
        pd.testing.assert_frame_equal(loaded.hops, self.data.hops)
        self.assertEqual((loaded.provenance.source, loaded.provenance.seed, loaded.provenance.cycles), ("csv", 5, 120))

    def test_csv_header_must_match_contract(self) -> None:
        with tempfile.TemporaryDirectory() as tmp:
            root = Path(tmp)
            (root / "measurements.csv").write_text("timestamp_utc,rtt\n2025-01-01T00:00:00Z,1\n", encoding="utf-8")
            with self.assertRaises(SchemaError) as ctx:
                load_csv_dir(root)
        self.assertIn("cycle_index", ctx.exception.details["missing"])


class ForecastTaskTests(_QuietData):
    def test_zero_noise_rtt_is_predicted_exactly(self) -> None:
        spec = SimSpec(
            as_count=3,
            noise_sigma_ms=0.0,
            diurnal_amplitude_pct=0.0,
            base_loss_pct_range=(0.0, 0.0),
            hop_timeout_pct=0.0,
            seed=3,
        )
        data = simulate(SimCampaign(spec=spec, cycles=40, failures=0))
        outcome = run_task1(data, BenchOptions(n_trees=10, min_forecast_samples=20))
        self.assertLess(outcome.report.metric("linreg", "rtt", "mae"), 1e-6)

    def test_reports_every_model_with_split_counts(self) -> None:
        outcome = run_task1(self.data, FAST)
        keys = [m.key for m in outcome.report.metrics]
        self.assertEqual(keys, ["linreg/rtt/mae", "linreg/bw/mae", "ensemble/bw/mae"])
        rtt = outcome.report.metrics[0]
        self.assertEqual(rtt.train + rtt.test, 8 * (120 - 12))
        self.assertTrue(all(m.train > 0 and m.test > 0 and m.value >= 0 for m in outcome.report.metrics))
        preds = outcome.predictions
        self.assertEqual(list(preds.columns), ["target", "model", "fingerprint", "t_index", "actual", "predicted"])
        self.assertEqual(len(preds[preds["target"] == "rtt"]), rtt.test)
        self.assertEqual(outcome.report.reference_values["linreg/rtt/mae"], 3.878)

    def test_too_few_windows(self) -> None:
        with self.assertRaises(InsufficientData) as ctx:
            run_task1(self.data, BenchOptions(min_forecast_samples=100_000))
        self.assertEqual(ctx.exception.details["required"], 100_000)
        self.assertEqual(ctx.exception.details["actual"], 8 * (120 - 12))


class FailureTaskTests(unittest.TestCase):
    def test_precursors_make_failures_predictable(self) -> None:
        spec = SimSpec(as_count=3, seed=7)
        with_precursor = simulate(SimCampaign(spec=spec, cycles=160, failures=32))
        abrupt = simulate(SimCampaign(spec=spec, cycles=160, failures=32, abrupt_fraction=1.0))
        rich = run_task2(with_precursor, FAST).report
        blind = run_task2(abrupt, FAST).report
        self.assertGreater(rich.params["test_positives"], 0)
        self.assertLess(blind.metric("forest", "failure", "recall"), rich.metric("forest", "failure", "recall"))

    def test_clean_four_cycle_precursors(self) -> None:
        spec = SimSpec(
            as_count=3,
            noise_sigma_ms=0.0,
            base_loss_pct_range=(0.0, 0.0),
            seed=9,
        )
        data = simulate(SimCampaign(spec=spec, cycles=160, failures=32, abrupt_fraction=0.0, precursor_choices=(4,)))
        report = run_task2(data, FAST).report
        self.assertGreaterEqual(report.metric("forest", "failure", "f1"), 0.95)

    def test_no_failures_means_degenerate_labels(self) -> None:
        data = simulate(_quiet_campaign(cycles=30))
        with self.assertRaises(DegenerateLabels):
            run_task2(data, FAST)


class AnomalyTaskTests(_QuietData):
    def test_contamination_bounds(self) -> None:
        for p in (0.0, 0.25, -0.1):
            with self.subTest(p=p), self.assertRaises(InvalidContamination):
                run_task3(self.data, BenchOptions(contamination=p))

    def test_injection_persists_across_window(self) -> None:
        raw = raw_window_dataset(self.data.measurements, 6)
        injected = inject_anomalies(raw, 6, 0.1, (2.0, 2.0), (5.0, 5.0), np.random.default_rng(0))
        hit = injected.y == 1
        self.assertEqual(int(hit.sum()), int(round(0.1 * len(raw))))
        np.testing.assert_allclose(injected.X[hit, :6], raw.X[hit, :6] * 2.0)
        np.testing.assert_allclose(injected.X[hit, 12:18], np.minimum(raw.X[hit, 12:18] + 5.0, 100.0))
        np.testing.assert_array_equal(injected.X[~hit], raw.X[~hit])

    def test_default_anomalies_are_detected(self) -> None:
        report = run_task3(self.data, FAST).report
        self.assertGreaterEqual(report.metric("iforest", "anomaly", "auc_roc"), 0.70)
        self.assertEqual(report.params["injected"], int(round(0.05 * report.metrics[0].test)))

    def test_gross_anomalies_are_separable(self) -> None:
        options = BenchOptions(n_trees=30, factor_range=(5.0, 6.0))
        report = run_task3(self.data, options).report
        self.assertGreaterEqual(report.metric("iforest", "anomaly", "auc_roc"), 0.95)

    def test_nothing_injected_has_no_auc(self) -> None:
        with self.assertRaises(SingleClassAuc):
            run_task3(self.data, BenchOptions(n_trees=10, contamination=0.001))


class SelectionTaskTests(_QuietData):
    def test_rates_agree_with_decision_dump(self) -> None:
        outcome = run_task4(self.data, FAST)
        preds = outcome.predictions
        self.assertEqual([r.profile for r in outcome.report.profiles], [p.name for p in PROFILES])
        for rate, profile in zip(outcome.report.profiles, PROFILES):
            rows = preds[preds["profile"] == profile.name]
            self.assertEqual(rate.decisions, len(rows))
            self.assertEqual(rate.satisfied, int(rows["satisfied"].sum()))
            expected = (
                (rows["rtt_ms"] <= profile.max_rtt_ms)
                & (rows["loss_pct"] <= profile.max_loss_pct)
                & (rows["bw_mbps"] >= profile.min_bw_mbps)
            ).astype(int)
            self.assertEqual(rows["satisfied"].tolist(), expected.tolist())
        self.assertLessEqual(outcome.report.profiles[0].decisions, 120 * 2)
        self.assertGreater(outcome.report.profiles[0].decisions, 0)

    def test_without_bandwidth_there_is_nothing_to_recommend(self) -> None:
        frame = self.data.measurements
        no_bw = frame[~frame["category"].isin([Category.BANDWIDTH.value, Category.MP_BANDWIDTH.value])]
        data = BenchData(measurements=no_bw, hops=self.data.hops, provenance=self.data.provenance)
        with self.assertRaises(NoCandidates):
            run_task4(data, FAST)


class BottleneckTaskTests(_QuietData):
    def _sample(self, vector: list[float], hops: int) -> FeatureSample:
        return FeatureSample(features=tuple(vector), label=0.0, fingerprint="fp", t_index=0, hop_count=hops)

    def test_injection_shifts_only_real_hops_from_j(self) -> None:
        sample = self._sample([1.0, 3.0, 6.0, HOP_PAD], 3)
        rng = np.random.default_rng(1)
        for out in task5_inject([sample] * 50, (40.0, 40.0), rng):
            j = int(out.label)
            self.assertIn(j, (0, 1, 2))
            expected = [v + 40.0 if j <= i < 3 else v for i, v in enumerate(sample.features)]
            self.assertEqual(list(out.features), expected)

    def test_too_few_hops(self) -> None:
        with self.assertRaises(InsufficientHops):
            task5_inject([self._sample([2.0, HOP_PAD], 1)], (30.0, 100.0), np.random.default_rng(0))

    def test_differences_pad_like_vector(self) -> None:
        diffs = hop_differences(np.array([2.0, 5.0, 9.0, HOP_PAD]), 3)
        self.assertEqual(diffs.tolist(), [2.0, 3.0, 4.0, HOP_PAD])

    def test_argmax_oracle_recovers_every_label_without_noise_in_the_injection(self) -> None:
        samples = build_hop_samples(self.data.hops)
        injected = task5_inject(samples, (50.0, 50.0), np.random.default_rng(4))
        width = len(injected[0].features)
        ds = dataset_from_samples(hop_features(injected), hop_feature_names(width), label_dtype=int)
        counts = np.array(
            [s.hop_count for s in sorted(injected, key=lambda s: s.t_index)],
            dtype=np.int64,
        )
        np.testing.assert_array_equal(argmax_oracle(ds.X, counts), ds.y)

    def test_forest_localizes_the_delayed_hop(self) -> None:
        report = run_task5(self.data, BenchOptions(n_trees=30, delay_range=(50.0, 50.0))).report
        forest = report.metric("forest", "hop", "accuracy")
        oracle = report.metric("oracle", "hop", "accuracy")
        self.assertEqual(oracle, 1.0)
        self.assertGreaterEqual(forest, 0.95)
        total = sum(sum(row) for row in report.confusion.counts)
        self.assertEqual(total, report.metrics[0].test)

    def test_zero_delay_is_guessing(self) -> None:
        report = run_task5(self.data, BenchOptions(n_trees=30, delay_range=(0.0, 0.0))).report
        self.assertLess(report.metric("forest", "hop", "accuracy"), 0.5)


class RunnerTests(_QuietData):
    def test_task_selector(self) -> None:
        self.assertEqual(resolve_tasks("all"), ["task1", "task2", "task3", "task4", "task5"])
        self.assertEqual(resolve_tasks("task4"), ["task4"])
        with self.assertRaises(UsageError):
            resolve_tasks("task9")

    def test_task_streams_are_independent(self) -> None:
        a = task_rng(1, "task3").random(4)
        self.assertEqual(a.tolist(), task_rng(1, "task3").random(4).tolist())
        self.assertNotEqual(a.tolist(), task_rng(1, "task5").random(4).tolist())
        self.assertNotEqual(a.tolist(), task_rng(2, "task3").random(4).tolist())

    def test_all_tasks_skip_what_the_data_cannot_support(self) -> None:
        report, predictions = run_benchmark(self.data, resolve_tasks("all"), FAST)
        status = {t.task: t.status for t in report.tasks}
        self.assertEqual(status, {"task1": "ok", "task2": "skipped", "task3": "ok", "task4": "ok", "task5": "ok"})
        self.assertEqual(report.task("task2").error.code, "degenerate_labels")
        self.assertEqual(sorted(predictions), ["task1", "task3", "task4", "task5"])

    def test_single_task_errors_propagate(self) -> None:
        with self.assertRaises(DegenerateLabels):
            run_benchmark(self.data, ["task2"], FAST)

    def test_reports_are_reproducible(self) -> None:
        tasks = ["task3", "task4", "task5"]
        with tempfile.TemporaryDirectory() as tmp:
            out_a, out_b = Path(tmp) / "a", Path(tmp) / "b"
            report, predictions = run_benchmark(self.data, tasks, FAST)
            emit_report(report, out_a, predictions)
            report, predictions = run_benchmark(self.data, tasks, FAST, task_jobs=3)
            written = emit_report(report, out_b, predictions)
            self.assertEqual(
                sorted(p.name for p in written),
                ["report.json", "report.md", "task3_predictions.csv", "task4_predictions.csv", "task5_predictions.csv"],
            )
            for name in ("report.json", "task3_predictions.csv", "task5_predictions.csv"):
                self.assertEqual((out_a / name).read_bytes(), (out_b / name).read_bytes(), name)
            loaded = loads_report((out_a / "report.json").read_text(encoding="utf-8"))
            markdown = (out_a / "report.md").read_text(encoding="utf-8")
        self.assertEqual(loaded, report)
        for task in tasks:
            self.assertIn(f"## {task}", markdown)
        self.assertIn("| online_gaming | 50 | 1 | 0.5 |", markdown)


@functools.cache
def _default_data() -> BenchData:
    """默认规模的模拟 campaign（5 个 AS、400 个周期、按密度放置故障），较慢。"""
    return simulate(SimCampaign().with_seed(42))


DEFAULT = BenchOptions(seed=42)


class DefaultScaleTests(unittest.TestCase):
    data: BenchData

    @classmethod
    def setUpClass(cls) -> None:
        cls.data = _default_data()

    def test_ensemble_beats_linreg_on_bandwidth(self) -> None:
        report = run_task1(self.data, DEFAULT).report
        self.assertLessEqual(report.metric("ensemble", "bw", "mae"), report.metric("linreg", "bw", "mae"))

    def test_failure_prediction_f1(self) -> None:
        self.assertGreaterEqual(self.data.provenance.failures, 150)
        report = run_task2(self.data, DEFAULT).report
        self.assertGreaterEqual(report.metric("forest", "failure", "f1"), 0.80)

    def test_bottleneck_accuracy_near_oracle(self) -> None:
        self.assertEqual(DEFAULT.delay_range, (30.0, 100.0))
        report = run_task5(self.data, DEFAULT).report
        forest = report.metric("forest", "hop", "accuracy")
        self.assertGreaterEqual(forest, 0.95)
        self.assertGreaterEqual(forest, report.metric("oracle", "hop", "accuracy") - 0.02)


if __name__ == "__main__":
    unittest.main()
