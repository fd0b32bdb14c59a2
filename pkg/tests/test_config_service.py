import random
import tempfile
import unittest
from pathlib import Path

from pathml.application.services.config_service import (
    add_as,
    add_server,
    campaign_for_sim,
    dump_config,
    init_config,
    load_config,
    make_as,
    make_server,
    remove_as,
    save_config,
    set_category,
    set_pipeline,
)
from pathml.domain.enums import CATEGORIES, Category
from pathml.domain.errors import (
    DependencyViolation,
    DuplicateAs,
    DuplicateServer,
    InvalidIp,
    IoError,
    IsdOutOfRange,
    MalformedIsdAs,
    PortOutOfRange,
    SchemaError,
    UnknownCategory,
    UnknownEntry,
)
from pathml.domain.models.topology import IsdAs, validate_isd_as
from pathml.simnet import SimSpec, build, load_simspec


def _config():
    return init_config("17-ffaa:0:1101", "/tmp/pathml-data", seed=7)


class TestIsdAs(unittest.TestCase):
    def test_examples(self) -> None:
        self.assertEqual(validate_isd_as("17-ffaa:0:1101"), IsdAs(isd=17, as_code="ffaa:0:1101"))
        with self.assertRaises(IsdOutOfRange):
            validate_isd_as("0-ffaa:0:1101")
        with self.assertRaises(MalformedIsdAs):
            validate_isd_as("17ffaa:0:1101")

    def test_uppercase_hex_is_normalized(self) -> None:
        self.assertEqual(str(validate_isd_as("17-FFAA:0:1101")), "17-ffaa:0:1101")

    def test_round_trip_over_generated_strings(self) -> None:
        rng = random.Random(3)
        for _ in range(500):
            isd = rng.randint(1, 65535)
            if rng.random() < 0.5:
                as_code = ":".join(f"{rng.randint(0, 0xFFFF):x}" for _ in range(3))
            else:
                as_code = str(rng.randint(0, 2**32))
            text = f"{isd}-{as_code}"
            self.assertEqual(str(validate_isd_as(text)), text)


class TestRegistry(unittest.TestCase):
    def test_add_as(self) -> None:
        cfg = add_as(_config(), make_as("19-ffaa:1:abc", "10.0.0.5", "remote"))
        self.assertEqual(len(cfg.ases), 1)
        with self.assertRaises(DuplicateAs):
            add_as(cfg, make_as("19-ffaa:1:abc", "10.0.0.6", "again"))
        with self.assertRaises(InvalidIp):
            make_as("19-ffaa:1:abd", "999.1.1.1", "bad")

    def test_local_as_cannot_be_remote(self) -> None:
        with self.assertRaises(DuplicateAs):
            add_as(_config(), make_as("17-ffaa:0:1101", "10.0.0.1", "self"))

    def test_add_server(self) -> None:
        cfg = add_server(_config(), make_server("19-ffaa:1:abc", "10.0.0.5", 30100, "bw"))
        self.assertEqual(len(cfg.servers), 1)
        with self.assertRaises(PortOutOfRange):
            make_server("19-ffaa:1:abd", "10.0.0.5", 0, "bw")
        with self.assertRaises(DuplicateServer):
            add_server(cfg, make_server("19-ffaa:1:abc", "10.0.0.7", 30101, "bw2"))

    def test_failed_add_leaves_config_unchanged(self) -> None:
        cfg = add_as(_config(), make_as("19-ffaa:1:abc", "10.0.0.5", "remote"))
        before = dump_config(cfg)
        with self.assertRaises(DuplicateAs):
            add_as(cfg, make_as("19-ffaa:1:abc", "10.0.0.6", "again"))
        self.assertEqual(dump_config(cfg), before)

    def test_remove(self) -> None:
        cfg = add_as(_config(), make_as("19-ffaa:1:abc", "10.0.0.5", "remote"))
        self.assertEqual(remove_as(cfg, validate_isd_as("19-ffaa:1:abc")).ases, ())
        with self.assertRaises(UnknownEntry):
            remove_as(cfg, validate_isd_as("19-ffaa:1:abd"))


class TestPipeline(unittest.TestCase):
    def test_set_category(self) -> None:
        cfg = set_category(_config(), "traceroute", False)
        cfg = set_category(cfg, "traceroute", True)
        self.assertTrue(cfg.pipeline.enabled[Category.TRACEROUTE])
        with self.assertRaises(UnknownCategory):
            set_category(cfg, "pingg", True)

    def test_comparer_needs_showpaths(self) -> None:
        cfg = set_category(_config(), "comparer", False)
        cfg = set_category(cfg, "showpaths", False)
        with self.assertRaises(DependencyViolation):
            set_category(cfg, "comparer", True)
        with self.assertRaises(DependencyViolation):
            set_category(_config(), "showpaths", False)

    def test_mp_bandwidth_needs_tiers(self) -> None:
        with self.assertRaises(DependencyViolation):
            set_pipeline(_config(), tiers_mbps=[])
        cfg = set_pipeline(set_category(_config(), "mp_bandwidth", False), tiers_mbps=[])
        self.assertEqual(cfg.pipeline.bandwidth_tiers_mbps, ())

    def test_defaults(self) -> None:
        p = _config().pipeline
        self.assertEqual(p.interval_minutes, 30)
        self.assertEqual(p.bandwidth_tiers_mbps, (10.0, 50.0, 100.0))
        self.assertEqual((p.ping_count, p.paths_per_pair, p.mp_concurrency), (10, 3, 2))
        self.assertEqual(set(p.enabled), set(CATEGORIES))

    def test_bad_values_are_schema_errors(self) -> None:
        with self.assertRaises(SchemaError):
            set_pipeline(_config(), interval_minutes=0)


class TestPersistence(unittest.TestCase):
    def test_save_load_round_trip(self) -> None:
        cfg = add_server(add_as(_config(), make_as("19-ffaa:1:abc", "10.0.0.5", "r")), make_server("19-ffaa:1:abc", "10.0.0.5", 30100, "b"))
        with tempfile.TemporaryDirectory() as d:
            path = Path(d) / "campaign.json"
            save_config(cfg, path)
            first = path.read_bytes()
            loaded = load_config(path)
            self.assertEqual(loaded, cfg)
            save_config(loaded, path)
            self.assertEqual(path.read_bytes(), first)

    def test_schema_error_names_field(self) -> None:
        with tempfile.TemporaryDirectory() as d:
            path = Path(d) / "campaign.json"
            path.write_text('{"local_as": "x", "storage_root": "data"}', encoding="utf-8")
            with self.assertRaises(SchemaError) as ctx:
                load_config(path)
            self.assertIn("local_as", ctx.exception.message)

    def test_unknown_key_rejected(self) -> None:
        with tempfile.TemporaryDirectory() as d:
            path = Path(d) / "campaign.json"
            path.write_text('{"local_as": "17-ffaa:0:1101", "storage_root": "data", "sead": 1}', encoding="utf-8")
            with self.assertRaises(SchemaError) as ctx:
                load_config(path)
            self.assertIn("sead", ctx.exception.message)

    def test_missing_file(self) -> None:
        with self.assertRaises(IoError):
            load_config(Path("/nonexistent/campaign.json"))

    def test_shipped_samples_validate(self) -> None:
        config_dir = Path(__file__).resolve().parents[1] / "config"
        cfg = load_config(config_dir / "campaign.sample.json")
        self.assertEqual(len(cfg.destinations()), 3)
        self.assertTrue(all(cfg.pipeline.is_enabled(c) for c in CATEGORIES))
        self.assertEqual(load_simspec(config_dir / "simspec.sample.json").seed, 42)


class TestCampaignForSim(unittest.TestCase):
    def test_shape(self) -> None:
        sim = build(SimSpec(seed=5))
        cfg = campaign_for_sim(sim, storage_root="data")
        self.assertEqual(cfg.local_as, sim.ases[0])
        self.assertEqual(cfg.remote_ases(), list(sim.ases[1:]))
        self.assertEqual([s.isd_as for s in cfg.servers], list(sim.ases[1:]))
        self.assertEqual(cfg.seed, 5)
        self.assertEqual(cfg.pipeline.paths_per_pair, 3)


if __name__ == "__main__":
    unittest.main()
