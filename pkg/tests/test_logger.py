import unittest

from pathml.logger import get_logger, reset_cycle_id, set_cycle_id


class TestCycleId(unittest.TestCase):
    def setUp(self) -> None:
        self.logger = get_logger()
        self.seen: list[str] = []
        self.sink = self.logger.add(lambda m: self.seen.append(m.record["extra"]["cycle_id"]), level="DEBUG")

    def tearDown(self) -> None:
        self.logger.remove(self.sink)

    def test_context_cycle_id_is_used(self) -> None:
        token = set_cycle_id("20250101T000000Z")
        try:
            get_logger().bind(category="ping").warning("inside")
        finally:
            reset_cycle_id(token)
        self.assertEqual(self.seen, ["20250101T000000Z"])

    def test_outside_cycle_is_dash(self) -> None:
        get_logger().info("outside")
        self.assertEqual(self.seen, ["-"])

    def test_explicit_binding_wins(self) -> None:
        token = set_cycle_id("20250101T000000Z")
        try:
            get_logger().bind(cycle_id="20250101T001500Z").info("bound")
        finally:
            reset_cycle_id(token)
        self.assertEqual(self.seen, ["20250101T001500Z"])


if __name__ == "__main__":
    unittest.main()
