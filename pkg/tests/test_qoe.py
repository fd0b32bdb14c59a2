import random
import unittest

from pathml.bench.qoe import (
    PROFILES,
    Candidate,
    QoeProfile,
    QoeWeights,
    profile_by_name,
    qoe_score,
    qoe_scores,
    recommend,
    satisfied,
)
from pathml.domain.errors import InvalidParams, NoCandidates


def _meets(c: Candidate, p: QoeProfile) -> bool:
    return c.rtt_ms <= p.max_rtt_ms and c.loss_pct <= p.max_loss_pct and c.bw_mbps >= p.min_bw_mbps


def _brute_top(candidates: list[Candidate], w: QoeWeights) -> Candidate:
    def norm(values: list[float]) -> list[float]:
        lo, hi = min(values), max(values)
        return [0.5] * len(values) if hi == lo else [(v - lo) / (hi - lo) for v in values]

    rtt = norm([c.rtt_ms for c in candidates])
    loss = norm([c.loss_pct for c in candidates])
    bw = norm([c.bw_mbps for c in candidates])
    best, best_score = 0, None
    for i in range(len(candidates)):
        score = w.w_rtt * (1.0 - rtt[i]) + w.w_loss * (1.0 - loss[i]) + w.w_bw * bw[i]
        if best_score is None or score > best_score:
            best, best_score = i, score
    return candidates[best]


def _random_candidates(rng: random.Random, n: int) -> list[Candidate]:
    edges_rtt = [p.max_rtt_ms for p in PROFILES]
    edges_loss = [p.max_loss_pct for p in PROFILES]
    edges_bw = [p.min_bw_mbps for p in PROFILES]
    out = []
    for i in range(n):
        rtt = rng.choice(edges_rtt) if rng.random() < 0.1 else rng.uniform(5.0, 600.0)
        loss = rng.choice(edges_loss) if rng.random() < 0.1 else rng.choice([0.0, rng.uniform(0.0, 8.0)])
        bw = rng.choice(edges_bw) if rng.random() < 0.1 else rng.uniform(0.0, 200.0)
        out.append(Candidate(key=f"p{i}", rtt_ms=rtt, loss_pct=loss, bw_mbps=bw))
    return out


class QoeProfileTests(unittest.TestCase):
    def test_profiles_match_reference_table(self) -> None:
        table = {p.name: (p.max_rtt_ms, p.max_loss_pct, p.min_bw_mbps) for p in PROFILES}
        self.assertEqual(
            table,
            {
                "video_conference": (150.0, 2.0, 1.0),
                "online_gaming": (50.0, 1.0, 0.5),
                "file_transfer": (500.0, 5.0, 10.0),
                "browsing": (300.0, 3.0, 0.1),
                "streaming": (200.0, 1.0, 5.0),
            },
        )
        self.assertEqual(profile_by_name("online_gaming").max_rtt_ms, 50.0)
        with self.assertRaises(InvalidParams):
            profile_by_name("voip")

    def test_thresholds_must_be_positive(self) -> None:
        with self.assertRaises(InvalidParams):
            QoeProfile("bad", 50.0, 0.0, 1.0)

    def test_weights_are_normalized(self) -> None:
        w = QoeWeights(2.0, 1.0, 1.0)
        self.assertAlmostEqual(w.w_rtt, 0.5)
        self.assertAlmostEqual(w.w_loss + w.w_bw, 0.5)
        parsed = QoeWeights.parse("4, 2, 4")
        self.assertAlmostEqual(parsed.w_rtt + parsed.w_loss + parsed.w_bw, 1.0)
        self.assertAlmostEqual(parsed.w_loss, 0.2)
        for bad in ("1,2", "a,b,c", "0,0,0", "-1,1,1"):
            with self.subTest(bad=bad), self.assertRaises(InvalidParams):
                QoeWeights.parse(bad)


class QoeScoringTests(unittest.TestCase):
    def test_bandwidth_heavy_example(self) -> None:
        a = Candidate("A", rtt_ms=100.0, loss_pct=0.0, bw_mbps=10.0)
        b = Candidate("B", rtt_ms=40.0, loss_pct=0.0, bw_mbps=2.0)
        gaming = profile_by_name("online_gaming")
        ranked = recommend([a, b])
        # 两者都是 0.5：A 的带宽分抵消了 RTT 分，同分保持输入顺序。
        self.assertEqual([r.candidate.key for r in ranked], ["A", "B"])
        self.assertAlmostEqual(ranked[0].score, 0.5)
        self.assertAlmostEqual(ranked[1].score, 0.5)
        self.assertFalse(satisfied(ranked[0].candidate, gaming))
        self.assertEqual([c.key for c in (a, b) if _meets(c, gaming)], ["B"])

    def test_single_candidate_is_judged_on_thresholds_only(self) -> None:
        only = Candidate("only", rtt_ms=20.0, loss_pct=0.1, bw_mbps=50.0)
        for w in (QoeWeights(), QoeWeights(1, 0, 0), QoeWeights(0, 0, 1)):
            top = recommend([only], w)[0]
            self.assertEqual(top.candidate, only)
            self.assertAlmostEqual(top.score, 0.5)
            self.assertTrue(all(satisfied(top.candidate, p) for p in PROFILES))

    def test_constant_metric_normalizes_to_half(self) -> None:
        cands = [Candidate("x", 10.0, 1.0, 5.0), Candidate("y", 30.0, 1.0, 5.0)]
        scores = qoe_scores(cands)
        self.assertAlmostEqual(scores[0], 0.4 + 0.1 + 0.2)
        self.assertAlmostEqual(scores[1], 0.0 + 0.1 + 0.2)
        self.assertAlmostEqual(qoe_score(cands[1], cands), scores[1])

    def test_scores_stay_in_unit_interval(self) -> None:
        rng = random.Random(3)
        for _ in range(500):
            scores = qoe_scores(_random_candidates(rng, rng.randint(1, 8)))
            self.assertTrue(((scores >= -1e-12) & (scores <= 1 + 1e-12)).all())

    def test_no_candidates(self) -> None:
        with self.assertRaises(NoCandidates):
            recommend([])

    def test_satisfaction_matches_brute_force_checker(self) -> None:
        rng = random.Random(20250101)
        weights = [QoeWeights(), QoeWeights(1, 1, 1), QoeWeights(0.7, 0.1, 0.2)]
        for trial in range(10_000):
            cands = _random_candidates(rng, rng.randint(1, 6))
            w = weights[trial % len(weights)]
            top = recommend(cands, w)[0].candidate
            self.assertEqual(top.key, _brute_top(cands, w).key)
            for profile in PROFILES:
                self.assertEqual(satisfied(top, profile), _meets(top, profile), (trial, profile.name, top))

    def test_relaxing_thresholds_never_breaks_satisfaction(self) -> None:
        rng = random.Random(11)
        for _ in range(2_000):
            top = recommend(_random_candidates(rng, rng.randint(1, 6)))[0].candidate
            for profile in PROFILES:
                relaxed = profile.relaxed(
                    rtt_ms=rng.uniform(0, 100), loss_pct=rng.uniform(0, 2), bw_mbps=rng.uniform(0, profile.min_bw_mbps)
                )
                if satisfied(top, profile):
                    self.assertTrue(satisfied(top, relaxed))

    def test_dominated_candidate_inside_envelope_keeps_top(self) -> None:
        rng = random.Random(5)
        for _ in range(2_000):
            cands = _random_candidates(rng, rng.randint(2, 6))
            top = recommend(cands)[0].candidate
            worst_rtt = max(c.rtt_ms for c in cands)
            worst_loss = max(c.loss_pct for c in cands)
            worst_bw = min(c.bw_mbps for c in cands)
            extra = Candidate(
                "dominated",
                rtt_ms=rng.uniform(top.rtt_ms, worst_rtt),
                loss_pct=rng.uniform(top.loss_pct, worst_loss),
                bw_mbps=rng.uniform(worst_bw, top.bw_mbps),
            )
            self.assertEqual(recommend([*cands, extra])[0].candidate.key, top.key)


if __name__ == "__main__":
    unittest.main()
