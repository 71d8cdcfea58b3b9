import numpy as np
import pytest

from tacit.engine import SimLog, run
from tacit.metrics import (
    ate,
    cascade_stats,
    ccdf,
    disparity_ratio,
    iwcib,
    iwcib_all,
    misinfo_read_series,
    utterances_per_claim,
)

from _oracles import brute_structural_virality
from conftest import build_graph, build_world


def make_log(num_comms=1, num_topics=2):
    return SimLog(num_communities=num_comms, num_topics=num_topics)


def add_tree(log, edges, claim=0, root_author=0):
    """Build a cascade from (parent_index, author) pairs; index 0 is the root."""
    ids = [log.append_utterance(claim, root_author, 0, parent=-1, depth=0)]
    for parent_idx, author in edges:
        parent = ids[parent_idx]
        ids.append(
            log.append_utterance(claim, author, log.utt_t[parent] + 1, parent, log.utt_depth[parent] + 1)
        )
    return ids


class TestIwcib:
    def test_hand_value(self):
        got = iwcib([0.5, 0.5], [0.4, 0.55], [0.8, 0.2])
        assert got == pytest.approx(-0.07, abs=1e-12)

    def test_zero_delta(self):
        assert iwcib([0.3, 0.9], [0.3, 0.9], [0.5, 0.5]) == 0.0

    def test_single_topic_is_plain_delta(self):
        assert iwcib([0.8], [0.6], [0.37]) == pytest.approx(-0.2, abs=1e-12)

    def test_zero_impactedness_rejected(self):
        with pytest.raises(ValueError, match="zero"):
            iwcib([0.5, 0.5], [0.4, 0.4], [0.0, 0.0])

    def test_vectorized_matches_scalar(self):
        rng = np.random.default_rng(0)
        start = rng.random((50, 3))
        end = rng.random((50, 3))
        imp = rng.random((50, 3)) + 0.01
        got = iwcib_all(start, end, imp)
        for j in range(50):
            assert got[j] == pytest.approx(iwcib(start[j], end[j], imp[j]), abs=1e-12)

    def test_weights_sum_to_one(self):
        imp = np.array([[0.2, 0.6], [1.0, 1.0]])
        weights = imp / imp.sum(axis=1, keepdims=True)
        np.testing.assert_allclose(weights.sum(axis=1), 1.0)


class TestAte:
    def test_identical_maps_zero(self):
        outcome = {0: -0.1, 1: 0.2}
        assert ate(outcome, outcome, [0, 1]) == 0.0

    def test_mean_of_differences(self):
        m1 = {0: -0.02, 1: -0.04}
        m0 = {0: 0.0, 1: 0.0}
        assert ate(m1, m0, [0, 1]) == pytest.approx(-0.03)

    def test_missing_member_rejected(self):
        with pytest.raises(ValueError, match="missing"):
            ate({0: 1.0}, {0: 1.0, 1: 1.0}, [0, 1])

    def test_disparity_ratio_hand_value(self):
        assert disparity_ratio(-0.024, -0.018) == pytest.approx(1.3333, abs=1e-3)

    def test_disparity_zero_minority(self):
        assert disparity_ratio(-0.01, 0.0) == float("inf")


class TestCascadeStats:
    def test_lonely_root(self):
        log = make_log()
        add_tree(log, [])
        (stats,) = cascade_stats(log)
        assert (stats.depth, stats.max_breadth, stats.size) == (0, 1, 1)
        assert stats.structural_virality == 0.0
        assert stats.unique_readers == 0

    def test_two_retweets_at_depth_one(self):
        log = make_log()
        add_tree(log, [(0, 1), (0, 2)])
        (stats,) = cascade_stats(log)
        assert stats.depth == 1
        assert stats.max_breadth == 2
        assert stats.size == 3

    def test_path_structural_virality(self):
        log = make_log()
        add_tree(log, [(0, 1), (1, 2)])
        (stats,) = cascade_stats(log)
        assert stats.structural_virality == pytest.approx(4 / 3)

    def test_unique_readers_distinct(self):
        log = make_log()
        ids = add_tree(log, [(0, 1)])
        for node, uid in ((5, ids[0]), (5, ids[1]), (6, ids[1])):
            log.read_node.append(node)
            log.read_utt.append(uid)
            log.read_t.append(2)
        (stats,) = cascade_stats(log)
        assert stats.unique_readers == 2

    @pytest.mark.parametrize("seed", range(4))
    def test_structural_virality_matches_brute_force(self, seed):
        rng = np.random.default_rng(seed)
        log = make_log()
        n = int(rng.integers(2, 11))
        edges = [(int(rng.integers(0, i)), int(rng.integers(0, 5))) for i in range(1, n)]
        ids = add_tree(log, edges)
        (stats,) = cascade_stats(log)
        parents = {uid: (None if log.utt_parent[uid] < 0 else log.utt_parent[uid]) for uid in ids}
        assert stats.structural_virality == pytest.approx(brute_structural_virality(parents), abs=1e-12)

    def test_multiple_cascades_split_correctly(self):
        log = make_log()
        add_tree(log, [(0, 1)], claim=3)
        add_tree(log, [], claim=4)
        stats = cascade_stats(log)
        assert len(stats) == 2
        assert sorted(s.claim_id for s in stats) == [3, 4]

    def test_utterances_per_claim_counts_roots_only(self):
        log = make_log()
        add_tree(log, [(0, 1), (0, 2)], claim=1)
        add_tree(log, [], claim=1)
        counts = utterances_per_claim(log, num_claims=3)
        assert counts.tolist() == [0, 2, 0]


class TestCcdf:
    def test_hand_values(self):
        points = dict(ccdf([1, 2, 3]))
        assert points[2.0] == pytest.approx(2 / 3)
        assert points[1.0] == 1.0

    def test_constant_sample(self):
        assert ccdf([5, 5, 5]) == [(5.0, 1.0)]

    def test_monotone_non_increasing(self):
        rng = np.random.default_rng(1)
        points = ccdf(rng.integers(0, 20, size=200))
        ps = [p for _, p in points]
        assert all(a >= b for a, b in zip(ps, ps[1:]))
        assert ps[0] == 1.0

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            ccdf([])


class TestMisinfoSeries:
    def test_single_event_steps_by_one_over_community_size(self):
        # majority community has 3 nodes; one misinfo read at t=3
        g = build_graph([], 5, communities=[0, 0, 0, 1, 1])
        log = SimLog(num_communities=2, num_topics=2)
        for t in range(5):
            mat = np.zeros((2, 2), dtype=np.int64)
            if t == 3:
                mat[0, 0] = 1
            log.misinfo_by_step.append(mat)
        series = misinfo_read_series(log, g)
        np.testing.assert_allclose(series[0, 0], [0, 0, 0, 1 / 3, 1 / 3])
        assert np.all(series[1] == 0)

    def test_cumulative_non_decreasing(self):
        w = build_world(
            [(a, b) for a in range(10) for b in range(10) if a != b and (a + b) % 2],
            10, seed=1, wake_prob=1.0, community_belief=[[0.8, 0.8]],
        )
        run(w, 10)
        series = misinfo_read_series(w.log, w.graph)
        assert np.all(np.diff(series, axis=-1) >= 0)

    def test_engine_counters_match_log_replay(self):
        # counters accumulated in-step equal a recount from raw events
        w = build_world(
            [(a, b) for a in range(10) for b in range(10) if a != b and (a + b) % 2],
            10, seed=2, wake_prob=1.0, community_belief=[[0.8, 0.8]],
        )
        run(w, 8)
        log = w.log
        recount = np.zeros((1, 2, 8))
        for i in range(log.num_reads):
            cid = log.utt_claim[log.read_utt[i]]
            claim = w.claims[cid]
            if claim.veracity == 1:
                recount[0, claim.topic, log.read_t[i]] += 1
        got = np.stack(log.misinfo_by_step, axis=-1)
        np.testing.assert_array_equal(got, recount)
