import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from curiolearn.aggvar import ModelStore, agg_var_insert
from curiolearn.classifier import LinearClassifier, TrainConfig, train
from curiolearn.dataset import IncrementBatch
from curiolearn.errors import NoModelError, ValidationError
from curiolearn.rehearsal import LabeledExample
from curiolearn.sampler import (
    StrategyConfig,
    combine_score,
    curiosity_score,
    select_objects,
    softmax_confidence,
)

from conftest import make_object


def store_with(centroids_by_class, dim=2, threshold=1e-9):
    """Store with verbatim centroids (threshold tiny so nothing merges)."""
    store = ModelStore(dim, threshold)
    for class_id, means in centroids_by_class.items():
        for mean in means:
            agg_var_insert(store, class_id, np.asarray(mean, float))
    return store


class TestCuriosityScore:
    def test_weight_one_reduces_to_mean_distance(self):
        store = store_with({0: [[0.0, 0.0]]})
        obj = make_object(1, 0, 0, [[2.0, 0.0], [4.0, 0.0]])
        s = curiosity_score(obj, store, distance_weight=1.0)
        assert s.mean_distance == 3.0
        assert s.score == 3.0

    def test_weight_zero_reduces_to_inverse_consistency(self):
        store = store_with({0: [[0.0, 0.0]]})
        obj = make_object(1, 0, 0, [[1.0, 0.0]] * 5)
        s = curiosity_score(obj, store, distance_weight=0.0)
        assert s.top_votes == 5
        assert s.score == 0.2

    def test_worked_example_7_15(self):
        # mean distance 10 with a 2-1 vote split at weight 0.7 -> 7.15
        store = store_with({0: [[0.0, 0.0]], 1: [[100.0, 0.0]]})
        obj = make_object(1, 0, 0, [[10.0, 0.0], [0.0, 10.0], [90.0, 0.0]])
        s = curiosity_score(obj, store, distance_weight=0.7)
        assert s.mean_distance == 10.0
        assert s.votes == {0: 2, 1: 1}
        assert s.top_votes == 2
        assert s.score == 7.15

    def test_votes_sum_to_view_count(self):
        store = store_with({0: [[0.0, 0.0]], 1: [[5.0, 5.0]], 2: [[-4.0, 3.0]]})
        rng = np.random.default_rng(0)
        obj = make_object(9, 0, 0, rng.normal(0, 4, size=(7, 2)))
        s = curiosity_score(obj, store, 0.7)
        assert sum(s.votes.values()) == 7
        assert s.top_votes == max(s.votes.values())

    @settings(max_examples=60, deadline=None)
    @given(
        weight=st.floats(0.0, 1.0, allow_nan=False),
        distances=st.lists(st.floats(0.0, 50.0, allow_nan=False), min_size=1, max_size=6),
        top_votes=st.integers(1, 6),
    )
    def test_combination_identity_is_exact(self, weight, distances, top_votes):
        # the decomposition is checked along the same arithmetic path:
        # recomputing the combination must reproduce the score bit for bit
        mean_distance = float(np.mean(distances))
        score = combine_score(weight, mean_distance, top_votes)
        recombined = weight * mean_distance + (1.0 - weight) * (1.0 / top_votes)
        assert score - recombined == 0.0

    def test_scored_object_satisfies_identity(self):
        store = store_with({0: [[0.0, 0.0]], 1: [[7.0, -3.0]]})
        rng = np.random.default_rng(1)
        for _ in range(20):
            obj = make_object(0, 0, 0, rng.normal(0, 5, size=(4, 2)))
            s = curiosity_score(obj, store, 0.7)
            assert s.score == combine_score(0.7, s.mean_distance, s.top_votes)

    def test_monotone_in_distance(self):
        store = store_with({0: [[0.0, 0.0]]})
        near = make_object(0, 0, 0, [[1.0, 0.0], [0.0, 1.0]])
        far = make_object(1, 0, 0, [[2.0, 0.0], [0.0, 2.0]])
        for weight in (0.1, 0.5, 1.0):
            assert curiosity_score(far, store, weight).score > \
                curiosity_score(near, store, weight).score

    def test_monotone_in_consistency(self):
        # same mean distance, unanimous vs split votes
        store = store_with({0: [[0.0, 0.0]], 1: [[10.0, 0.0]]})
        unanimous = make_object(0, 0, 0, [[3.0, 0.0], [-3.0, 0.0]])
        split = make_object(1, 0, 0, [[3.0, 0.0], [7.0, 0.0]])
        for weight in (0.0, 0.5, 0.9):
            s_u = curiosity_score(unanimous, store, weight)
            s_s = curiosity_score(split, store, weight)
            assert s_u.mean_distance == s_s.mean_distance == 3.0
            assert s_s.score > s_u.score

    def test_known_object_scores_below_novel_object(self):
        # views on top of learned centroids, unanimous, vs distant split views
        store = store_with({0: [[0.0, 0.0], [1.0, 0.0]], 1: [[40.0, 0.0]]})
        known = make_object(0, 0, 0, [[0.01, 0.0], [0.99, 0.0], [0.02, 0.0]])
        novel = make_object(1, 0, 0, [[20.0, 15.0], [25.0, -10.0], [18.0, 0.0]])
        s_known = curiosity_score(known, store, 0.7)
        s_novel = curiosity_score(novel, store, 0.7)
        assert s_known.top_votes == 3
        assert s_novel.score > s_known.score

    def test_empty_store_raises(self):
        obj = make_object(0, 0, 0, [[0.0, 0.0]])
        with pytest.raises(NoModelError):
            curiosity_score(obj, ModelStore(2, 1.0), 0.7)


class TestSoftmaxConfidence:
    def test_zero_parameter_classifier_gives_uniform(self):
        clf = LinearClassifier(np.zeros((10, 2)), np.zeros(10), list(range(10)))
        obj = make_object(0, 0, 0, [[1.0, 2.0], [-3.0, 4.0]])
        assert softmax_confidence(obj, clf) == pytest.approx(0.1)

    def test_mean_of_per_view_max_probs(self):
        # view gaps ln 9 and ln(7/3) give max probs 0.9 and 0.7 -> mean 0.8
        clf = LinearClassifier(np.array([[1.0], [0.0]]), np.zeros(2), [0, 1])
        views = [[math.log(9.0)], [math.log(7.0 / 3.0)]]
        obj = make_object(0, 0, 0, views)
        assert softmax_confidence(obj, clf) == pytest.approx(0.8, abs=1e-6)

    def test_unfamiliar_object_scores_lower(self):
        rng = np.random.default_rng(2)
        centers = np.array([[6.0, 0.0], [0.0, 6.0]])
        data = []
        for label, center in enumerate(centers):
            for point in center + 0.5 * rng.standard_normal((40, 2)):
                data.append(LabeledExample(point, label))
        clf = train(data, 2, TrainConfig(epochs=40, learning_rate=0.05))
        in_class = make_object(0, 0, 0, centers[0] + 0.3 * rng.standard_normal((4, 2)))
        boundary = np.array([3.0, 3.0])
        unfamiliar = make_object(1, 0, 0, boundary + 0.3 * rng.standard_normal((4, 2)))
        assert softmax_confidence(unfamiliar, clf) < softmax_confidence(in_class, clf)


class TestSelectObjects:
    def _batch(self, distances):
        objects = [make_object(i, 0, 0, [[d, 0.0]]) for i, d in enumerate(distances)]
        return IncrementBatch(0, objects)

    def test_budget_covering_batch_selects_all(self):
        batch = self._batch([1.0, 2.0, 3.0])
        store = store_with({0: [[0.0, 0.0]]})
        for kind in ("curiosity", "random"):
            cfg = StrategyConfig(kind=kind, budget=5)
            result = select_objects(batch, cfg, store, None, np.random.default_rng(0))
            assert sorted(result.selected_ids) == [0, 1, 2]

    def test_curiosity_takes_top_score(self):
        # weight 1 makes the score the raw distance; ids 0..4 at the
        # constructed score set {7.15, 0.2, 3.0, 5.0, 0.5}
        batch = self._batch([7.15, 0.2, 3.0, 5.0, 0.5])
        store = store_with({0: [[0.0, 0.0]]})
        cfg = StrategyConfig(kind="curiosity", distance_weight=1.0, budget=1)
        result = select_objects(batch, cfg, store, None, np.random.default_rng(0))
        assert result.selected_ids == [0]
        by_id = {s.object_id: s.score for s in result.scores}
        # views are float32, so the constructed 7.15 is correct to f32 ulp
        assert by_id[0] == pytest.approx(7.15, abs=1e-6)
        assert by_id[0] == max(by_id.values())

    def test_curiosity_top_k_ordering(self):
        batch = self._batch([1.0, 9.0, 4.0, 6.0])
        store = store_with({0: [[0.0, 0.0]]})
        cfg = StrategyConfig(kind="curiosity", distance_weight=1.0, budget=3)
        result = select_objects(batch, cfg, store, None, np.random.default_rng(0))
        assert result.selected_ids == [1, 3, 2]

    def test_tie_breaks_to_lower_object_id(self):
        batch = self._batch([4.0, 4.0, 4.0])
        store = store_with({0: [[0.0, 0.0]]})
        cfg = StrategyConfig(kind="curiosity", budget=2)
        result = select_objects(batch, cfg, store, None, np.random.default_rng(0))
        assert result.selected_ids == [0, 1]

    def test_random_deterministic_given_seed(self):
        batch = self._batch([1.0, 2.0, 3.0, 4.0, 5.0])
        store = store_with({0: [[0.0, 0.0]]})
        cfg = StrategyConfig(kind="random", budget=2)
        a = select_objects(batch, cfg, store, None, np.random.default_rng(3))
        b = select_objects(batch, cfg, store, None, np.random.default_rng(3))
        assert a.selected_ids == b.selected_ids

    def test_cold_start_falls_back_to_random(self):
        batch = self._batch([1.0, 2.0, 3.0])
        empty = ModelStore(2, 1.0)
        cur = select_objects(batch, StrategyConfig(kind="curiosity"), empty,
                             None, np.random.default_rng(4))
        soft = select_objects(batch, StrategyConfig(kind="softmax"),
                              store_with({0: [[0.0, 0.0]]}), None,
                              np.random.default_rng(4))
        assert cur.cold_start and soft.cold_start
        assert cur.selected_ids == soft.selected_ids  # same rng stream, paired

    def test_softmax_directions_are_opposite(self):
        rng = np.random.default_rng(5)
        clf = LinearClassifier(rng.standard_normal((3, 2)),
                               rng.standard_normal(3), [0, 1, 2])
        batch = IncrementBatch(0, [
            make_object(i, 0, 0, rng.normal(0, 2, size=(2, 2))) for i in range(4)
        ])
        store = store_with({0: [[0.0, 0.0]]})
        low = select_objects(batch, StrategyConfig(kind="softmax", softmax_direction="lowest"),
                             store, clf, np.random.default_rng(0))
        high = select_objects(batch, StrategyConfig(kind="softmax", softmax_direction="highest"),
                              store, clf, np.random.default_rng(0))
        confidences = low.confidences
        assert low.selected_ids[0] == min(confidences, key=lambda k: (confidences[k], k))
        assert high.selected_ids[0] == max(confidences, key=lambda k: (confidences[k], -k))
        if len(set(confidences.values())) == len(confidences):
            assert low.selected_ids[0] != high.selected_ids[0]

    def test_normalized_distances_rescale_to_unit_interval(self):
        batch = self._batch([2.0, 6.0, 10.0])
        store = store_with({0: [[0.0, 0.0]]})
        cfg = StrategyConfig(kind="curiosity", distance_weight=1.0, budget=1,
                             normalize_distances=True)
        result = select_objects(batch, cfg, store, None, np.random.default_rng(0))
        assert result.selected_ids == [1 + 1]  # farthest still wins
        scores = sorted(s.score for s in result.scores)
        assert scores == [0.0, 0.5, 1.0]

    def test_normalized_equal_distances_degenerate(self):
        batch = self._batch([5.0, 5.0])
        store = store_with({0: [[0.0, 0.0]]})
        cfg = StrategyConfig(kind="curiosity", distance_weight=0.6, budget=1,
                             normalize_distances=True)
        result = select_objects(batch, cfg, store, None, np.random.default_rng(0))
        for s in result.scores:
            assert s.score == combine_score(0.6, 0.0, s.top_votes)

    def test_selection_always_subset_without_duplicates(self):
        rng = np.random.default_rng(6)
        store = store_with({0: [[0.0, 0.0]], 1: [[4.0, 4.0]]})
        for trial in range(20):
            n = int(rng.integers(1, 7))
            batch = IncrementBatch(0, [
                make_object(i, 0, 0, rng.normal(0, 3, size=(2, 2))) for i in range(n)
            ])
            kind = ("curiosity", "random")[trial % 2]
            cfg = StrategyConfig(kind=kind, budget=int(rng.integers(1, 8)))
            result = select_objects(batch, cfg, store, None,
                                    np.random.default_rng(trial))
            assert len(result.selected_ids) == min(cfg.budget, n)
            assert len(set(result.selected_ids)) == len(result.selected_ids)
            assert set(result.selected_ids) <= {o.object_id for o in batch.candidates}

    def test_empty_batch_rejected(self):
        with pytest.raises(ValidationError):
            select_objects(IncrementBatch(0, []), StrategyConfig(),
                           ModelStore(2, 1.0), None, np.random.default_rng(0))

    def test_invalid_strategy_rejected(self):
        batch = self._batch([1.0])
        with pytest.raises(ValidationError):
            select_objects(batch, StrategyConfig(kind="entropy"),
                           ModelStore(2, 1.0), None, np.random.default_rng(0))
