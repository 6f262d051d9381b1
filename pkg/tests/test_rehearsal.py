import numpy as np

from curiolearn.aggvar import Centroid, ModelStore, agg_var_insert, class_statistics
from curiolearn.rehearsal import (
    PSEUDO,
    build_rehearsal_set,
    sample_pseudo_exemplars,
)


def make_centroid(mean, variance, count):
    mean = np.asarray(mean, dtype=float)
    variance = np.asarray(variance, dtype=float)
    return Centroid(mean, variance * (count - 1), count)


class TestSamplePseudoExemplars:
    def test_count_matches_centroid(self):
        c = make_centroid([0.0, 1.0], [1.0, 2.0], 3)
        draws = sample_pseudo_exemplars(c, np.random.default_rng(0))
        assert len(draws) == 3
        assert all(d.shape == (2,) for d in draws)

    def test_zero_variance_reproduces_mean_exactly(self):
        c = Centroid(np.array([4.0, -2.0]), np.zeros(2), 5)
        for draw in sample_pseudo_exemplars(c, np.random.default_rng(1)):
            np.testing.assert_array_equal(draw, [4.0, -2.0])

    def test_single_sample_centroid_emits_itself(self):
        c = Centroid(np.array([1.5]), np.zeros(1), 1)
        draws = sample_pseudo_exemplars(c, np.random.default_rng(2))
        assert len(draws) == 1
        np.testing.assert_array_equal(draws[0], [1.5])

    def test_mixed_zero_and_positive_variance_dimensions(self):
        c = make_centroid([0.0, 7.0], [4.0, 0.0], 100)
        draws = np.stack(sample_pseudo_exemplars(c, np.random.default_rng(3)))
        assert np.all(draws[:, 1] == 7.0)
        assert np.std(draws[:, 0]) > 0.5

    def test_empirical_moments(self):
        # oracle: sample statistics of the draws vs the stored parameters
        mean = np.array([2.0, -1.0])
        variance = np.array([4.0, 1.0])
        n = 10_000
        c = make_centroid(mean, variance, n)
        draws = np.stack(sample_pseudo_exemplars(c, np.random.default_rng(4)))
        assert draws.shape == (n, 2)
        tol_mean = 3.0 * np.sqrt(variance) / np.sqrt(n)
        assert np.all(np.abs(draws.mean(axis=0) - mean) < tol_mean)
        emp_var = draws.var(axis=0, ddof=1)
        assert np.all(np.abs(emp_var - variance) < 0.05 * variance)

    def test_deterministic_given_rng_state(self):
        c = make_centroid([0.0], [1.0], 4)
        a = np.stack(sample_pseudo_exemplars(c, np.random.default_rng(9)))
        b = np.stack(sample_pseudo_exemplars(c, np.random.default_rng(9)))
        np.testing.assert_array_equal(a, b)


class TestBuildRehearsalSet:
    def test_empty_store(self):
        assert build_rehearsal_set(ModelStore(2, 1.0), np.random.default_rng(0)) == []

    def test_per_class_count_equals_total(self):
        # one class, two centroids with counts 3 and 2 -> 5 pseudo-exemplars
        store = ModelStore(1, 0.5)
        for value in (0.0, 0.1, -0.1, 10.0, 10.1):
            agg_var_insert(store, 7, [value])
        assert [c.count for c in store.models[7].centroids] == [3, 2]
        examples = build_rehearsal_set(store, np.random.default_rng(0))
        assert len(examples) == 5
        assert all(ex.label == 7 for ex in examples)
        assert all(ex.provenance == PSEUDO for ex in examples)

    def test_counts_match_class_statistics(self):
        rng = np.random.default_rng(1)
        store = ModelStore(4, 1.0)
        for _ in range(200):
            agg_var_insert(store, int(rng.integers(0, 10)), rng.normal(size=4))
        examples = build_rehearsal_set(store, np.random.default_rng(2))
        per_class = {}
        for ex in examples:
            per_class[ex.label] = per_class.get(ex.label, 0) + 1
        assert per_class == {cid: total for cid, _, total in class_statistics(store)}

    def test_deterministic_given_seed(self):
        rng = np.random.default_rng(3)
        store = ModelStore(2, 2.0)
        for _ in range(30):
            agg_var_insert(store, int(rng.integers(0, 2)), rng.normal(size=2))
        a = build_rehearsal_set(store, np.random.default_rng(5))
        b = build_rehearsal_set(store, np.random.default_rng(5))
        assert len(a) == len(b)
        for ex_a, ex_b in zip(a, b):
            assert ex_a.label == ex_b.label
            np.testing.assert_array_equal(ex_a.features, ex_b.features)
