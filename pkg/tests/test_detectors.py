import math

import numpy as np
import pytest

from gcad.detectors import (
    IDK,
    LOF,
    DetectorConfig,
    IForest,
    ScoreVector,
    _idk_scores,
    idk_fit_score,
    iforest_score,
    lof_score,
    run_detector,
)
from gcad.errors import ConfigError


def naive_lof(X, k):
    """Quadratic reference LOF: literal definitions, plain Python loops."""
    n = len(X)
    cap = 1e12
    dist = [[math.dist(X[i], X[j]) for j in range(n)] for i in range(n)]
    kdist = []
    for i in range(n):
        others = sorted(dist[i][j] for j in range(n) if j != i)
        kdist.append(others[k - 1])
    neigh = [[j for j in range(n) if j != i and dist[i][j] <= kdist[i]]
             for i in range(n)]
    lrd = []
    for i in range(n):
        s = sum(max(kdist[j], dist[i][j]) for j in neigh[i])
        lrd.append(min(len(neigh[i]) / s, cap) if s > 0 else cap)
    return np.array([
        sum(lrd[j] for j in neigh[i]) / len(neigh[i]) / lrd[i]
        for i in range(n)
    ])


class TestIDK:
    def test_hand_example_forced_samples(self):
        X = np.array([[0.0], [1.0], [10.0]])
        scores = _idk_scores(X, np.array([[0, 2]]))
        assert np.allclose(scores, [1 / 3, 1 / 3, 2 / 3], atol=0)

    def test_psi_equals_n_uniform(self):
        X = np.arange(6, dtype=float)[:, None]
        det = IDK(psi=6, t=1, seed=0).fit(X)
        assert np.allclose(det.decision_scores_, 1 - 1 / 6, atol=0)

    def test_identical_rows_equal_scores(self):
        det = IDK(psi=3, t=20, seed=1).fit(np.ones((8, 2)))
        assert len(np.unique(det.decision_scores_)) == 1

    def test_psi_too_large(self):
        with pytest.raises(ConfigError, match="psi"):
            IDK(psi=10, t=5, seed=0).fit(np.zeros((4, 1)))

    def test_scores_in_unit_interval(self, rng):
        X = rng.normal(size=(60, 3))
        s = IDK(psi=8, t=50, seed=2).fit(X).decision_scores_
        assert np.all(s >= 0.0) and np.all(s <= 1.0)

    def test_partition_masses_sum_to_covered(self, rng):
        from gcad.detectors import _idk_partition
        X = rng.normal(size=(40, 2))
        samples = np.random.default_rng(0).choice(40, size=8, replace=False)
        assign, covered, counts = _idk_partition(X, samples)
        assert counts.sum() == covered.sum() <= 40
        # samples always cover themselves
        assert covered[samples].all()

    def test_monotonicity_fixed_partitionings(self):
        # moving the last point farther out never improves its rank
        base = np.array([[0.0], [0.5], [1.0], [1.5], [2.0], [2.5]])
        samples = np.array([[0, 2], [1, 3], [2, 4]])
        prev_rank = None
        for far in (3.0, 5.0, 9.0, 20.0):
            X = np.vstack([base, [[far]]])
            s = _idk_scores(X, samples)
            rank = int((s > s[-1]).sum())  # points strictly above the moved one
            if prev_rank is not None:
                assert rank <= prev_rank
            prev_rank = rank

    def test_outlier_scores_highest(self, rng):
        X = np.vstack([rng.normal(size=(100, 2)), [[25.0, 25.0]]])
        s = IDK(psi=8, t=100, seed=3).fit(X).decision_scores_
        assert s.argmax() == 100

    def test_seed_determinism(self, rng):
        X = rng.normal(size=(50, 4))
        a = IDK(psi=4, t=30, seed=7).fit(X).decision_scores_
        b = IDK(psi=4, t=30, seed=7).fit(X).decision_scores_
        assert np.array_equal(a, b)

    def test_scale_invariance_exact(self, rng):
        X = rng.normal(size=(50, 3))
        a = IDK(psi=8, t=40, seed=5).fit(X).decision_scores_
        b = IDK(psi=8, t=40, seed=5).fit(4.0 * X).decision_scores_
        assert np.array_equal(a, b)


class TestLOF:
    def test_grid_outlier_max(self):
        xx, yy = np.meshgrid(np.arange(5.0), np.arange(5.0))
        X = np.vstack([np.stack([xx.ravel(), yy.ravel()], axis=1), [[30.0, 30.0]]])
        s = LOF(k=3).fit(X).decision_scores_
        assert s.argmax() == 25

    def test_all_identical_scores_one(self):
        s = LOF(k=2).fit(np.ones((10, 3))).decision_scores_
        assert np.allclose(s, 1.0, atol=0)

    def test_two_clusters_midpoint(self, rng):
        a = rng.normal(0, 0.05, size=(10, 2))
        b = rng.normal(0, 0.05, size=(10, 2)) + [10.0, 0.0]
        mid = np.array([[5.0, 0.0]])
        X = np.vstack([a, b, mid])
        s = LOF(k=3).fit(X).decision_scores_
        assert s[20] > s[:20].max()
        assert np.allclose(s, naive_lof(X, 3), atol=1e-9)

    def test_naive_oracle_equivalence(self, rng):
        for n, d, k in ((20, 2, 3), (75, 3, 5), (200, 2, 20)):
            X = rng.normal(size=(n, d))
            assert np.allclose(LOF(k=k).fit(X).decision_scores_,
                               naive_lof(X, k), atol=1e-9)

    def test_oracle_with_duplicates(self, rng):
        X = np.vstack([np.zeros((5, 2)), rng.normal(size=(10, 2))])
        assert np.allclose(LOF(k=3).fit(X).decision_scores_,
                           naive_lof(X, 3), atol=1e-9)

    def test_k_bounds(self):
        with pytest.raises(ConfigError):
            LOF(k=5).fit(np.zeros((5, 1)))

    def test_scale_invariance_exact(self, rng):
        X = rng.normal(size=(40, 2))
        a = LOF(k=4).fit(X).decision_scores_
        b = LOF(k=4).fit(4.0 * X).decision_scores_
        assert np.array_equal(a, b)


class TestIForest:
    def test_repeated_point_equal_scores(self):
        s = IForest(trees=20, subsample=16, seed=0).fit(np.ones((30, 2))).decision_scores_
        assert len(np.unique(s)) == 1

    def test_far_point_max_over_seeds(self):
        X = np.concatenate([np.arange(100.0), [1000.0]])[:, None]
        for seed in range(5):
            s = IForest(trees=100, subsample=64, seed=seed).fit(X).decision_scores_
            assert s.argmax() == 100

    def test_score_range(self, rng):
        X = rng.normal(size=(80, 3))
        s = IForest(trees=50, subsample=32, seed=1).fit(X).decision_scores_
        assert np.all(s > 0.0) and np.all(s <= 1.0)

    def test_seed_determinism(self, rng):
        X = rng.normal(size=(60, 2))
        a = IForest(trees=30, subsample=32, seed=9).fit(X).decision_scores_
        b = IForest(trees=30, subsample=32, seed=9).fit(X).decision_scores_
        assert np.array_equal(a, b)

    def test_scale_invariant_ranking_fixed_seed(self, rng):
        X = rng.normal(size=(60, 2))
        a = IForest(trees=30, subsample=32, seed=4).fit(X).decision_scores_
        b = IForest(trees=30, subsample=32, seed=4).fit(4.0 * X).decision_scores_
        assert np.array_equal(np.argsort(a), np.argsort(b))

    def test_subsample_clipped_to_n(self, rng):
        X = rng.normal(size=(20, 2))
        s = IForest(trees=10, subsample=256, seed=0).fit(X).decision_scores_
        assert len(s) == 20


class TestDispatch:
    def test_idk_dispatch(self, rng):
        X = rng.normal(size=(30, 2))
        cfg = DetectorConfig(kind="idk", psi=4, t=10, seed=3)
        assert np.array_equal(run_detector(X, cfg).values,
                              idk_fit_score(X, cfg).values)

    def test_lof_dispatch(self, rng):
        X = rng.normal(size=(30, 2))
        cfg = DetectorConfig(kind="lof", lof_k=5)
        assert np.array_equal(run_detector(X, cfg).values, lof_score(X, cfg).values)

    def test_iforest_dispatch(self, rng):
        X = rng.normal(size=(30, 2))
        cfg = DetectorConfig(kind="iforest", trees=20, subsample=16, seed=2)
        assert np.array_equal(run_detector(X, cfg).values,
                              iforest_score(X, cfg).values)

    def test_determinism_across_kinds(self, rng):
        X = rng.normal(size=(40, 3))
        for kind in ("idk", "lof", "iforest"):
            cfg = DetectorConfig(kind=kind, psi=4, t=20, lof_k=4, trees=20,
                                 subsample=16, seed=11)
            assert np.array_equal(run_detector(X, cfg).values,
                                  run_detector(X, cfg).values)

    def test_unknown_kind(self):
        with pytest.raises(ConfigError, match="unknown detector kind"):
            DetectorConfig(kind="svm")

    def test_config_bounds(self):
        with pytest.raises(ConfigError):
            DetectorConfig(psi=1)
        with pytest.raises(ConfigError):
            DetectorConfig(t=0)
        with pytest.raises(ConfigError):
            DetectorConfig(subsample=1)

    def test_score_vector_finite(self):
        with pytest.raises(ValueError):
            ScoreVector(values=np.array([1.0, np.inf]), kind="idk")
