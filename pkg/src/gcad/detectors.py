"""Point anomaly detectors over embedded vectors.

All detectors share one convention: ``fit(X)`` learns from the n rows of
X and ``decision_function(X)`` returns one score per row with *higher =
more anomalous*. Scores on the training rows are also stored as
``decision_scores_`` at fit time, which is the only surface the pipeline
needs (the task is outlier ranking on the data itself, not novelty
detection).

Three detectors are provided:

* :class:`IDK` - the Isolation Distributional Kernel, the default. Each
  of t rounds draws psi rows; every row is assigned to the cell of its
  nearest sample, but only if it lies within that sample's coverage ball
  (radius = the sample's distance to its nearest fellow sample). A row's
  similarity to the data distribution is the average mass of the cells
  it falls in (zero when uncovered), and its anomaly score is one minus
  that. The coverage cutoff is what lets sparse points score high even
  when the sample set never lands near them.
* :class:`LOF` - classic Local Outlier Factor, density ratio against the
  k-distance neighbourhood.
* :class:`IForest` - isolation forest, delegated to scikit-learn with
  scores mapped back to the conventional 2^(-depth/c(n)) form.

Adding another detector (e.g. a one-class SVM) means implementing the
same two methods plus a ``kind`` entry in :func:`build_detector`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist
from sklearn.base import BaseEstimator
from sklearn.ensemble import IsolationForest

from .errors import ConfigError

__all__ = [
    "DetectorConfig",
    "ScoreVector",
    "IDK",
    "LOF",
    "IForest",
    "build_detector",
    "run_detector",
    "idk_fit_score",
    "lof_score",
    "iforest_score",
]

DETECTOR_KINDS = ("idk", "lof", "iforest")

# lrd of a point whose reachability sum is exactly zero (>= k duplicates)
_LRD_CAP = 1e12


@dataclass
class DetectorConfig:
    """Configuration for the pluggable point anomaly detector.

    ``kind`` selects the detector; the remaining fields parameterize the
    respective detectors and are ignored by the others.
    """

    kind: str = "idk"
    psi: int = 8
    t: int = 100
    lof_k: int = 20
    trees: int = 100
    subsample: int = 256
    seed: int | None = None

    def __post_init__(self):
        if self.kind not in DETECTOR_KINDS:
            raise ConfigError(f"unknown detector kind {self.kind!r}, expected one of {DETECTOR_KINDS}")
        if self.psi < 2:
            raise ConfigError("psi must be >= 2")
        if self.t < 1:
            raise ConfigError("t must be >= 1")
        if self.lof_k < 1:
            raise ConfigError("lof_k must be >= 1")
        if self.trees < 1:
            raise ConfigError("trees must be >= 1")
        if self.subsample < 2:
            raise ConfigError("subsample must be >= 2")


@dataclass
class ScoreVector:
    """Per-node anomaly scores (higher = more anomalous) plus provenance."""

    values: np.ndarray
    kind: str
    seed: int | None = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64).ravel()
        if not np.all(np.isfinite(self.values)):
            raise ValueError("scores must be finite")

    def __len__(self) -> int:
        return len(self.values)


def _as_matrix(X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2 or X.shape[0] < 1:
        raise ValueError("X must be a non-empty 2-D array")
    if not np.all(np.isfinite(X)):
        raise ValueError("X must be finite")
    return X


def _idk_partition(X: np.ndarray, samples: np.ndarray):
    """Cell structure of one partitioning given the sampled rows.

    Every row is assigned to its nearest sampled row (Euclidean; ties to
    the lowest sample position) and counts as covered when it lies
    within that sample's ball, whose radius is the distance from the
    sample to its nearest other sample. Returns (assign, covered,
    counts) where counts holds covered rows per cell.
    """
    dist = cdist(X, X[samples])
    assign = np.argmin(dist, axis=1)
    inter = cdist(X[samples], X[samples])
    np.fill_diagonal(inter, np.inf)
    radius = inter.min(axis=1)
    covered = dist[np.arange(X.shape[0]), assign] <= radius[assign]
    counts = np.bincount(assign[covered], minlength=len(samples))
    return assign, covered, counts


def _idk_scores(X: np.ndarray, sample_indices: np.ndarray) -> np.ndarray:
    """IDK scores for explicit per-partitioning sample index rows.

    The per-row similarity is accumulated as an integer count of
    co-occupants over all partitionings, so the result is independent of
    partitioning order and exactly reproducible.
    """
    n = X.shape[0]
    t = sample_indices.shape[0]
    occupancy = np.zeros(n, dtype=np.int64)
    for row in sample_indices:
        assign, covered, counts = _idk_partition(X, row)
        occupancy += np.where(covered, counts[assign], 0)
    return 1.0 - occupancy / (t * float(n))


class IDK(BaseEstimator):
    """Isolation Distributional Kernel anomaly scorer.

    A row's anomaly score is one minus the average mass of the coverage
    cell it falls in across t random partitionings (see
    :func:`_idk_partition` for the cell rule); rows that fall outside
    every coverage ball in every partitioning score the maximum 1.

    Parameters
    ----------
    psi : int, default=8
        Rows sampled per partitioning (number of cells); must satisfy
        2 <= psi <= n_samples at fit time.
    t : int, default=100
        Number of partitionings averaged.
    seed : int or None, default=None
        Master seed. Each partitioning draws from its own spawned
        stream, so scores do not depend on evaluation order.
    """

    def __init__(self, psi: int = 8, t: int = 100, seed: int | None = None):
        self.psi = psi
        self.t = t
        self.seed = seed

    def fit(self, X, y=None):
        X = _as_matrix(X)
        n = X.shape[0]
        if not 2 <= self.psi <= n:
            raise ConfigError(f"psi={self.psi} must be in [2, n={n}]")
        if self.t < 1:
            raise ConfigError("t must be >= 1")
        streams = np.random.SeedSequence(self.seed).spawn(self.t)
        samples = np.empty((self.t, self.psi), dtype=np.int64)
        for i, ss in enumerate(streams):
            samples[i] = np.random.default_rng(ss).choice(n, size=self.psi, replace=False)
        self._fit_X = X
        self.sample_indices_ = samples
        self.decision_scores_ = _idk_scores(X, samples)
        return self

    def decision_function(self, X) -> np.ndarray:
        X = _as_matrix(X)
        n = self._fit_X.shape[0]
        t = self.sample_indices_.shape[0]
        occupancy = np.zeros(X.shape[0], dtype=np.int64)
        for row in self.sample_indices_:
            _, _, counts = _idk_partition(self._fit_X, row)
            S = self._fit_X[row]
            dist = cdist(X, S)
            assign = np.argmin(dist, axis=1)
            inter = cdist(S, S)
            np.fill_diagonal(inter, np.inf)
            radius = inter.min(axis=1)
            covered = dist[np.arange(X.shape[0]), assign] <= radius[assign]
            occupancy += np.where(covered, counts[assign], 0)
        return 1.0 - occupancy / (t * float(n))


class LOF(BaseEstimator):
    """Local Outlier Factor with tie-inclusive k-distance neighbourhoods.

    Scores are the classic density ratios: about 1 for inliers, much
    larger for outliers. A point whose reachability sum degenerates to
    zero (at least k exact duplicates) gets its local reachability
    density capped, which makes an all-duplicates dataset score exactly
    1 everywhere.
    """

    def __init__(self, k: int = 20):
        self.k = k

    def fit(self, X, y=None):
        X = _as_matrix(X)
        n = X.shape[0]
        if not 1 <= self.k < n:
            raise ConfigError(f"lof_k={self.k} must satisfy 1 <= k < n={n}")
        dist = cdist(X, X)
        np.fill_diagonal(dist, np.inf)
        kdist = np.partition(dist, self.k - 1, axis=1)[:, self.k - 1]
        neigh = dist <= kdist[:, None]  # excludes self via the inf diagonal
        nnb = neigh.sum(axis=1)
        reach = np.maximum(kdist[None, :], dist)
        reach_sum = np.where(neigh, reach, 0.0).sum(axis=1)
        with np.errstate(divide="ignore"):
            lrd = np.where(reach_sum > 0.0, nnb / reach_sum, _LRD_CAP)
        lrd = np.minimum(lrd, _LRD_CAP)
        self.decision_scores_ = (neigh @ lrd) / nnb / lrd
        self._fit_X = X
        self._kdist = kdist
        self._lrd = lrd
        return self

    def decision_function(self, X) -> np.ndarray:
        X = _as_matrix(X)
        dist = cdist(X, self._fit_X)
        kdist = np.partition(dist, self.k - 1, axis=1)[:, self.k - 1]
        neigh = dist <= kdist[:, None]
        nnb = neigh.sum(axis=1)
        reach = np.maximum(self._kdist[None, :], dist)
        reach_sum = np.where(neigh, reach, 0.0).sum(axis=1)
        with np.errstate(divide="ignore"):
            lrd = np.where(reach_sum > 0.0, nnb / reach_sum, _LRD_CAP)
        lrd = np.minimum(lrd, _LRD_CAP)
        return (neigh @ self._lrd) / nnb / lrd


class IForest(BaseEstimator):
    """Isolation forest scorer backed by scikit-learn.

    Scores are 2^(-average path length / c(subsample)), in (0, 1]. The
    effective subsample is min(subsample, n_samples).
    """

    def __init__(self, trees: int = 100, subsample: int = 256, seed: int | None = None):
        self.trees = trees
        self.subsample = subsample
        self.seed = seed

    def fit(self, X, y=None):
        X = _as_matrix(X)
        if self.trees < 1 or self.subsample < 2:
            raise ConfigError("trees must be >= 1 and subsample >= 2")
        eff = min(self.subsample, X.shape[0])
        self._forest = IsolationForest(
            n_estimators=self.trees,
            max_samples=eff,
            random_state=self.seed,
        ).fit(X)
        self.decision_scores_ = -self._forest.score_samples(X)
        return self

    def decision_function(self, X) -> np.ndarray:
        return -self._forest.score_samples(_as_matrix(X))


def build_detector(cfg: DetectorConfig):
    """Instantiate the detector selected by ``cfg.kind``."""
    if cfg.kind == "idk":
        return IDK(psi=cfg.psi, t=cfg.t, seed=cfg.seed)
    if cfg.kind == "lof":
        return LOF(k=cfg.lof_k)
    if cfg.kind == "iforest":
        return IForest(trees=cfg.trees, subsample=cfg.subsample, seed=cfg.seed)
    raise ConfigError(f"unknown detector kind {cfg.kind!r}")


def run_detector(E, cfg: DetectorConfig) -> ScoreVector:
    """Fit the configured detector on embedding rows and score them.

    ``E`` may be an :class:`~gcad.embedding.EmbeddingMatrix` or a plain
    (n, p) array. Scores are ordered by row (= source node) and higher
    means more anomalous for every detector kind.
    """
    X = getattr(E, "data", E)
    det = build_detector(cfg).fit(X)
    return ScoreVector(values=det.decision_scores_, kind=cfg.kind, seed=cfg.seed)


def idk_fit_score(E, cfg: DetectorConfig) -> ScoreVector:
    """IDK scores for embedding rows (see :class:`IDK`)."""
    det = IDK(psi=cfg.psi, t=cfg.t, seed=cfg.seed).fit(getattr(E, "data", E))
    return ScoreVector(values=det.decision_scores_, kind="idk", seed=cfg.seed)


def lof_score(E, cfg: DetectorConfig) -> ScoreVector:
    """LOF scores for embedding rows (see :class:`LOF`)."""
    det = LOF(k=cfg.lof_k).fit(getattr(E, "data", E))
    return ScoreVector(values=det.decision_scores_, kind="lof", seed=None)


def iforest_score(E, cfg: DetectorConfig) -> ScoreVector:
    """Isolation forest scores for embedding rows (see :class:`IForest`)."""
    det = IForest(trees=cfg.trees, subsample=cfg.subsample, seed=cfg.seed).fit(getattr(E, "data", E))
    return ScoreVector(values=det.decision_scores_, kind="iforest", seed=cfg.seed)
