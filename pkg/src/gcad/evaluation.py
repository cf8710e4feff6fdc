"""Evaluation utilities: AUC, significance testing, benchmark and scaleup runs.

The benchmark runner reproduces the synthetic-suite protocol: every
dataset is regenerated per evaluation seed, the pipeline is run over the
full parameter grid (depth h, IDK sample size psi, weight base lambda),
and the best AUC per dataset is reported alongside the raw grid. The
scaleup runner times the pipeline stages on growing small-world graphs
to expose the linear cost profile.
"""

from __future__ import annotations

import csv
import time
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.stats import norm, rankdata

from .detectors import DetectorConfig
from .errors import ConfigError
from .evaluation_report import BenchmarkReport  # re-export convenience
from .graph import AttributedGraph, load_graph
from .pipeline import neighborhood_index, reweight_from_index
from .detectors import run_detector
from .embedding import embed_graph
from .synthetic import SynSpec, generate

__all__ = [
    "auc",
    "wilcoxon_signed_rank",
    "ParamGrid",
    "BenchmarkReport",
    "benchmark_run",
    "scaleup_run",
    "SYNTHETIC_SUITE",
]

SYNTHETIC_SUITE = ("watts", "sbm_stru", "rgg_s", "rgg_l", "lattice_l", "lattice_s")


def auc(scores, labels) -> float:
    """Area under the ROC curve via the rank (Mann-Whitney) statistic.

    Ties receive average ranks, so constant scores give exactly 0.5.
    Raises on single-class label vectors.
    """
    s = np.asarray(getattr(scores, "values", scores), dtype=np.float64).ravel()
    y = np.asarray(labels, dtype=np.int64).ravel()
    if s.shape != y.shape:
        raise ValueError("scores and labels must have equal length")
    n_pos = int((y == 1).sum())
    n_neg = int((y == 0).sum())
    if n_pos == 0 or n_neg == 0:
        raise ValueError("labels must contain both classes")
    ranks = rankdata(s)
    return float((ranks[y == 1].sum() - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


def _signed_rank_stat(diff: np.ndarray) -> tuple[float, np.ndarray]:
    ranks = rankdata(np.abs(diff))
    return float(ranks[diff > 0].sum()), ranks


def wilcoxon_signed_rank(a, b) -> float:
    """One-sided exact Wilcoxon signed-rank p-value for "a exceeds b".

    Zero differences are dropped; ties in |difference| get average
    ranks. For up to 20 non-zero pairs the null distribution of the
    positive-rank sum is enumerated exactly over all sign assignments;
    beyond that a normal approximation with tie correction is used.
    Returns 1.0 (with a warning) when every difference is zero.
    """
    a = np.asarray(a, dtype=np.float64).ravel()
    b = np.asarray(b, dtype=np.float64).ravel()
    if a.shape != b.shape or len(a) < 5:
        raise ValueError("need equal-length inputs with at least 5 pairs")
    diff = a - b
    diff = diff[diff != 0.0]
    if len(diff) == 0:
        warnings.warn("all differences are zero; p-value is 1", stacklevel=2)
        return 1.0
    w_plus, ranks = _signed_rank_stat(diff)
    n = len(diff)
    if n <= 20:
        # exact tail: distribution of the positive-rank sum over all 2^n
        # sign assignments, in half-rank integer units to stay exact
        units = np.rint(2.0 * ranks).astype(np.int64)
        total = int(units.sum())
        counts = np.zeros(total + 1, dtype=np.float64)
        counts[0] = 1.0
        for r in units:
            shifted = np.zeros_like(counts)
            shifted[r:] = counts[: total + 1 - r]
            counts = counts + shifted
        target = int(np.rint(2.0 * w_plus))
        tail = counts[target:].sum()
        return float(tail / 2.0 ** n)
    mean = n * (n + 1) / 4.0
    _, tie_counts = np.unique(ranks, return_counts=True)
    var = n * (n + 1) * (2 * n + 1) / 24.0 - (tie_counts ** 3 - tie_counts).sum() / 48.0
    z = (w_plus - 0.5 - mean) / np.sqrt(var)
    return float(norm.sf(z))


@dataclass
class ParamGrid:
    """Search grid for the benchmark runner (defaults: the standard ranges)."""

    h: tuple = (1, 2)
    psi: tuple = (2, 4, 8)
    lam: tuple = (0.5, 0.25, 0.125, 0.0625, 0.03125)


def _dataset_iter(datasets):
    for ds in datasets:
        if isinstance(ds, SynSpec):
            yield ds.family, ds
        elif isinstance(ds, (str, Path)):
            yield str(ds), Path(ds)
        else:
            raise ConfigError(f"dataset must be a SynSpec or a directory path, got {type(ds)}")


def _grid_scores(g: AttributedGraph, grid: ParamGrid, det_seed: int,
                 detector: str = "idk", centralize: bool = True):
    """AUCs for every grid point of one graph; embeddings shared across psi/lam.

    Yields (h, psi, lam, auc) tuples. For non-IDK detectors the psi axis
    collapses to a single entry (psi is an IDK parameter).
    """
    psis = grid.psi if detector == "idk" else (grid.psi[0],)
    for h in grid.h:
        E = embed_graph(g, h, centralize=centralize)
        index = neighborhood_index(g, h)
        for psi in psis:
            cfg = DetectorConfig(kind=detector, psi=psi, seed=det_seed)
            raw = run_detector(E, cfg).values
            for lam in grid.lam:
                final = reweight_from_index(index, raw, lam) if lam > 0 else raw
                yield h, psi, lam, auc(final, g.labels)


@dataclass
class BenchmarkRow:
    dataset: str
    seed: int
    h: int
    psi: int
    lam: float
    auc: float


def benchmark_run(datasets, grid: ParamGrid | None = None, n_seeds: int = 5,
                  seed: int = 0, out_dir=None, detector: str = "idk",
                  centralize: bool = True) -> "BenchmarkReport":
    """Run the benchmark grid and report per-dataset best AUCs.

    ``datasets`` is a list of synthetic specs (regenerated with a fresh
    derived seed per repetition) or graph directories (fixed data;
    labels required, unlabelled directories are skipped with a warning).
    A master ``seed`` drives both regeneration and detector seeding, so
    a report is fully reproducible. When ``out_dir`` is given, the full
    grid goes to grid.csv and the summary to summary.md / summary.csv.
    """
    grid = grid or ParamGrid()
    rows: list[BenchmarkRow] = []
    t_start = time.perf_counter()
    for d_idx, (name, source) in enumerate(_dataset_iter(datasets)):
        for rep in range(n_seeds):
            child = np.random.SeedSequence(entropy=seed, spawn_key=(d_idx, rep))
            gen_seed, det_seed = (int(s.generate_state(1)[0]) for s in child.spawn(2))
            if isinstance(source, SynSpec):
                g = generate(SynSpec(source.family, seed=gen_seed, params=source.params))
            else:
                g = load_graph(source)
                if g.labels is None:
                    warnings.warn(f"{source} has no labels.csv; skipped", stacklevel=2)
                    break
            for h, psi, lam, score in _grid_scores(g, grid, det_seed,
                                                   detector=detector,
                                                   centralize=centralize):
                rows.append(BenchmarkRow(name, rep, h, psi, lam, score))
    report = BenchmarkReport(rows=rows, grid=grid, seed=seed,
                             wall_seconds=time.perf_counter() - t_start,
                             detector=detector)
    if out_dir is not None:
        report.write(out_dir)
    return report


def scaleup_run(sizes, cfg: DetectorConfig | None = None, h: int = 1,
                lam: float = 0.5, seed: int = 0, out=None,
                degree: int = 6) -> list[dict]:
    """Time the pipeline on small-world graphs of growing size.

    Returns one row per size with per-stage and total seconds; a failed
    run (e.g. out of memory) produces a row with status="failed" instead
    of aborting the earlier results. Writes CSV when ``out`` is given.
    """
    from .pipeline import GcadConfig, gcad_run
    from .synthetic import gen_watts

    if list(sizes) != sorted(sizes):
        raise ConfigError("sizes must be ascending")
    det = cfg or DetectorConfig()
    rows = []
    for n in sizes:
        row = {"n": int(n), "status": "ok", "gen": 0.0, "embed": 0.0,
               "detect": 0.0, "reweight": 0.0, "rank": 0.0, "total": 0.0}
        try:
            t0 = time.perf_counter()
            g = gen_watts(n=int(n), degree=degree, seed=seed)
            row["gen"] = time.perf_counter() - t0
            timings: dict = {}
            t1 = time.perf_counter()
            gcad_run(g, GcadConfig(h=h, lam=lam, detector=det), timings=timings)
            row["total"] = time.perf_counter() - t1
            row.update(timings)
        except MemoryError:
            row["status"] = "failed"
        rows.append(row)
    if out is not None:
        out = Path(out)
        out.parent.mkdir(parents=True, exist_ok=True)
        with open(out, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=list(rows[0].keys()))
            writer.writeheader()
            writer.writerows(rows)
    return rows
