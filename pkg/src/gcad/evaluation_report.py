"""Benchmark report container and serialization."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = ["BenchmarkReport"]


@dataclass
class BenchmarkReport:
    """Grid results of a benchmark run.

    ``rows`` holds one AUC per (dataset, repetition, grid point). The
    summary aggregates the best AUC over the grid within each
    repetition, then means across repetitions, mirroring the
    tuned-parameter reporting protocol.
    """

    rows: list
    grid: object
    seed: int
    wall_seconds: float = 0.0
    detector: str = "idk"

    def datasets(self) -> list[str]:
        seen: dict[str, None] = {}
        for r in self.rows:
            seen.setdefault(r.dataset, None)
        return list(seen)

    def best_per_seed(self, dataset: str) -> np.ndarray:
        """Best AUC over the grid, one value per repetition."""
        by_rep: dict[int, float] = {}
        for r in self.rows:
            if r.dataset == dataset:
                by_rep[r.seed] = max(by_rep.get(r.seed, 0.0), r.auc)
        return np.array([by_rep[k] for k in sorted(by_rep)])

    def summary(self) -> list[dict]:
        out = []
        for ds in self.datasets():
            best = self.best_per_seed(ds)
            out.append({
                "dataset": ds,
                "mean_auc": float(best.mean()),
                "std_auc": float(best.std()),
                "n_seeds": len(best),
            })
        return out

    def write(self, out_dir) -> None:
        """Write grid.csv, summary.csv and summary.md into ``out_dir``."""
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        with open(out_dir / "grid.csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["dataset", "seed", "h", "psi", "lambda", "auc"])
            for r in self.rows:
                writer.writerow([r.dataset, r.seed, r.h, r.psi, r.lam, f"{r.auc:.6f}"])
        summary = self.summary()
        with open(out_dir / "summary.csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["dataset", "mean_auc", "std_auc", "n_seeds"])
            for row in summary:
                writer.writerow([row["dataset"], f"{row['mean_auc']:.4f}",
                                 f"{row['std_auc']:.4f}", row["n_seeds"]])
        lines = [
            f"# Benchmark summary (detector={self.detector}, seed={self.seed})",
            "",
            f"Wall clock: {self.wall_seconds:.1f} s",
            "",
            "| dataset | AUC (mean over seeds) | std | seeds |",
            "|---|---|---|---|",
        ]
        for row in summary:
            lines.append(f"| {row['dataset']} | {row['mean_auc']:.2f} "
                         f"| {row['std_auc']:.3f} | {row['n_seeds']} |")
        (out_dir / "summary.md").write_text("\n".join(lines) + "\n")
