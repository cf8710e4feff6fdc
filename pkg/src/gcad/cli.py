"""Command-line interface.

Subcommands:
  detect     score a graph directory and write node,score,rank CSV
  generate   write a synthetic benchmark graph as a graph directory
  benchmark  run the synthetic evaluation grid and write a report
  scaleup    time the pipeline over growing graph sizes
  explain    export subgraph explanations for a previous run
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from .detectors import DetectorConfig
from .errors import GcadError
from .evaluation import SYNTHETIC_SUITE, ParamGrid, benchmark_run, scaleup_run
from .explain import export_explanations
from .graph import extract_h_subgraph, load_graph, save_graph
from .pipeline import GCAD, Ranking, _rank_order
from .synthetic import FAMILIES, SynSpec, generate, resolved_params


def _add_detector_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--detector", choices=("idk", "lof", "iforest"), default="idk")
    p.add_argument("--psi", type=int, default=8, help="IDK sample size per partitioning")
    p.add_argument("--t", type=int, default=100, help="IDK partitioning count")
    p.add_argument("--lof-k", type=int, default=20, help="LOF neighbour count")
    p.add_argument("--trees", type=int, default=100, help="isolation forest size")
    p.add_argument("--subsample", type=int, default=256, help="isolation forest sample size")
    p.add_argument("--seed", type=int, default=0)


def _detector_config(args) -> DetectorConfig:
    return DetectorConfig(kind=args.detector, psi=args.psi, t=args.t,
                          lof_k=args.lof_k, trees=args.trees,
                          subsample=args.subsample, seed=args.seed)


def cmd_detect(args) -> int:
    g = load_graph(args.graph)
    model = GCAD(h=args.h, lam=args.lam, detector=args.detector, psi=args.psi,
                 t=args.t, lof_k=args.lof_k, trees=args.trees,
                 subsample=args.subsample, seed=args.seed, top_m=args.top_m,
                 tau=args.tau)
    model.fit(g)
    ranks = model.ranking().ranks()
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["node", "score", "rank"])
        for v in range(g.n):
            writer.writerow([v, repr(float(model.scores_[v])), int(ranks[v])])
    if args.dump_embeddings:
        np.savetxt(args.dump_embeddings, model.embedding_.data, delimiter=",")
    if model.flagged_ is not None:
        print(f"flagged {len(model.flagged_)} node(s): "
              f"{', '.join(map(str, model.flagged_.tolist()))}")
    print(f"wrote {out} ({g.n} nodes, detector={args.detector}, h={args.h}, "
          f"lambda={args.lam})")
    return 0


def cmd_generate(args) -> int:
    params = {}
    if args.n is not None:
        if args.family not in ("watts", "rgg_s", "rgg_l"):
            raise GcadError(f"--n is not a parameter of family {args.family!r}")
        params["n"] = args.n
    spec = SynSpec(family=args.family, seed=args.seed, params=params)
    g = generate(spec)
    out = Path(args.out)
    save_graph(g, out)
    record = {"family": spec.family, "seed": spec.seed,
              "params": resolved_params(spec),
              "n": g.n, "edges": g.m,
              "anomalies": int(g.labels.sum()) if g.labels is not None else None}
    (out / "spec.json").write_text(json.dumps(record, indent=2, sort_keys=True) + "\n")
    print(f"wrote {out}: n={g.n}, edges={g.m}, anomalies={record['anomalies']}")
    return 0


def cmd_benchmark(args) -> int:
    if args.suite != "synthetic":
        raise GcadError("only the 'synthetic' suite is available")
    datasets = [SynSpec(name) for name in SYNTHETIC_SUITE]
    report = benchmark_run(datasets, grid=ParamGrid(), n_seeds=args.seeds,
                           seed=args.seed, out_dir=args.out,
                           detector=args.detector)
    for row in report.summary():
        print(f"{row['dataset']:>12s}: AUC {row['mean_auc']:.2f} "
              f"+/- {row['std_auc']:.3f} over {row['n_seeds']} seed(s)")
    print(f"report written to {args.out} ({report.wall_seconds:.1f} s)")
    return 0


def cmd_scaleup(args) -> int:
    sizes = [int(s) for s in args.sizes.split(",") if s]
    rows = scaleup_run(sizes, h=args.h, lam=args.lam, seed=args.seed, out=args.out)
    for row in rows:
        print(f"n={row['n']:>9d} status={row['status']} total={row['total']:.2f}s "
              f"(embed {row['embed']:.2f}, detect {row['detect']:.2f}, "
              f"reweight {row['reweight']:.2f})")
    print(f"wrote {args.out}")
    return 0


def cmd_explain(args) -> int:
    g = load_graph(args.graph)
    scores = np.full(g.n, np.nan)
    with open(args.run, newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            scores[int(row["node"])] = float(row["score"])
    if np.isnan(scores).any():
        raise GcadError(f"{args.run} does not cover every node of {args.graph}")
    ranking = Ranking(scores=scores, order=_rank_order(scores))
    n = len(scores)
    wanted = [int(ranking.order[i]) for i in range(args.top)]
    wanted += [int(ranking.order[n - 1 - i]) for i in range(args.bottom)]
    subs = {v: extract_h_subgraph(g, v, args.h) for v in wanted}
    paths = export_explanations(g, ranking, subs, k_top=args.top,
                                k_bottom=args.bottom, fmt=args.format,
                                out_dir=args.out)
    for p in paths:
        print(p)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gcad",
                                     description="Graph-centric node anomaly detection")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("detect", help="score a graph directory")
    p.add_argument("--graph", required=True, help="directory with edges.csv/attrs.csv")
    p.add_argument("--h", type=int, default=1, help="subgraph depth")
    p.add_argument("--lambda", dest="lam", type=float, default=0.5,
                   help="depth-weighted score base in [0,1)")
    _add_detector_args(p)
    p.add_argument("--out", required=True, help="output CSV (node,score,rank)")
    p.add_argument("--top-m", type=int, default=None, help="flag the m top-ranked nodes")
    p.add_argument("--tau", type=float, default=None, help="flag nodes with score above tau")
    p.add_argument("--dump-embeddings", default=None, metavar="E.CSV",
                   help="also write the embedding matrix as CSV")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("generate", help="generate a synthetic benchmark graph")
    p.add_argument("--family", required=True, choices=sorted(FAMILIES))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n", type=int, default=None,
                   help="node count override (watts and rgg families)")
    p.add_argument("--out", required=True, help="output graph directory")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("benchmark", help="run the synthetic evaluation grid")
    p.add_argument("--suite", default="synthetic")
    p.add_argument("--seeds", type=int, default=5)
    p.add_argument("--seed", type=int, default=0, help="master seed")
    p.add_argument("--detector", choices=("idk", "lof", "iforest"), default="idk")
    p.add_argument("--out", required=True, help="report directory")
    p.set_defaults(func=cmd_benchmark)

    p = sub.add_parser("scaleup", help="time the pipeline over growing sizes")
    p.add_argument("--sizes", required=True, help="comma-separated node counts")
    p.add_argument("--h", type=int, default=1)
    p.add_argument("--lambda", dest="lam", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="timing CSV")
    p.set_defaults(func=cmd_scaleup)

    p = sub.add_parser("explain", help="export subgraph explanations for a run")
    p.add_argument("--graph", required=True)
    p.add_argument("--run", required=True, help="scores.csv from 'gcad detect'")
    p.add_argument("--h", type=int, default=1, help="subgraph depth used in the run")
    p.add_argument("--top", type=int, default=2, help="most anomalous nodes to export")
    p.add_argument("--bottom", type=int, default=2, help="most normal nodes to export")
    p.add_argument("--format", choices=("json", "dot"), default="json")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_explain)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except GcadError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
