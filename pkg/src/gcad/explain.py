"""Export centralized subgraphs of extreme-ranked nodes for visualization.

A detection run can be explained by looking at the centralized
h-subgraphs of its most anomalous and most normal nodes: the anomalous
ones look visibly different from the typical neighbourhood shape of the
network. The exporters write one file per selected node, either as JSON
(schema in docs/formats.md) or as Graphviz DOT with the source node
highlighted and, for 2-D attributes, nodes pinned at their centralized
coordinates. Serialization is a pure projection of pipeline state:
re-exporting the same run yields byte-identical files.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .errors import ConfigError
from .graph import AttributedGraph, HSubgraph
from .pipeline import Ranking

__all__ = ["Explanation", "export_explanations"]


@dataclass
class Explanation:
    """One node's ranked score plus its serialized centralized subgraph."""

    node: int
    rank: int
    score: float
    kind: str  # "anomalous" or "normal"
    sub: HSubgraph

    def to_dict(self) -> dict:
        return {
            "node": int(self.node),
            "rank": int(self.rank),
            "score": float(self.score),
            "kind": self.kind,
            "h": int(self.sub.hops.max(initial=0)),
            "subgraph": {
                "nodes": [int(u) for u in self.sub.nodes],
                "hops": [int(x) for x in self.sub.hops],
                "edges": [[int(a), int(b)] for a, b in self.sub.local_edges],
                "coords": [[float(x) for x in row] for row in self.sub.cattrs],
            },
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def to_dot(self) -> str:
        lines = [f"graph node_{int(self.node)} {{"]
        lines.append(f'  label="node {int(self.node)} ({self.kind}, '
                     f'rank {int(self.rank)}, score {self.score:.6f})";')
        lines.append("  node [shape=circle];")
        d = self.sub.cattrs.shape[1]
        for i, u in enumerate(self.sub.nodes):
            extras = ['color=red, style=filled, fillcolor="#ffcccc"'] if i == 0 else []
            if d == 2:
                x, y = self.sub.cattrs[i]
                extras.append(f'pos="{float(x):.6f},{float(y):.6f}!"')
            attr = ", ".join([f'label="{int(u)}"'] + extras)
            lines.append(f"  {i} [{attr}];")
        for a, b in self.sub.local_edges:
            lines.append(f"  {int(a)} -- {int(b)};")
        lines.append("}")
        return "\n".join(lines) + "\n"


def _lookup(subs, v: int) -> HSubgraph:
    sub = subs[v]
    if sub.source != v:
        raise ValueError(f"subgraph at key {v} has source {sub.source}")
    return sub


def export_explanations(g: AttributedGraph, ranking: Ranking, subs,
                        k_top: int = 2, k_bottom: int = 2,
                        fmt: str = "json", out_dir=".") -> list[Path]:
    """Write the k_top most anomalous and k_bottom most normal explanations.

    ``subs`` maps node index to its centralized subgraph (a list from a
    full extraction works, as does a dict holding just the needed
    nodes). Returns the written paths, anomalous first.
    """
    if fmt not in ("json", "dot"):
        raise ConfigError("format must be 'json' or 'dot'")
    n = len(ranking.scores)
    if k_top < 0 or k_bottom < 0 or k_top + k_bottom > n:
        raise ConfigError(f"k_top + k_bottom must be within [0, n={n}]")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    picks = [("anomalous", i, ranking.order[i]) for i in range(k_top)]
    picks += [("normal", n - 1 - i, ranking.order[n - 1 - i]) for i in range(k_bottom)]
    for kind, pos, v in picks:
        v = int(v)
        exp = Explanation(node=v, rank=pos + 1, score=float(ranking.scores[v]),
                          kind=kind, sub=_lookup(subs, v))
        text = exp.to_json() if fmt == "json" else exp.to_dot()
        path = out_dir / f"{kind}_rank{pos + 1:04d}_node{v}.{'json' if fmt == 'json' else 'dot'}"
        path.write_text(text)
        paths.append(path)
    return paths
