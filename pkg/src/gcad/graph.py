"""Attributed graphs and centralized h-subgraph extraction.

An attributed network is an undirected simple graph whose every node
carries a real-valued feature vector. The basic unit of work is the
h-subgraph of a node v: the subgraph induced by all nodes within h hops
of v, with every node vector translated so that v sits at the origin
("centralization"). Only the relative geometry of a neighbourhood
survives the translation, which is what makes subgraphs comparable
across the network.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

from .errors import GraphFormatError

__all__ = [
    "AttributedGraph",
    "HSubgraph",
    "load_graph",
    "save_graph",
    "extract_h_subgraph",
    "sec",
]


@dataclass(eq=False)
class AttributedGraph:
    """An undirected attributed network.

    Parameters
    ----------
    n : int
        Number of nodes; nodes are the integers 0..n-1.
    edges : ndarray of shape (m, 2)
        Undirected edge list. Canonicalized on construction to u < v,
        sorted lexicographically, with duplicates forbidden.
    attrs : ndarray of shape (n, d)
        Real-valued node attribute matrix, row i = node i.
    labels : ndarray of shape (n,), optional
        Ground-truth anomaly flags (1 = anomaly, 0 = normal).

    The instance is treated as immutable after construction; the CSR
    adjacency is built lazily and cached.
    """

    n: int
    edges: np.ndarray
    attrs: np.ndarray
    labels: np.ndarray | None = None

    def __post_init__(self):
        self.attrs = np.ascontiguousarray(self.attrs, dtype=np.float64)
        if self.attrs.ndim != 2 or self.attrs.shape[0] != self.n or self.attrs.shape[1] < 1:
            raise GraphFormatError(
                f"attrs must be ({self.n}, d) with d >= 1, got {self.attrs.shape}"
            )
        edges = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        if edges.size:
            if edges.min() < 0 or edges.max() >= self.n:
                raise GraphFormatError("edge endpoint out of range")
            if np.any(edges[:, 0] == edges[:, 1]):
                raise GraphFormatError("self-loops are not allowed")
            lo = np.minimum(edges[:, 0], edges[:, 1])
            hi = np.maximum(edges[:, 0], edges[:, 1])
            edges = np.stack([lo, hi], axis=1)
            order = np.lexsort((edges[:, 1], edges[:, 0]))
            edges = edges[order]
            if np.any(np.all(edges[1:] == edges[:-1], axis=1)):
                raise GraphFormatError("duplicate edges are not allowed")
        self.edges = edges
        if self.labels is not None:
            labels = np.asarray(self.labels, dtype=np.int64).ravel()
            if labels.shape[0] != self.n:
                raise GraphFormatError(
                    f"labels must have length {self.n}, got {labels.shape[0]}"
                )
            if not np.all((labels == 0) | (labels == 1)):
                raise GraphFormatError("labels must be 0/1")
            self.labels = labels

    @property
    def m(self) -> int:
        """Number of undirected edges."""
        return self.edges.shape[0]

    @property
    def d(self) -> int:
        """Attribute dimensionality."""
        return self.attrs.shape[1]

    @cached_property
    def adjacency(self) -> tuple[np.ndarray, np.ndarray]:
        """CSR-style adjacency: (indptr, indices), neighbours sorted ascending."""
        deg = np.zeros(self.n, dtype=np.int64)
        if self.m:
            np.add.at(deg, self.edges[:, 0], 1)
            np.add.at(deg, self.edges[:, 1], 1)
        indptr = np.zeros(self.n + 1, dtype=np.int64)
        np.cumsum(deg, out=indptr[1:])
        both = np.concatenate([self.edges, self.edges[:, ::-1]], axis=0)
        order = np.lexsort((both[:, 1], both[:, 0]))
        indices = both[order, 1].copy()
        return indptr, indices

    def degrees(self) -> np.ndarray:
        indptr, _ = self.adjacency
        return np.diff(indptr)

    def neighbors(self, v: int) -> np.ndarray:
        indptr, indices = self.adjacency
        return indices[indptr[v]:indptr[v + 1]]


@dataclass(eq=False)
class HSubgraph:
    """A centralized h-subgraph rooted at ``source``.

    ``nodes`` holds global node indices ordered by (hop, index) ascending,
    source first. ``local_edges`` are the induced edges in local indices,
    canonicalized to (min, max) and sorted. ``cattrs`` are the node vectors
    translated so the source is the zero vector.
    """

    source: int
    nodes: np.ndarray
    hops: np.ndarray
    local_edges: np.ndarray
    cattrs: np.ndarray

    def __len__(self) -> int:
        return len(self.nodes)


def _parse_int_pair(line: str, lineno: int, path: Path) -> tuple[int, int]:
    parts = line.split(",")
    if len(parts) != 2:
        raise GraphFormatError(f"{path}:{lineno}: expected 'u,v', got {line!r}")
    try:
        return int(parts[0]), int(parts[1])
    except ValueError:
        raise GraphFormatError(f"{path}:{lineno}: non-integer endpoint in {line!r}") from None


def load_graph(directory, dedupe: bool = True) -> AttributedGraph:
    """Load an attributed graph from a directory of CSV files.

    Expects ``edges.csv`` (one "u,v" pair of 0-based ints per line) and
    ``attrs.csv`` (one comma-separated float row per node); ``labels.csv``
    (one 0/1 per line) is optional. Self-loops are dropped with a warning.
    With ``dedupe=True`` (the default) duplicate and reversed edge pairs
    are merged into a single undirected edge; with ``dedupe=False`` they
    raise :class:`GraphFormatError`.
    """
    directory = Path(directory)
    attrs_path = directory / "attrs.csv"
    edges_path = directory / "edges.csv"
    if not attrs_path.is_file() or not edges_path.is_file():
        raise GraphFormatError(f"{directory} must contain edges.csv and attrs.csv")

    rows = []
    width = None
    with open(attrs_path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if width is None:
                width = len(parts)
            elif len(parts) != width:
                raise GraphFormatError(
                    f"{attrs_path}:{lineno}: ragged row, expected {width} values"
                )
            try:
                rows.append([float(p) for p in parts])
            except ValueError:
                raise GraphFormatError(
                    f"{attrs_path}:{lineno}: non-numeric attribute in {line!r}"
                ) from None
    if not rows:
        raise GraphFormatError(f"{attrs_path}: no attribute rows")
    attrs = np.array(rows, dtype=np.float64)
    n = attrs.shape[0]

    pairs = []
    self_loops = 0
    with open(edges_path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            u, v = _parse_int_pair(line, lineno, edges_path)
            if u < 0 or v < 0 or u >= n or v >= n:
                raise GraphFormatError(
                    f"{edges_path}:{lineno}: endpoint out of range for n={n}"
                )
            if u == v:
                self_loops += 1
                continue
            pairs.append((min(u, v), max(u, v)))
    if self_loops:
        warnings.warn(f"dropped {self_loops} self-loop(s) from {edges_path}", stacklevel=2)

    unique_pairs = sorted(set(pairs))
    if not dedupe and len(unique_pairs) != len(pairs):
        raise GraphFormatError(f"{edges_path}: duplicate or reversed edge pairs present")
    edges = np.array(unique_pairs, dtype=np.int64).reshape(-1, 2)

    labels = None
    labels_path = directory / "labels.csv"
    if labels_path.is_file():
        vals = []
        with open(labels_path) as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.strip()
                if not line:
                    continue
                if line not in ("0", "1"):
                    raise GraphFormatError(f"{labels_path}:{lineno}: labels must be 0 or 1")
                vals.append(int(line))
        labels = np.array(vals, dtype=np.int64)

    return AttributedGraph(n=n, edges=edges, attrs=attrs, labels=labels)


def save_graph(g: AttributedGraph, directory) -> None:
    """Write a graph as the edges.csv / attrs.csv / labels.csv directory format."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    with open(directory / "edges.csv", "w") as fh:
        for u, v in g.edges:
            fh.write(f"{u},{v}\n")
    with open(directory / "attrs.csv", "w") as fh:
        for row in g.attrs:
            fh.write(",".join(repr(float(x)) for x in row) + "\n")
    if g.labels is not None:
        with open(directory / "labels.csv", "w") as fh:
            for y in g.labels:
                fh.write(f"{y}\n")


def _bfs_small(indptr, indices, source: int, h: int):
    """BFS to depth h; members ordered by (hop, node index) ascending.

    Returns plain Python lists. Fast for the small neighbourhoods that
    dominate sparse graphs.
    """
    members = [source]
    hops = [0]
    seen = {source}
    frontier = [source]
    for depth in range(1, h + 1):
        if not frontier:
            break
        nxt = set()
        for u in frontier:
            for w in indices[indptr[u]:indptr[u + 1]].tolist():
                if w not in seen:
                    nxt.add(w)
        if not nxt:
            break
        frontier = sorted(nxt)
        seen.update(frontier)
        members.extend(frontier)
        hops.extend([depth] * len(frontier))
    return members, hops


def _bfs_large(indptr, indices, source: int, h: int, scratch: np.ndarray | None = None):
    """Vectorized BFS for dense neighbourhoods; same (hop, index) ordering.

    ``scratch`` is an int64 work array of length n filled with -1; it is
    restored before returning so it can be reused across calls.
    """
    if scratch is None:
        scratch = np.full(len(indptr) - 1, -1, dtype=np.int64)
    scratch[source] = 0
    levels = [np.array([source], dtype=np.int64)]
    frontier = levels[0]
    for depth in range(1, h + 1):
        if frontier.size == 0:
            break
        chunks = [indices[indptr[u]:indptr[u + 1]] for u in frontier.tolist()]
        cand = np.unique(np.concatenate(chunks)) if chunks else np.empty(0, np.int64)
        fresh = cand[scratch[cand] < 0]
        if fresh.size == 0:
            break
        scratch[fresh] = depth
        levels.append(fresh)
        frontier = fresh
    members = np.concatenate(levels)
    hops = scratch[members].copy()
    scratch[members] = -1
    return members, hops


def extract_h_subgraph(g: AttributedGraph, v: int, h: int) -> HSubgraph:
    """Extract and centralize the h-subgraph rooted at node v.

    Nodes are every u with BFS distance at most h from v in the full
    graph, ordered by (hop, index); the local edge list is the full edge
    set induced on those nodes; attribute rows are translated by the
    source vector so that ``cattrs[0]`` is exactly zero.
    """
    if not 0 <= v < g.n:
        raise GraphFormatError(f"source {v} out of range for n={g.n}")
    if h < 0:
        raise GraphFormatError("h must be >= 0")
    indptr, indices = g.adjacency
    members, hops = _bfs_small(indptr, indices, v, h)
    pos = {u: i for i, u in enumerate(members)}
    local_edges = []
    for i, u in enumerate(members):
        for w in indices[indptr[u]:indptr[u + 1]].tolist():
            j = pos.get(w)
            if j is not None and j > i:
                local_edges.append((i, j))
    local_edges.sort()
    nodes = np.array(members, dtype=np.int64)
    cattrs = g.attrs[nodes] - g.attrs[v]
    return HSubgraph(
        source=v,
        nodes=nodes,
        hops=np.array(hops, dtype=np.int64),
        local_edges=np.array(local_edges, dtype=np.int64).reshape(-1, 2),
        cattrs=cattrs,
    )


def sec(g: AttributedGraph, h: int) -> list[HSubgraph]:
    """Extract and centralize the h-subgraph of every node, in node order."""
    if h < 0:
        raise GraphFormatError("h must be >= 0")
    return [extract_h_subgraph(g, v, h) for v in range(g.n)]
