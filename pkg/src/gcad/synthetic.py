"""Synthetic benchmark graphs with planted node anomalies.

Six generator configurations are shipped, built on four classical graph
models (Watts-Strogatz, stochastic block model, random geometric graph,
square lattice). Each produces an attributed graph whose ground-truth
anomaly labels come from the construction itself. The RGG and Lattice
families come in complementary pairs: the connection rule that is normal
in one variant is the anomaly in the other, so detectors cannot rely on
"long edges are always anomalous".

Default parameters target the reference statistics listed in
DATASETS.md (node, edge and anomaly counts per dataset); they were tuned
empirically and are recorded next to each generator.

Anomaly injection into an existing (real) attributed graph follows the
usual convention for citation-network benchmarks: structural anomalies
are planted as random cliques, attribute anomalies by swapping a node's
vector with the farthest of k randomly drawn candidates.
"""

from __future__ import annotations

import inspect
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import cdist

from .errors import ConfigError, GraphFormatError
from .graph import AttributedGraph

__all__ = [
    "SynSpec",
    "FAMILIES",
    "gen_watts",
    "gen_sbm_stru",
    "gen_rgg",
    "gen_lattice",
    "generate",
    "inject_citation_anomalies",
]


def _encode(u: np.ndarray, v: np.ndarray, n: int) -> np.ndarray:
    lo = np.minimum(u, v)
    hi = np.maximum(u, v)
    return lo * np.int64(n) + hi


def gen_watts(n: int = 500, degree: int = 6, rewire_p: float = 0.1,
              seed: int | None = None) -> AttributedGraph:
    """Small-world ring with degree anomalies.

    A ring lattice of even ``degree`` is rewired edge-by-edge with
    probability ``rewire_p`` (the far endpoint moves to a uniform fresh
    target), which preserves the edge count exactly. Node attributes are
    the ring coordinates (cos, sin); nodes whose final degree is >= 8 or
    <= 4 are labelled anomalous.
    """
    if n < 10 or degree % 2 or degree <= 0:
        raise ConfigError("need n >= 10 and a positive even degree")
    if degree >= n - 1:
        raise ConfigError("degree must be < n - 1")
    rng = np.random.default_rng(seed)
    half = degree // 2
    src = np.tile(np.arange(n, dtype=np.int64), half)
    dst = np.concatenate([(np.arange(n) + j) % n for j in range(1, half + 1)]).astype(np.int64)

    rewire = rng.random(len(src)) < rewire_p
    keep_enc = set(_encode(src[~rewire], dst[~rewire], n).tolist())
    new_dst = dst.copy()
    for e in np.flatnonzero(rewire):
        u = int(src[e])
        while True:
            w = int(rng.integers(n))
            code = min(u, w) * n + max(u, w)
            if w != u and code not in keep_enc:
                keep_enc.add(code)
                new_dst[e] = w
                break
    edges = np.stack([src, new_dst], axis=1)

    theta = 2.0 * np.pi * np.arange(n) / n
    attrs = np.stack([np.cos(theta), np.sin(theta)], axis=1)
    deg = np.bincount(edges.ravel(), minlength=n)
    labels = ((deg >= 8) | (deg <= 4)).astype(np.int64)
    return AttributedGraph(n=n, edges=edges, attrs=attrs, labels=labels)


def gen_sbm_stru(n_blocks: int = 10, block_size: int = 100, p_in: float = 0.117,
                 p_out: float = 0.0001, d: int = 10, block_std: float = 0.1,
                 cliques: int = 5, clique_size: int = 5,
                 seed: int | None = None) -> AttributedGraph:
    """Stochastic block model with injected clique anomalies.

    Attributes are Gaussian around a per-block mean so neighbourhoods are
    attribute-homogeneous; clique members keep their own attributes but
    gain mutual edges across blocks, which is what makes them anomalous.
    Defaults target roughly 1000 nodes / 5.8k edges / 25 anomalies; the
    block count intentionally exceeds the detector's sample-size range so
    raw attribute positions alone cannot summarize the network.
    """
    if n_blocks < 1 or block_size < 2:
        raise ConfigError("need n_blocks >= 1 and block_size >= 2")
    n = n_blocks * block_size
    rng = np.random.default_rng(seed)
    block = np.arange(n) // block_size

    r = rng.random((n, n))
    prob = np.where(block[:, None] == block[None, :], p_in, p_out)
    iu, ju = np.triu_indices(n, k=1)
    mask = r[iu, ju] < prob[iu, ju]
    edge_set = set(_encode(iu[mask], ju[mask], n).tolist())

    means = rng.normal(0.0, 1.0, (n_blocks, d))
    attrs = means[block] + rng.normal(0.0, block_std, (n, d))

    labels = np.zeros(n, dtype=np.int64)
    picked = rng.choice(n, size=cliques * clique_size, replace=False)
    labels[picked] = 1
    for c in range(cliques):
        group = picked[c * clique_size:(c + 1) * clique_size].tolist()
        for a in range(len(group)):
            for b in range(a + 1, len(group)):
                u, v = group[a], group[b]
                edge_set.add(min(u, v) * n + max(u, v))

    codes = np.fromiter(edge_set, dtype=np.int64, count=len(edge_set))
    edges = np.stack([codes // n, codes % n], axis=1)
    return AttributedGraph(n=n, edges=edges, attrs=attrs, labels=labels)


def gen_rgg(variant: str = "s", n: int = 500, n_anomalies: int = 20,
            tau: float | None = None, anomaly_degree: int = 9,
            seed: int | None = None) -> AttributedGraph:
    """Random geometric graph with distance-rule-violating anomalies.

    Variant "s": normal nodes connect to every other normal node within
    Euclidean distance tau, while each anomaly instead connects to
    ``anomaly_degree`` sampled nodes farther than tau. Variant "l"
    swaps the two rules (normals connect long range, anomalies short).
    Default tau values target roughly 2.2k edges ("s") and 61k edges
    ("l") at n=500.
    """
    if variant not in ("s", "l"):
        raise ConfigError("variant must be 's' or 'l'")
    if n < 10:
        raise ConfigError("need n >= 10")
    if tau is None:
        tau = 0.077 if variant == "s" else 0.493
    rng = np.random.default_rng(seed)
    pos = rng.random((n, 2))
    labels = np.zeros(n, dtype=np.int64)
    anoms = rng.choice(n, size=n_anomalies, replace=False)
    labels[anoms] = 1

    dist = cdist(pos, pos)
    near = dist < tau
    normal = labels == 0
    iu, ju = np.triu_indices(n, k=1)
    pair_normal = normal[iu] & normal[ju]
    rule = near[iu, ju] if variant == "s" else ~near[iu, ju]
    mask = pair_normal & rule
    edge_set = set(_encode(iu[mask], ju[mask], n).tolist())

    for a in anoms.tolist():
        far = dist[a] >= tau if variant == "s" else dist[a] < tau
        far[a] = False
        cand = np.flatnonzero(far)
        take = min(anomaly_degree, len(cand))
        for b in rng.choice(cand, size=take, replace=False).tolist():
            edge_set.add(min(a, b) * n + max(a, b))

    codes = np.fromiter(edge_set, dtype=np.int64, count=len(edge_set))
    edges = np.stack([codes // n, codes % n], axis=1)
    return AttributedGraph(n=n, edges=edges, attrs=pos, labels=labels)


def _grid_edges(rows: int, cols: int) -> np.ndarray:
    idx = np.arange(rows * cols).reshape(rows, cols)
    right = np.stack([idx[:, :-1].ravel(), idx[:, 1:].ravel()], axis=1)
    down = np.stack([idx[:-1, :].ravel(), idx[1:, :].ravel()], axis=1)
    return np.concatenate([right, down], axis=0).astype(np.int64)


def gen_lattice(variant: str = "l", rows: int = 30, cols: int = 40,
                n_added: int = 20, n_injected: int = 20,
                seed: int | None = None) -> AttributedGraph:
    """Square lattice with long-edge or inserted-node anomalies.

    Node attributes are the integer grid coordinates (x, y) as reals.
    Variant "l" adds ``n_added`` edges between random non-adjacent node
    pairs and labels one designated endpoint of each added edge. Variant
    "s" inserts ``n_injected`` new nodes at continuous positions inside
    the grid, wires each to its 4 nearest lattice nodes, and labels the
    inserted nodes. (The reference statistics for the "s" variant are
    internally inconsistent; ``n_injected`` is exposed so either reading
    can be produced. The default keeps the node/edge counts exact.)
    """
    if variant not in ("s", "l"):
        raise ConfigError("variant must be 's' or 'l'")
    if rows * cols < 9:
        raise ConfigError("need rows*cols >= 9")
    rng = np.random.default_rng(seed)
    n = rows * cols
    base = _grid_edges(rows, cols)
    xy = np.stack([np.arange(n) % cols, np.arange(n) // cols], axis=1).astype(np.float64)

    if variant == "l":
        edge_set = set(_encode(base[:, 0], base[:, 1], n).tolist())
        labels = np.zeros(n, dtype=np.int64)
        designated: set[int] = set()
        added = 0
        while added < n_added:
            a = int(rng.integers(n))
            b = int(rng.integers(n))
            code = min(a, b) * n + max(a, b)
            if a == b or code in edge_set or a in designated:
                continue
            edge_set.add(code)
            designated.add(a)
            labels[a] = 1
            added += 1
        codes = np.fromiter(edge_set, dtype=np.int64, count=len(edge_set))
        edges = np.stack([codes // n, codes % n], axis=1)
        return AttributedGraph(n=n, edges=edges, attrs=xy, labels=labels)

    total = n + n_injected
    pos = np.empty((n_injected, 2))
    pos[:, 0] = rng.uniform(0.0, cols - 1.0, n_injected)
    pos[:, 1] = rng.uniform(0.0, rows - 1.0, n_injected)
    extra = []
    for i in range(n_injected):
        dist = np.hypot(xy[:, 0] - pos[i, 0], xy[:, 1] - pos[i, 1])
        nearest = np.argsort(dist, kind="stable")[:4]
        for b in nearest.tolist():
            extra.append((n + i, b))
    edges = np.concatenate([base, np.array(extra, dtype=np.int64)], axis=0)
    attrs = np.concatenate([xy, pos], axis=0)
    labels = np.zeros(total, dtype=np.int64)
    labels[n:] = 1
    return AttributedGraph(n=total, edges=edges, attrs=attrs, labels=labels)


def inject_citation_anomalies(g: AttributedGraph, cliques: int = 5,
                              clique_size: int = 15, attr_swaps: int = 75,
                              candidate_k: int = 50,
                              seed: int | None = None) -> AttributedGraph:
    """Plant structural (clique) and attribute (swap) anomalies in a graph.

    Structural: ``cliques`` groups of ``clique_size`` random nodes are
    fully connected. Attribute: each of ``attr_swaps`` further random
    nodes takes over the attribute vector of the farthest (Euclidean) of
    ``candidate_k`` randomly drawn candidate nodes. All touched nodes are
    labelled 1; the input graph must be unlabelled (or all-zero) and is
    not modified.
    """
    if g.labels is not None and g.labels.any():
        raise GraphFormatError("graph already carries anomaly labels")
    need = cliques * clique_size + attr_swaps
    if need > g.n:
        raise ConfigError(f"need {need} distinct nodes, graph has {g.n}")
    rng = np.random.default_rng(seed)
    picked = rng.choice(g.n, size=need, replace=False)
    struct = picked[:cliques * clique_size]
    swaps = picked[cliques * clique_size:]

    edge_set = set(_encode(g.edges[:, 0], g.edges[:, 1], g.n).tolist())
    for c in range(cliques):
        group = struct[c * clique_size:(c + 1) * clique_size].tolist()
        for a in range(len(group)):
            for b in range(a + 1, len(group)):
                u, v = group[a], group[b]
                edge_set.add(min(u, v) * g.n + max(u, v))

    attrs = g.attrs.copy()
    for tgt in swaps.tolist():
        cand = rng.choice(g.n - 1, size=min(candidate_k, g.n - 1), replace=False)
        cand = np.where(cand >= tgt, cand + 1, cand)  # skip the target itself
        diff = attrs[cand] - attrs[tgt]
        far = cand[int(np.argmax(np.einsum("ij,ij->i", diff, diff)))]
        attrs[tgt] = attrs[far]

    labels = np.zeros(g.n, dtype=np.int64)
    labels[picked] = 1
    codes = np.fromiter(edge_set, dtype=np.int64, count=len(edge_set))
    edges = np.stack([codes // g.n, codes % g.n], axis=1)
    return AttributedGraph(n=g.n, edges=edges, attrs=attrs, labels=labels)


FAMILIES = {
    "watts": gen_watts,
    "sbm_stru": gen_sbm_stru,
    "rgg_s": lambda **kw: gen_rgg(variant="s", **kw),
    "rgg_l": lambda **kw: gen_rgg(variant="l", **kw),
    "lattice_l": lambda **kw: gen_lattice(variant="l", **kw),
    "lattice_s": lambda **kw: gen_lattice(variant="s", **kw),
}

_FAMILY_BASE = {
    "watts": gen_watts,
    "sbm_stru": gen_sbm_stru,
    "rgg_s": gen_rgg,
    "rgg_l": gen_rgg,
    "lattice_l": gen_lattice,
    "lattice_s": gen_lattice,
}


@dataclass
class SynSpec:
    """A synthetic benchmark request: family name, seed, parameter overrides."""

    family: str
    seed: int | None = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ConfigError(f"unknown family {self.family!r}, expected one of {sorted(FAMILIES)}")


def resolved_params(spec: SynSpec) -> dict:
    """Fully-resolved generator parameters for a spec (defaults + overrides)."""
    fn = _FAMILY_BASE[spec.family]
    sig = inspect.signature(fn)
    params = {k: p.default for k, p in sig.parameters.items() if p.default is not inspect.Parameter.empty}
    if spec.family.startswith(("rgg", "lattice")):
        params["variant"] = spec.family.rsplit("_", 1)[1]
    if spec.family.startswith("rgg") and params.get("tau") is None:
        params["tau"] = 0.077 if params["variant"] == "s" else 0.493
    params.update(spec.params)
    params["seed"] = spec.seed
    return params


def generate(spec: SynSpec) -> AttributedGraph:
    """Generate the graph described by a spec; deterministic given its seed."""
    return FAMILIES[spec.family](seed=spec.seed, **spec.params)
