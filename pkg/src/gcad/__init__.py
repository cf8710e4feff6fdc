"""Graph-centric node anomaly detection for attributed networks.

The central idea: extract the h-hop subgraph around every node,
translate it so its source sits at the origin (subgraph centralization),
embed each centralized subgraph with a continuous Weisfeiler-Lehman
scheme, score the embeddings with a point anomaly detector, and smooth
the scores over the graph with depth-based weights. See :class:`GCAD`
for the one-stop estimator.
"""

from .detectors import IDK, LOF, DetectorConfig, IForest, ScoreVector, run_detector
from .embedding import EmbeddingMatrix, SubgraphEmbedding, embed_all, embed_graph
from .errors import ConfigError, GcadError, GraphFormatError, NumericError
from .evaluation import auc, benchmark_run, scaleup_run, wilcoxon_signed_rank
from .explain import Explanation, export_explanations
from .graph import AttributedGraph, HSubgraph, extract_h_subgraph, load_graph, save_graph, sec
from .pipeline import GCAD, GcadConfig, Ranking, depth_weighted_scores, flag_anomalies, gcad_run
from .synthetic import SynSpec, generate, inject_citation_anomalies

__version__ = "0.1.0"

__all__ = [
    "AttributedGraph",
    "HSubgraph",
    "load_graph",
    "save_graph",
    "extract_h_subgraph",
    "sec",
    "EmbeddingMatrix",
    "SubgraphEmbedding",
    "embed_all",
    "embed_graph",
    "DetectorConfig",
    "ScoreVector",
    "IDK",
    "LOF",
    "IForest",
    "run_detector",
    "GCAD",
    "GcadConfig",
    "Ranking",
    "gcad_run",
    "depth_weighted_scores",
    "flag_anomalies",
    "SynSpec",
    "generate",
    "inject_citation_anomalies",
    "auc",
    "wilcoxon_signed_rank",
    "benchmark_run",
    "scaleup_run",
    "Explanation",
    "export_explanations",
    "GcadError",
    "GraphFormatError",
    "ConfigError",
    "NumericError",
    "__version__",
]
