import json

import numpy as np
import pytest

from gcad.errors import ConfigError
from gcad.explain import Explanation, export_explanations
from gcad.graph import sec
from gcad.pipeline import GCAD
from gcad.synthetic import gen_rgg

from conftest import random_graph


@pytest.fixture(scope="module")
def rgg_run():
    g = gen_rgg("s", seed=0)
    model = GCAD(h=1, lam=0.5, psi=8, seed=1).fit(g)
    return g, model.ranking(), sec(g, 1)


class TestExport:
    def test_four_files_and_extreme_subgraphs(self, rgg_run, tmp_path):
        g, ranking, subs = rgg_run
        paths = export_explanations(g, ranking, subs, k_top=2, k_bottom=2,
                                    fmt="json", out_dir=tmp_path)
        assert len(paths) == 4
        names = [p.name for p in paths]
        assert sum(n.startswith("anomalous") for n in names) == 2
        assert sum(n.startswith("normal") for n in names) == 2
        # anomalous exemplars have long edges, normal ones short (variant s)
        def max_edge_len(payload):
            coords = np.array(payload["subgraph"]["coords"])
            edges = payload["subgraph"]["edges"]
            return max((np.linalg.norm(coords[a] - coords[b]) for a, b in edges),
                       default=0.0)
        tops = [json.loads(p.read_text()) for p in paths[:2]]
        bottoms = [json.loads(p.read_text()) for p in paths[2:]]
        assert min(max_edge_len(t) for t in tops) > max(max_edge_len(b) for b in bottoms)

    def test_source_coords_are_zero(self, rgg_run, tmp_path):
        g, ranking, subs = rgg_run
        paths = export_explanations(g, ranking, subs, k_top=3, k_bottom=3,
                                    fmt="json", out_dir=tmp_path)
        for p in paths:
            payload = json.loads(p.read_text())
            assert payload["subgraph"]["coords"][0] == [0.0, 0.0]
            assert payload["subgraph"]["hops"][0] == 0

    def test_only_normals(self, rgg_run, tmp_path):
        g, ranking, subs = rgg_run
        paths = export_explanations(g, ranking, subs, k_top=0, k_bottom=2,
                                    fmt="json", out_dir=tmp_path)
        assert all(p.name.startswith("normal") for p in paths)

    def test_too_many_requested(self, rgg_run, tmp_path):
        g, ranking, subs = rgg_run
        with pytest.raises(ConfigError):
            export_explanations(g, ranking, subs, k_top=400, k_bottom=200,
                                out_dir=tmp_path)

    def test_reexport_byte_identical(self, rgg_run, tmp_path):
        g, ranking, subs = rgg_run
        a = export_explanations(g, ranking, subs, 2, 2, "json", tmp_path / "a")
        b = export_explanations(g, ranking, subs, 2, 2, "json", tmp_path / "b")
        for pa, pb in zip(a, b):
            assert pa.read_bytes() == pb.read_bytes()

    def test_dot_format(self, rgg_run, tmp_path):
        g, ranking, subs = rgg_run
        paths = export_explanations(g, ranking, subs, 1, 1, "dot", tmp_path)
        text = paths[0].read_text()
        assert text.startswith("graph node_")
        assert "color=red" in text          # source highlighted
        assert 'pos="' in text              # 2-D coordinates pinned
        assert " -- " in text

    def test_dot_skips_positions_above_2d(self, rng, tmp_path):
        g = random_graph(rng, 20, d=3)
        model = GCAD(psi=4, t=10, seed=0).fit(g)
        paths = export_explanations(g, model.ranking(), sec(g, 1), 1, 0,
                                    "dot", tmp_path)
        assert 'pos="' not in paths[0].read_text()

    def test_serialization_detector_independent(self, tmp_path, rng):
        # different detectors select different nodes, but a given node's
        # exported subgraph must be identical
        g = random_graph(rng, 40, edge_prob=0.15)
        subs = sec(g, 1)
        m1 = GCAD(detector="idk", psi=4, t=20, seed=0).fit(g)
        m2 = GCAD(detector="lof", lof_k=5).fit(g)
        e1 = Explanation(7, 1, float(m1.scores_[7]), "anomalous", subs[7]).to_dict()
        e2 = Explanation(7, 1, float(m2.scores_[7]), "anomalous", subs[7]).to_dict()
        assert e1["subgraph"] == e2["subgraph"]
