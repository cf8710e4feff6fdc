import csv
import json

import numpy as np
import pytest

from gcad.cli import main


def run(argv):
    return main([str(a) for a in argv])


@pytest.fixture(scope="module")
def graph_dir(tmp_path_factory):
    d = tmp_path_factory.mktemp("data") / "rgg"
    assert run(["generate", "--family", "rgg_s", "--seed", "7", "--out", d]) == 0
    return d


class TestGenerate:
    def test_files_written(self, graph_dir):
        for name in ("edges.csv", "attrs.csv", "labels.csv", "spec.json"):
            assert (graph_dir / name).is_file()
        spec = json.loads((graph_dir / "spec.json").read_text())
        assert spec["family"] == "rgg_s" and spec["seed"] == 7
        assert spec["params"]["tau"] == 0.077
        assert spec["n"] == 500

    def test_deterministic_regeneration(self, graph_dir, tmp_path):
        assert run(["generate", "--family", "rgg_s", "--seed", "7",
                    "--out", tmp_path / "again"]) == 0
        for name in ("edges.csv", "attrs.csv", "labels.csv"):
            assert (tmp_path / "again" / name).read_bytes() == (graph_dir / name).read_bytes()

    def test_n_override_only_where_supported(self, tmp_path):
        assert run(["generate", "--family", "watts", "--n", "100",
                    "--out", tmp_path / "w"]) == 0
        assert run(["generate", "--family", "lattice_l", "--n", "100",
                    "--out", tmp_path / "l"]) == 2


class TestDetect:
    def test_scores_csv_schema(self, graph_dir, tmp_path):
        out = tmp_path / "scores.csv"
        assert run(["detect", "--graph", graph_dir, "--h", "1",
                    "--lambda", "0.5", "--detector", "idk", "--psi", "8",
                    "--t", "100", "--seed", "42", "--out", out]) == 0
        with open(out, newline="") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["node", "score", "rank"]
        assert len(rows) == 501
        assert [int(r[0]) for r in rows[1:]] == list(range(500))  # node-index order
        ranks = [int(r[2]) for r in rows[1:]]
        assert sorted(ranks) == list(range(1, 501))
        scores = np.array([float(r[1]) for r in rows[1:]])
        by_rank = scores[np.argsort(ranks)]
        assert np.all(np.diff(by_rank) <= 0)  # rank 1 is the highest score

    def test_detect_deterministic(self, graph_dir, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        args = ["detect", "--graph", graph_dir, "--seed", "3", "--out"]
        assert run(args + [a]) == 0
        assert run(args + [b]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_dump_embeddings(self, graph_dir, tmp_path):
        out = tmp_path / "s.csv"
        emb = tmp_path / "E.csv"
        assert run(["detect", "--graph", graph_dir, "--seed", "1",
                    "--out", out, "--dump-embeddings", emb]) == 0
        E = np.loadtxt(emb, delimiter=",")
        assert E.shape == (500, 4)  # d=2, h=1 -> d*(h+1)

    def test_top_m_flagging(self, graph_dir, tmp_path, capsys):
        assert run(["detect", "--graph", graph_dir, "--seed", "1",
                    "--out", tmp_path / "s.csv", "--top-m", "5"]) == 0
        assert "flagged 5 node(s)" in capsys.readouterr().out

    def test_lof_and_iforest_paths(self, graph_dir, tmp_path):
        for det in ("lof", "iforest"):
            assert run(["detect", "--graph", graph_dir, "--detector", det,
                        "--seed", "1", "--out", tmp_path / f"{det}.csv"]) == 0

    def test_missing_graph_dir_errors(self, tmp_path):
        assert run(["detect", "--graph", tmp_path / "nope",
                    "--out", tmp_path / "s.csv"]) == 2

    def test_tau_flagging(self, graph_dir, tmp_path, capsys):
        assert run(["detect", "--graph", graph_dir, "--seed", "1",
                    "--out", tmp_path / "s.csv", "--tau", "0.99"]) == 0
        assert "flagged" in capsys.readouterr().out


class TestExplain:
    def test_roundtrip(self, graph_dir, tmp_path):
        scores = tmp_path / "scores.csv"
        assert run(["detect", "--graph", graph_dir, "--seed", "42",
                    "--out", scores]) == 0
        out = tmp_path / "explain"
        assert run(["explain", "--graph", graph_dir, "--run", scores,
                    "--top", "2", "--bottom", "2", "--format", "dot",
                    "--out", out]) == 0
        files = sorted(out.iterdir())
        assert len(files) == 4
        assert all(f.suffix == ".dot" for f in files)

    def test_json_format(self, graph_dir, tmp_path):
        scores = tmp_path / "scores.csv"
        run(["detect", "--graph", graph_dir, "--seed", "42", "--out", scores])
        out = tmp_path / "explain_json"
        assert run(["explain", "--graph", graph_dir, "--run", scores,
                    "--top", "1", "--bottom", "0", "--format", "json",
                    "--out", out]) == 0
        payload = json.loads(next(out.iterdir()).read_text())
        assert payload["kind"] == "anomalous" and payload["rank"] == 1


class TestScaleupCLI:
    def test_timing_csv(self, tmp_path, capsys):
        out = tmp_path / "timing.csv"
        assert run(["scaleup", "--sizes", "200,400", "--out", out]) == 0
        lines = out.read_text().splitlines()
        assert len(lines) == 3
        assert "n=" in capsys.readouterr().out
