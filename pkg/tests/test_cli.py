import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from evgraph.cli import main
from evgraph.config import ConfigError, parse_text, resolve
from evgraph.filters import EVParams, PolyParams, filter_to_dict
from evgraph.graph import Graph, write_edge_list
from oracles import path_adjacency, random_symmetric_adjacency
from synthetic_corpus import write_corpus

TINY_SOURCE_LOC = """\
# two fast architectures on a small SBM
num_nodes = 20
num_communities = 4
num_train = 40
num_test = 20
epochs = 1
batch_size = 20
features = 2
order = 2
architectures = Polynomial, EV
num_graph_realizations = 1
num_data_realizations = 2
"""


def write(path, text):
    path.write_text(text)
    return path


def snapshot(directory):
    return {p.name: p.read_bytes() for p in sorted(directory.iterdir())}


@pytest.fixture(scope="module")
def corpus(tmp_path_factory):
    return write_corpus(tmp_path_factory.mktemp("corpus"), per_author=200)


# -- config parsing ------------------------------------------------------------------
def test_parse_text_and_resolve():
    raw = parse_text("# comment\nmaster_seed = 4   # trailing\n\nnum_checks=3\n")
    assert raw == {"master_seed": ("4", 2), "num_checks": ("3", 4)}
    settings = resolve("gradcheck", raw)
    assert settings["master_seed"] == 4 and settings["num_checks"] == 3 and settings["tolerance"] == 1e-5
    assert settings["workers"] >= 1


@pytest.mark.parametrize("text, line", [
    ("master_seed = 1\nbogus = 2\n", 2),
    ("num_checks = 0\n", 1),
    ("master_seed = one\n", 1),
    ("no equals sign\n", 1),
    ("master_seed = 1\nmaster_seed = 2\n", 2),
])
def test_config_errors_are_line_anchored(text, line):
    with pytest.raises(ConfigError, match=f"cfg:{line}:"):
        resolve("gradcheck", parse_text(text, "cfg"), "cfg")


def test_boolean_and_list_values():
    s = resolve("author", parse_text("normalize = no\n"))
    assert s["normalize"] is False
    s = resolve("source-loc", parse_text("architectures = EV, Spectral\n"))
    assert s["architectures"] == ("EV", "Spectral")
    with pytest.raises(ConfigError):
        resolve("author", parse_text("normalize = maybe\n"))


# -- exit codes ----------------------------------------------------------------------
def test_usage_errors_exit_2(tmp_path, capsys):
    assert main([]) == 2
    assert main(["frobnicate"]) == 2
    assert main(["gradcheck", "--config", str(tmp_path / "nope.cfg")]) == 2
    assert "nope.cfg" in capsys.readouterr().err
    cfg = write(tmp_path / "bad.cfg", "master_seed = 0\nnum_train = -3\n")
    assert main(["source-loc", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2
    assert ":2:" in capsys.readouterr().err
    assert main(["source-loc", "--workers", "0", "--out", str(tmp_path / "o")]) == 2
    assert main(["source-loc"]) == 2  # --out missing


def test_dry_run_writes_nothing(tmp_path, capsys):
    cfg = write(tmp_path / "s.cfg", TINY_SOURCE_LOC)
    out = tmp_path / "out"
    assert main(["source-loc", "--config", str(cfg), "--out", str(out), "--dry-run"]) == 0
    assert not out.exists()
    printed = capsys.readouterr().out
    assert "num_nodes = 20" in printed


def test_source_loc_outputs_and_determinism(tmp_path):
    cfg = write(tmp_path / "s.cfg", TINY_SOURCE_LOC)
    runs = []
    for name, workers in (("a", "1"), ("b", "2")):
        assert main(["source-loc", "--config", str(cfg), "--out", str(tmp_path / name), "--workers", workers]) == 0
        runs.append(snapshot(tmp_path / name))
    assert runs[0] == runs[1]
    assert set(runs[0]) == {"runs.csv", "results.csv", "results.txt"}
    rows = list(csv.reader(runs[0]["results.csv"].decode().splitlines()))
    assert rows[0] == ["architecture", "mean_accuracy", "std_accuracy", "runs"]
    assert [r[0] for r in rows[1:]] == ["Polynomial", "EV"] and all(r[3] == "2" for r in rows[1:])


def test_unknown_architecture_is_config_error(tmp_path):
    cfg = write(tmp_path / "s.cfg", "architectures = EV, Wavelet\n")
    assert main(["source-loc", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2


# -- author -------------------------------------------------------------------------------
def test_author_empty_corpus_exits_2(tmp_path):
    (tmp_path / "empty").mkdir()
    assert main(["author", str(tmp_path / "empty"), "--out", str(tmp_path / "o")]) == 2


def test_author_pipeline_and_determinism(tmp_path, corpus):
    cfg = write(tmp_path / "a.cfg", "epochs = 10\nmaster_seed = 3\n")
    for name in ("a", "b"):
        assert main(["author", str(corpus), "--config", str(cfg), "--out", str(tmp_path / name)]) == 0
    first = snapshot(tmp_path / "a")
    assert first == snapshot(tmp_path / "b")
    assert set(first) == {"accuracy.csv", "trace.csv", "model.json", "signature.edges", "signals.csv"}
    rows = list(csv.reader(first["accuracy.csv"].decode().splitlines()))
    assert rows[0] == ["split", "samples", "accuracy"]
    assert [(r[0], r[1]) for r in rows[1:]] == [("train", "280"), ("val", "40"), ("test", "80")]
    assert len(first["trace.csv"].decode().splitlines()) == 11


def test_author_config_errors(tmp_path, corpus):
    cfg = write(tmp_path / "a.cfg", "target_author = gamma\n")
    assert main(["author", str(corpus), "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2
    cfg = write(tmp_path / "b.cfg", "split_train = 500\n")
    assert main(["author", str(corpus), "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2
    cfg = write(tmp_path / "c.cfg", "function_words = missing.txt\n")
    assert main(["author", str(corpus), "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2


# -- gradcheck ------------------------------------------------------------------------------------
def test_gradcheck_exit_codes_and_repeatability(tmp_path, capsys):
    assert main(["gradcheck", "--seed", "1", "--out", str(tmp_path / "a")]) == 0
    first = capsys.readouterr().out
    assert main(["gradcheck", "--seed", "1", "--out", str(tmp_path / "b")]) == 0
    assert capsys.readouterr().out == first
    assert snapshot(tmp_path / "a") == snapshot(tmp_path / "b")
    assert len(first.splitlines()) == 6
    assert main(["gradcheck", "--seed", "1", "--tolerance", "0"]) == 1
    assert main(["gradcheck", "--tolerance", "-1"]) == 2


# -- spectral response --------------------------------------------------------------------------------
def response_rows(path):
    lines = path.read_text().splitlines()
    rows = list(csv.reader(lines[1:]))
    return lines[0], rows[0], np.array([[float(v) for v in r] for r in rows[1:]])


def run_response(tmp_path, graph, params, name="r"):
    write_edge_list(graph, tmp_path / "g.edges")
    (tmp_path / "f.json").write_text(json.dumps(filter_to_dict(params)))
    code = main(["spectral-response", str(tmp_path / "g.edges"), str(tmp_path / "f.json"),
                 "--out", str(tmp_path / name)])
    return code, tmp_path / name / "response.csv"


def test_poly_response_on_path(tmp_path):
    g = Graph.from_dense(path_adjacency(3))
    code, path = run_response(tmp_path, g, PolyParams(np.array([1.0, 1.0])))
    assert code == 0
    flag, header, table = response_rows(path)
    assert flag.startswith("# response: diagonal") and header == ["lambda", "h"]
    lam = np.sort(np.linalg.eigvalsh(path_adjacency(3)))
    np.testing.assert_allclose(np.sort(table[:, 0]), lam, atol=1e-12)
    np.testing.assert_allclose(table[:, 1], 1 + table[:, 0], atol=1e-12)


def test_zero_filter_response(tmp_path):
    g = Graph.from_dense(path_adjacency(4))
    code, path = run_response(tmp_path, g, PolyParams(np.zeros(3)))
    assert code == 0 and not response_rows(path)[2][:, 1].any()
    code, path = run_response(tmp_path, g, EVParams.init(g, 2, 1, 1, np.random.default_rng(0)).with_arrays(
        coeffs=np.zeros((2, 10, 1, 1))), name="ev")
    assert code == 0 and not response_rows(path)[2][:, 1].any()


def test_perturbed_ev_is_non_diagonal(tmp_path):
    rng = np.random.default_rng(4)
    g = Graph.from_dense(random_symmetric_adjacency(rng, 6, 0.6))
    code, path = run_response(tmp_path, g, EVParams.init(g, 2, 1, 1, rng))
    assert code == 0
    assert response_rows(path)[0].startswith("# response: non-diagonal")


def test_directed_graph_rejected(tmp_path):
    g = Graph.from_dense(np.triu(np.ones((3, 3)), 1), directed=True)
    code, _ = run_response(tmp_path, g, PolyParams(np.ones(2)))
    assert code == 2
    assert main(["spectral-response", str(tmp_path / "none.edges"), str(tmp_path / "f.json"),
                 "--out", str(tmp_path / "o")]) == 2


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "evgraph.cli", "gradcheck", "--dry-run"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and "tolerance" in proc.stdout
