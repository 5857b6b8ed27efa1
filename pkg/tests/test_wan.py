import csv

import numpy as np
import pytest

from evgraph.errors import InvalidArgument
from evgraph.graph import Graph, read_edge_list
from evgraph.wan import (
    Corpus,
    WanConfig,
    assemble_author_dataset,
    build_wan,
    check_vocab,
    export_dataset,
    frequency_signal,
    load_function_words,
    read_corpus,
    signature_graph,
    tokenize,
    wan_matrix,
)
from synthetic_corpus import FILLER, WORDS, make_corpus, write_corpus

RAW = WanConfig(window=2, decay=0.5, normalize=False)


def test_tokenizer_and_word_list():
    assert tokenize("The cat's  HAT, 2 times!") == ["the", "cat", "s", "hat", "times"]
    words = load_function_words()
    assert len(words) >= 150 and len(set(words)) == len(words)
    assert "the" in words and "of" in words
    with pytest.raises(InvalidArgument):
        check_vocab([])
    with pytest.raises(InvalidArgument):
        check_vocab(["a", "b", "a"])


def test_wan_config_validation():
    for bad in (dict(window=0), dict(window=1.5), dict(decay=1.0), dict(decay=0.0)):
        with pytest.raises(InvalidArgument):
            WanConfig(**bad)


def test_no_function_words_gives_empty_graph():
    g = build_wan(["cat", "dog", "bird"], ["the", "of"])
    assert g.num_directed_edges == 0 and g.num_nodes == 2


def test_single_pair_hand_count():
    w = wan_matrix(["the", "cat", "the"], ["the"], RAW)
    assert w[0, 0] == 0.5


def test_hand_counted_weights():
    # a b a with D=3, alpha=0.5: a->b (d=1) 1, b->a (d=1) 1, a->a (d=2) 0.5
    w = wan_matrix(["a", "b", "a"], ["a", "b"], WanConfig(window=3, decay=0.5, normalize=False))
    np.testing.assert_array_equal(w, [[0.5, 1.0], [1.0, 0.0]])
    # the edge from u to v lives in row u
    g = build_wan(["a", "x", "b"], ["a", "b"], WanConfig(window=3, decay=0.5, normalize=False))
    np.testing.assert_array_equal(g.to_dense(), [[0, 0.5], [0, 0]])


def test_doubling_with_separator_doubles_weights():
    rng = np.random.default_rng(0)
    vocab = list(WORDS)
    tokens = [str(rng.choice(WORDS + FILLER)) for _ in range(300)]
    cfg = WanConfig(window=10, decay=0.8, normalize=False)
    once = wan_matrix(tokens, vocab, cfg)
    twice = wan_matrix(tokens + ["zzz"] * cfg.window + tokens, vocab, cfg)
    np.testing.assert_allclose(twice, 2 * once, rtol=1e-13)
    assert (once >= 0).all()


def test_rows_normalize_to_one():
    rng = np.random.default_rng(1)
    tokens = [str(rng.choice(WORDS + FILLER)) for _ in range(400)]
    w = wan_matrix(tokens, list(WORDS), WanConfig())
    sums = w.sum(axis=1)
    nz = sums > 0
    assert nz.any()
    assert np.abs(sums[nz] - 1).max() <= 1e-12


def _graph(a):
    return Graph.from_dense(np.asarray(a, float), directed=True)


def test_signature_single_and_repeated():
    a = np.array([[0, 2, 0], [1, 0, 3], [0, 0, 1.0]])
    sym = (a + a.T) / 2
    expected = sym / np.abs(np.linalg.eigvalsh(sym)).max()
    one = signature_graph([_graph(a)]).to_dense()
    np.testing.assert_allclose(one, expected, atol=1e-12)
    two = signature_graph([_graph(a), _graph(a)]).to_dense()
    np.testing.assert_allclose(two, one, atol=1e-12)


def test_signature_matches_dense_sum(rng):
    mats = [rng.random((4, 4)) * (rng.random((4, 4)) < 0.5) for _ in range(3)]
    total = sum(mats)
    sym = (total + total.T) / 2
    expected = sym / np.abs(np.linalg.eigvalsh(sym)).max()
    got = signature_graph([_graph(m) for m in mats])
    assert not got.directed
    np.testing.assert_allclose(got.to_dense(), expected, atol=1e-12)


def test_signature_vocab_mismatch():
    with pytest.raises(InvalidArgument):
        signature_graph([_graph(np.ones((3, 3))), _graph(np.ones((4, 4)))])
    with pytest.raises(InvalidArgument):
        signature_graph([])


def test_frequency_examples():
    np.testing.assert_array_equal(frequency_signal(["cat"], ["the", "of"]), [0, 0])
    np.testing.assert_array_equal(frequency_signal(["the", "of", "the"], ["the", "of"]), [2, 1])


def test_frequency_planted_counts():
    rng = np.random.default_rng(5)
    vocab = list(WORDS)
    planted = rng.multinomial(600, np.full(len(vocab), 1 / len(vocab)))
    tokens = [w for w, c in zip(vocab, planted) for _ in range(c)] + ["filler"] * 400
    rng.shuffle(tokens)
    assert len(tokens) == 1000
    np.testing.assert_array_equal(frequency_signal(tokens, vocab), planted)


def test_frequency_permutation_equivariance(rng):
    vocab = list(WORDS)
    tokens = [str(rng.choice(WORDS + FILLER)) for _ in range(200)]
    perm = rng.permutation(len(vocab))
    x = frequency_signal(tokens, vocab)
    np.testing.assert_array_equal(frequency_signal(tokens, [vocab[i] for i in perm]), x[perm])


def corpus_of(per_author, seed=0):
    texts = make_corpus(seed=seed, per_author=per_author, length=40)
    excerpts = [(tokenize(t), a) for a in sorted(texts) for t in texts[a]]
    return Corpus(tuple(excerpts), WORDS)


def test_corpus_validation():
    with pytest.raises(InvalidArgument):
        Corpus(((("the",), "a"), ((), "b")), WORDS)


def test_split_sizes_at_large_counts():
    corpus = corpus_of(846)
    data, graph = assemble_author_dataset(corpus, "alpha", (608, 68, 170), seed=0)
    assert [int(np.sum(data.splits == s)) for s in ("train", "val", "test")] == [1216, 136, 340]
    for s in ("train", "val", "test"):
        labels = data.labels[data.splits == s]
        assert labels.sum() * 2 == len(labels)
    assert graph.num_nodes == len(WORDS) and graph.is_symmetric


def test_tiny_split_and_determinism():
    corpus = corpus_of(2)
    data, _ = assemble_author_dataset(corpus, "alpha", (1, 0, 1), seed=3)
    assert [int(np.sum(data.splits == s)) for s in ("train", "val", "test")] == [2, 0, 2]
    a, ga = assemble_author_dataset(corpus_of(20), "beta", (5, 2, 3), seed=7)
    b, gb = assemble_author_dataset(corpus_of(20), "beta", (5, 2, 3), seed=7)
    np.testing.assert_array_equal(a.signals, b.signals)
    np.testing.assert_array_equal(a.splits, b.splits)
    np.testing.assert_array_equal(ga.to_dense(), gb.to_dense())


def test_signature_uses_only_target_training_texts():
    corpus = corpus_of(20)
    data, graph = assemble_author_dataset(corpus, "alpha", (5, 2, 3), seed=1)
    # recover the chosen training excerpts from their count vectors
    own = corpus.by_author("alpha")
    counts = [frequency_signal(t, WORDS) for t in own]
    train_x = data.signals[(data.splits == "train") & (data.labels == 1)][..., 0]
    chosen = [next(t for t, c in zip(own, counts) if np.array_equal(c, x)) for x in train_x]
    ref = signature_graph([build_wan(t, WORDS) for t in chosen])
    np.testing.assert_allclose(graph.to_dense(), ref.to_dense(), atol=1e-12)


def test_insufficient_excerpts_reports_counts():
    with pytest.raises(InvalidArgument, match="found 2"):
        assemble_author_dataset(corpus_of(2), "alpha", (2, 0, 1), seed=0)


def test_read_and_export(tmp_path):
    root = write_corpus(tmp_path / "corpus", per_author=6, length=30)
    (root / "alpha" / "empty.txt").write_text("\n")
    corpus = read_corpus(root, WORDS)
    assert corpus.authors == ["alpha", "beta"] and len(corpus.excerpts) == 12
    data, graph = assemble_author_dataset(corpus, "alpha", (3, 1, 2), seed=0)
    export_dataset(data, graph, WORDS, tmp_path / "out")
    back = read_edge_list(tmp_path / "out" / "signature.edges")
    np.testing.assert_allclose(back.to_dense(), graph.to_dense(), atol=1e-15)
    with open(tmp_path / "out" / "signals.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == [*WORDS, "split", "label"]
    assert len(rows) == 1 + 12
    assert rows[-1][-1] in ("0", "1")
    with pytest.raises(InvalidArgument):
        read_corpus(tmp_path / "missing")
    (tmp_path / "empty").mkdir()
    with pytest.raises(InvalidArgument):
        read_corpus(tmp_path / "empty")
